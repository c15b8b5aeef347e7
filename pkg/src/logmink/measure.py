"""Discrete measures on the unit sphere and the concentration conditions.

A :class:`DiscreteMeasure` is a finite list of unit normals with positive
weights.  This module decides whether such a measure can be a cone-volume
measure: it tests hemisphere concentration and general position, then checks
the subspace concentration bound on every essential subspace.
"""
import enum
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import lp
from .errors import (ConditionError, HemisphereError, InvalidMeasureError,
                     ResourceGuardError)

NORM_TOL = 1e-12
DUPLICATE_ANGLE = 1e-10
SUBSPACE_TOL = 1e-9
RANK_TOL = 1e-9

MAX_ATOMS = 32
MAX_DIM = 6


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atoms ``(normals[k], weights[k])`` on the sphere ``S^{dim-1}``."""

    normals: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        u = np.array(self.normals, dtype=float)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if u.ndim == 1:
            u = u.reshape(-1, 1)
        if u.ndim != 2 or u.shape[0] != w.shape[0]:
            raise InvalidMeasureError("normals and weights have mismatched shapes")
        if u.shape[0] == 0:
            raise InvalidMeasureError("a measure needs at least one atom")
        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(w)):
            raise InvalidMeasureError("non-finite data")
        if np.any(w <= 0):
            raise InvalidMeasureError("weights must be positive")
        norms = np.linalg.norm(u, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise InvalidMeasureError("normals must have unit length")
        if u.shape[1] == 1 and np.any(np.abs(np.abs(u[:, 0]) - 1.0) > NORM_TOL):
            raise InvalidMeasureError("1-dimensional normals must be +1 or -1")
        for i, j in combinations(range(len(u)), 2):
            if _angle(u[i], u[j]) < DUPLICATE_ANGLE:
                raise InvalidMeasureError(f"atoms {i} and {j} have equal normals")
        u.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "normals", u)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, normals, weights, normalize=True):
        """Build a measure, normalizing normals and merging duplicates."""
        u = np.array(normals, dtype=float)
        if u.ndim == 1:
            u = u.reshape(-1, 1)
        w = np.array(weights, dtype=float).reshape(-1)
        if len(u) != len(w):
            raise InvalidMeasureError("normals and weights have mismatched lengths")
        if np.any(w <= 0):
            raise InvalidMeasureError("weights must be positive")
        if normalize:
            norms = np.linalg.norm(u, axis=1)
            if np.any(norms == 0):
                raise InvalidMeasureError("zero normal vector")
            u = u / norms[:, None]
        merged_u = []
        merged_w = []
        for vec, weight in zip(u, w):
            for k, other in enumerate(merged_u):
                if _angle(vec, other) < DUPLICATE_ANGLE:
                    merged_w[k] += weight
                    break
            else:
                merged_u.append(vec)
                merged_w.append(float(weight))
        return cls(np.array(merged_u), np.array(merged_w))

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def size(self):
        return self.normals.shape[0]

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def scaled(self, c):
        return DiscreteMeasure(self.normals, self.weights * c)

    def rotated(self, Q):
        return DiscreteMeasure(self.normals @ np.asarray(Q).T, self.weights)

    def to_json(self):
        return {
            "dim": self.dim,
            "atoms": [{"u": [float(x) for x in u], "gamma": float(g)}
                      for u, g in zip(self.normals, self.weights)],
        }

    @classmethod
    def from_json(cls, data):
        try:
            dim = int(data["dim"])
            atoms = data["atoms"]
            normals = [list(map(float, a["u"])) for a in atoms]
            weights = [float(a["gamma"]) for a in atoms]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidMeasureError(f"malformed measure JSON: {exc}") from exc
        if not atoms:
            raise InvalidMeasureError("measure JSON has no atoms")
        if any(len(u) != dim for u in normals):
            raise InvalidMeasureError("normal length does not match 'dim'")
        if any(g <= 0 for g in weights):
            raise InvalidMeasureError("gamma must be positive")
        return cls.from_atoms(normals, weights)

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidMeasureError(f"invalid JSON: {exc}") from exc
        return cls.from_json(data)


def _angle(a, b):
    # accurate for nearly parallel unit vectors, unlike arccos(a . b)
    return 2.0 * math.atan2(np.linalg.norm(a - b), np.linalg.norm(a + b))


class Status(str, enum.Enum):
    STRICT = "STRICT"
    EQUALITY = "EQUALITY"
    VIOLATED = "VIOLATED"


class Verdict(str, enum.Enum):
    STRICT_OK = "STRICT_OK"
    EQUALITY_OK = "EQUALITY_OK"
    FAIL = "FAIL"


@dataclass
class SubspaceReport:
    basis: np.ndarray  # (n, dim_xi), orthonormal columns
    members: tuple  # indices of atoms lying in the subspace
    essential: bool
    mass: float
    bound: float
    status: Status
    partner: Optional["SubspaceReport"] = None

    @property
    def dim_xi(self):
        return self.basis.shape[1]

    def to_json(self):
        out = {
            "basis": self.basis.T.tolist(),
            "dim": self.dim_xi,
            "atoms": list(self.members),
            "essential": self.essential,
            "mass": self.mass,
            "bound": self.bound,
            "status": self.status.value,
        }
        if self.partner is not None:
            out["partner"] = self.partner.to_json()
        return out


@dataclass
class ConditionVerdict:
    hemisphere_ok: bool
    general_position: bool
    status: Verdict
    witnesses: list = field(default_factory=list)
    equality_pairs: list = field(default_factory=list)

    def to_json(self):
        return {
            "hemisphere_ok": self.hemisphere_ok,
            "general_position": self.general_position,
            "status": self.status.value,
            "subspaces": [w.to_json() for w in self.witnesses],
        }


# -- hemisphere test -------------------------------------------------------

def hemisphere_witness(normals):
    """Return a unit ``v`` with ``v . u_k <= 0`` for all rows, or ``None``.

    ``None`` means the vectors are not concentrated on any closed
    hemisphere: they span the space and ``sum lambda_k u_k = 0`` has a
    solution with every ``lambda_k >= 1`` (decided by Phase-I simplex).
    """
    U = np.atleast_2d(np.asarray(normals, dtype=float))
    N, n = U.shape
    if n == 1:
        signs = U[:, 0]
        if np.any(signs > 0) and np.any(signs < 0):
            return None
        return np.array([-1.0 if np.all(signs > 0) else 1.0])
    _, s, vt = np.linalg.svd(U, full_matrices=True)
    rank = int(np.sum(s > RANK_TOL * max(1.0, s[0])))
    if rank < n:
        return vt[-1]
    # sum_k (1 + s_k) u_k = 0  <=>  U^T s = -U^T 1
    res = lp.phase_one(U.T, -U.sum(axis=0))
    if res.feasible:
        return None
    v = res.certificate
    return v / np.linalg.norm(v)


def is_hemisphere_concentrated(m):
    return hemisphere_witness(m.normals) is not None


def is_general_position(m):
    """True iff every ``<= n`` normals are linearly independent."""
    n = m.dim
    if m.size < n:
        raise InvalidMeasureError(f"general position needs at least {n} atoms")
    U = m.normals
    idx = np.array(list(combinations(range(m.size), n)))
    for start in range(0, len(idx), 4096):
        block = U[idx[start:start + 4096]]
        s = np.linalg.svd(block, compute_uv=False)
        if np.any(s[:, -1] <= RANK_TOL * s[:, 0]):
            return False
    return True


# -- subspaces ---------------------------------------------------------------

def _span_basis(vectors):
    """Orthonormal basis (columns) of the span of the given rows."""
    V = np.atleast_2d(vectors)
    u, s, _ = np.linalg.svd(V.T, full_matrices=False)
    r = int(np.sum(s > RANK_TOL * max(1.0, s[0])))
    return u[:, :r]


def _canonical_basis(B):
    """Deterministic orthonormal basis: reduced row echelon form, then QR."""
    P = B @ B.T
    # rows of the projector span the subspace; pick them greedily in order
    rows = []
    for row in P:
        trial = rows + [row]
        if np.linalg.matrix_rank(np.array(trial), tol=1e-8) == len(trial):
            rows.append(row)
        if len(rows) == B.shape[1]:
            break
    q, r = np.linalg.qr(np.array(rows).T)
    q = q * np.sign(np.where(np.abs(np.diag(r)) > 0, np.diag(r), 1.0))
    return q


def members_of(normals, basis, tol=SUBSPACE_TOL):
    """Indices of rows lying in the column span of ``basis``."""
    resid = normals - (normals @ basis) @ basis.T
    return tuple(int(i) for i in np.flatnonzero(np.linalg.norm(resid, axis=1) <= tol))


def _essential(normals, members, basis):
    coords = normals[list(members)] @ basis
    return hemisphere_witness(coords) is None


def _bound_status(mass, bound, total):
    tol = 1e-9 * total
    if mass > bound + tol:
        return Status.VIOLATED
    if mass < bound - tol:
        return Status.STRICT
    return Status.EQUALITY


def _all_spans(m, max_atoms, max_dim):
    n = m.dim
    if m.size > max_atoms or n > max_dim:
        raise ResourceGuardError(
            f"subspace enumeration limited to N <= {max_atoms}, n <= {max_dim}"
            f" (got N = {m.size}, n = {n})")
    U = m.normals
    found = {}
    level = {}
    for i in range(m.size):
        B = _span_basis(U[i])
        key = members_of(U, B)
        level.setdefault(key, B)
    for k in range(1, n):
        found.update(level)
        if k == n - 1:
            break
        nxt = {}
        for key in level:
            for j in range(m.size):
                if j in key:
                    continue
                B = _span_basis(U[list(key) + [j]])
                if B.shape[1] != k + 1:
                    continue
                new_key = members_of(U, B)
                if new_key not in nxt and new_key not in found:
                    nxt[new_key] = B
        level = nxt
    return found


def enumerate_subspaces(m, max_atoms=MAX_ATOMS, max_dim=MAX_DIM):
    """Reports for every proper subspace spanned by atoms of ``m``.

    Each distinct span (identified by the set of atoms it contains) appears
    once.  Ordered by dimension, then by member indices.
    """
    if m.dim < 2:
        return []
    total = m.total_mass
    reports = []
    for key, B in _all_spans(m, max_atoms, max_dim).items():
        basis = _canonical_basis(B)
        mass = float(m.weights[list(key)].sum())
        bound = basis.shape[1] / m.dim * total
        reports.append(SubspaceReport(
            basis=basis,
            members=key,
            essential=_essential(m.normals, key, basis),
            mass=mass,
            bound=bound,
            status=_bound_status(mass, bound, total),
        ))
    reports.sort(key=lambda r: (r.dim_xi, r.members))
    return reports


def enumerate_essential_subspaces(m, max_atoms=MAX_ATOMS, max_dim=MAX_DIM):
    return [r for r in enumerate_subspaces(m, max_atoms, max_dim) if r.essential]


def _complement_partner(m, report):
    """The only candidate complement with equality: the span of the rest."""
    n = m.dim
    rest = [i for i in range(m.size) if i not in report.members]
    if not rest:
        return None
    B = _span_basis(m.normals[rest])
    if B.shape[1] != n - report.dim_xi:
        return None
    joint = np.hstack([report.basis, B])
    if np.linalg.matrix_rank(joint, tol=1e-9) < n:
        return None
    key = members_of(m.normals, B)
    basis = _canonical_basis(B)
    mass = float(m.weights[list(key)].sum())
    bound = basis.shape[1] / n * m.total_mass
    partner = SubspaceReport(
        basis=basis,
        members=key,
        essential=_essential(m.normals, key, basis),
        mass=mass,
        bound=bound,
        status=_bound_status(mass, bound, m.total_mass),
    )
    if partner.status is not Status.EQUALITY:
        return None
    if set(key) | set(report.members) != set(range(m.size)):
        return None
    return partner


def classify_concentration(m, max_atoms=MAX_ATOMS, max_dim=MAX_DIM):
    """Evaluate the essential subspace concentration condition.

    Raises :class:`HemisphereError` for hemisphere-concentrated input.
    """
    witness = hemisphere_witness(m.normals)
    if witness is not None:
        raise HemisphereError("measure is concentrated on a closed hemisphere",
                              witness=witness)
    general = m.size >= m.dim and is_general_position(m)
    if m.dim == 1:
        return ConditionVerdict(True, general, Verdict.STRICT_OK)
    essential = enumerate_essential_subspaces(m, max_atoms, max_dim)
    status = Verdict.STRICT_OK
    pairs = []
    for rep in essential:
        if rep.status is Status.VIOLATED:
            status = Verdict.FAIL
        elif rep.status is Status.EQUALITY:
            rep.partner = _complement_partner(m, rep)
            if rep.partner is None:
                status = Verdict.FAIL
            else:
                pairs.append((rep, rep.partner))
                if status is Verdict.STRICT_OK:
                    status = Verdict.EQUALITY_OK
    return ConditionVerdict(True, general, status, essential, pairs)


def require_condition(m):
    """Return the verdict, raising :class:`ConditionError` on FAIL."""
    verdict = classify_concentration(m)
    if verdict.status is Verdict.FAIL:
        bad = [w for w in verdict.witnesses
               if w.status is Status.VIOLATED
               or (w.status is Status.EQUALITY and w.partner is None)]
        detail = ", ".join(f"dim {w.dim_xi} atoms {list(w.members)} mass "
                           f"{w.mass:.6g} > bound {w.bound:.6g}"
                           if w.status is Status.VIOLATED else
                           f"dim {w.dim_xi} atoms {list(w.members)} equality "
                           "without complementary partner" for w in bad)
        raise ConditionError(f"essential subspace concentration fails: {detail}",
                             verdict=verdict)
    return verdict


# -- restriction and positive hulls ------------------------------------------

def restrict(m, basis):
    """Atoms of ``m`` lying in ``span(basis)``, in the basis coordinates."""
    B = np.asarray(basis, dtype=float)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if not np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10):
        raise ValueError("basis must be orthonormal")
    idx = members_of(m.normals, B)
    if not idx:
        raise InvalidMeasureError("no atoms lie in the subspace")
    coords = m.normals[list(idx)] @ B
    coords /= np.linalg.norm(coords, axis=1)[:, None]
    return DiscreteMeasure(coords, m.weights[list(idx)])


def positive_decomposition(u, m):
    """Write ``u`` as a nonnegative combination of at most ``d`` atoms.

    ``d`` is the dimension of the span of the support.  Coefficients are
    bounded by ``1/r`` where ``r`` is the inradius about the origin of the
    convex hull of the support.  Returns ``(pairs, lam)`` where ``pairs`` is
    a list of ``(atom index, coefficient)``.
    """
    from .hull import convex_hull

    u = np.asarray(u, dtype=float)
    B = _span_basis(m.normals)
    if np.linalg.norm(u - B @ (B.T @ u)) > 1e-9 * max(1.0, np.linalg.norm(u)):
        raise ValueError("u is not in the span of the support")
    pts = m.normals @ B
    x = B.T @ u
    d = B.shape[1]
    if hemisphere_witness(pts) is not None:
        raise HemisphereError("support is concentrated on a closed hemisphere "
                              "of its span")
    if d == 1:
        r = 1.0
        k = int(np.argmax(pts[:, 0] * np.sign(x[0])))
        return [(k, float(abs(x[0])))], 1.0 / r
    hull = convex_hull(pts)
    r = float(hull.offsets.min())
    reach = hull.normals @ x
    with np.errstate(divide="ignore"):
        t_all = np.where(reach > 0, hull.offsets / np.where(reach > 0, reach, 1.0),
                         np.inf)
    t = float(t_all.min())
    target = t * x
    # coplanar simplices share the hyperplane; take the one containing t*x
    best = None
    for f in np.flatnonzero(t_all <= t * (1 + 1e-9)):
        simplex = list(hull.simplices[f])
        alpha = np.linalg.solve(pts[simplex].T, target)
        if best is None or alpha.min() > best[1].min():
            best = (simplex, alpha)
    simplex, alpha = best
    alpha = np.clip(alpha, 0.0, None)
    coeffs = alpha / t
    pairs = [(int(k), float(a)) for k, a in zip(simplex, coeffs) if a > 1e-15]
    return sorted(pairs), 1.0 / r
