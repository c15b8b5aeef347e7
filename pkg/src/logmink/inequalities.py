"""Opposite-facet cone-volume inequalities and their extremal bodies.

For a polytope with the origin in its interior and a unit vector ``u``
write ``alpha = V_P({u})`` and ``beta = V_P({-u})``.  Then

    n = 2:   sqrt(alpha) + sqrt(beta) <= sqrt(V(P))
    n >= 3:  alpha + beta + 2 (n - 1) sqrt(alpha beta) <= V(P)

and in every dimension ``alpha beta <= V(P)^2 / (4 n^2)``.  Equality holds
for prisms over a facet with equal heights on both sides (n >= 3) and for
trapezoids whose diagonals cross on ``u^perp`` (n = 2).
"""
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import DomainError, GeometryError
from .measure import hemisphere_witness

TIGHT_TOL = 1e-9
SLACK_TOL = 1e-9


@dataclass(frozen=True)
class OppositeCheck:
    lhs: float
    rhs: float
    slack: float
    tight: bool

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.slack, self.tight))


@dataclass(frozen=True)
class ProductCheck:
    product: float
    bound: float

    @property
    def holds(self):
        return self.product <= self.bound + SLACK_TOL

    def __iter__(self):
        return iter((self.product, self.bound))


def _opposite_masses(P, u):
    if P.dim < 2:
        raise DomainError("opposite-facet inequalities need n >= 2")
    if np.any(P.offsets[P.areas > geo.AREA_TOL] <= 0):
        raise GeometryError("origin is not an interior point")
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    return geo.mass_at(P, u), geo.mass_at(P, -u)


def check_opposite_facets(P, u):
    """Evaluate the opposite-facet inequality of ``P`` in direction ``u``."""
    alpha, beta = _opposite_masses(P, u)
    n = P.dim
    if n == 2:
        lhs = math.sqrt(alpha) + math.sqrt(beta)
        rhs = math.sqrt(P.volume)
    else:
        lhs = alpha + beta + 2 * (n - 1) * math.sqrt(alpha * beta)
        rhs = P.volume
    slack = rhs - lhs
    return OppositeCheck(lhs, rhs, slack, abs(slack) <= TIGHT_TOL * rhs)


def check_product_bound(P, u):
    alpha, beta = _opposite_masses(P, u)
    return ProductCheck(alpha * beta, P.volume ** 2 / (4 * P.dim ** 2))


# -- extremal bodies --------------------------------------------------------

def orthonormal_complement(u):
    """Columns spanning ``u^perp`` (deterministic, via QR)."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    n = len(u)
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)]))
    return q[:, 1:n]


def make_equality_prism(F_vertices, a, u, a_minus=None):
    """The prism ``conv(F + a u, F - a u)``.

    ``F_vertices`` are points of ``u^perp``, either in ambient coordinates
    or in the coordinates of :func:`orthonormal_complement`.  Passing
    ``a_minus`` different from ``a`` builds the lopsided prism
    ``conv(F + a u, F - a_minus u)`` which is not extremal.
    """
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    n = len(u)
    if n < 2:
        raise DomainError("prisms need n >= 2")
    a_minus = a if a_minus is None else a_minus
    if a <= 0 or a_minus <= 0:
        raise GeometryError("prism heights must be positive")
    F = np.asarray(F_vertices, dtype=float)
    if F.ndim != 2:
        raise GeometryError("F_vertices must be a 2-d array")
    if F.shape[1] == n - 1:
        F = F @ orthonormal_complement(u).T
    elif F.shape[1] != n or np.abs(F @ u).max() > 1e-12:
        raise GeometryError("F_vertices must lie in the hyperplane orthogonal to u")
    if n > 2 and np.linalg.matrix_rank(F[1:] - F[0], tol=1e-12) < n - 1:
        raise GeometryError("base facet is degenerate")
    return geo.from_vertices(np.vstack([F + a * u, F - a_minus * u]))


def make_equality_trapezoid(S1, S2, a, shift=0.0):
    """Planar trapezoid with top side ``S1`` at height ``a`` and bottom side
    ``S2`` at depth ``b = a S2 / S1``, so the diagonals cross at the origin.

    ``shift`` moves the whole body along ``e2`` (a non-extremal control).
    """
    if min(S1, S2, a) <= 0:
        raise GeometryError("trapezoid parameters must be positive")
    b = a * S2 / S1
    pts = np.array([[-S1 / 2, a], [S1 / 2, a], [S2 / 2, -b], [-S2 / 2, -b]])
    pts[:, 1] += shift
    return geo.from_vertices(pts)


def trapezoid_with_depth(S1, S2, a, b):
    """Same trapezoid shape with an arbitrary depth ``b`` (for perturbations)."""
    if min(S1, S2, a, b) <= 0:
        raise GeometryError("trapezoid parameters must be positive")
    return geo.from_vertices(
        np.array([[-S1 / 2, a], [S1 / 2, a], [S2 / 2, -b], [-S2 / 2, -b]]))


# -- truncated pyramids -----------------------------------------------------

@dataclass(frozen=True)
class SubspaceMass:
    i: int
    mass: float
    bound: float

    @property
    def violated(self):
        return self.mass > self.bound

    def __iter__(self):
        return iter((self.i, self.mass, self.bound))


def truncated_pyramid(r, n):
    """``conv(-r e1 + r W, e1 + W)`` with ``W`` the cube ``|x_i| <= 1``, i >= 2."""
    if not 0 < r <= 1:
        raise DomainError("r must lie in (0, 1]")
    if n < 2:
        raise DomainError("n must be at least 2")
    corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * (n - 1),
                                   indexing="ij")).reshape(n - 1, -1).T
    top = np.column_stack([np.ones(len(corners)), corners])
    bottom = np.column_stack([-r * np.ones(len(corners)), r * corners])
    return geo.from_vertices(np.vstack([top, bottom]))


def truncated_pyramid_example(r, n):
    """Masses of ``P_r`` on ``lin{e1..e_i}`` against ``(i/n) V(P_r)``.

    Returns ``(P_r, [SubspaceMass(i, mass, bound) for i = 1..n-1])``.
    ``r = 1`` is accepted as the box limit.
    """
    P = truncated_pyramid(r, n)
    masses = geo.cone_volumes(P)
    rows = []
    for i in range(1, n):
        inside = [k for k in P.facet_indices
                  if np.abs(P.normals[k, i:]).max() <= 1e-12]
        rows.append(SubspaceMass(i, float(masses[inside].sum()),
                                 i / n * P.volume))
    return P, rows


def pyramid_crossover(n, grid):
    """Largest grid value of ``r`` at which every subspace bound fails.

    Returns ``(r_star, flags)`` with ``flags[j]`` true when all bounds fail
    at ``grid[j]``; ``r_star`` is ``None`` if they never all fail.
    """
    flags = []
    for r in grid:
        _, rows = truncated_pyramid_example(float(r), n)
        flags.append(all(row.violated for row in rows))
    hits = [r for r, f in zip(grid, flags) if f]
    return (float(max(hits)) if hits else None), flags


# -- random sweeps ----------------------------------------------------------

def random_normals(n, rng, n_facets=None, antipodal=False):
    """Gaussian-normalized unit normals not lying in a closed hemisphere.

    With ``antipodal=True`` each drawn normal is joined by its negative with
    probability 1/2 (at least one pair), so opposite facets actually occur.
    """
    while True:
        N = int(rng.integers(n + 1, 3 * n + 1)) if n_facets is None else n_facets
        U = rng.normal(size=(N, n))
        U /= np.linalg.norm(U, axis=1)[:, None]
        if antipodal:
            pick = rng.random(N) < 0.5
            pick[rng.integers(N)] = True
            U = np.vstack([U, -U[pick]])
        if hemisphere_witness(U) is None:
            return U


def random_polytope(n, rng, n_facets=None, antipodal=False):
    """``{x : x . u_k <= h_k}`` with random normals and ``h_k ~ U[0.5, 2]``."""
    U = random_normals(n, rng, n_facets, antipodal)
    return geo.from_support(U, rng.uniform(0.5, 2.0, len(U)))


@dataclass(frozen=True)
class SweepRow:
    instance: int
    direction: int
    lhs: float
    rhs: float
    slack: float
    tight: bool
    product: float
    bound: float


def _instance_rows(args):
    index, n, seed = args
    rng = np.random.default_rng([seed, index])
    P = random_polytope(n, rng, antipodal=True)
    rows = []
    for k in P.facet_indices:
        u = P.normals[k]
        chk = check_opposite_facets(P, u)
        prod = check_product_bound(P, u)
        rows.append(SweepRow(index, int(k), chk.lhs, chk.rhs, chk.slack,
                             chk.tight, prod.product, prod.bound))
    return rows


def sweep(count, n, seed=0, jobs=1):
    """Check every facet direction of ``count`` seeded random polytopes.

    Instance ``i`` depends only on ``(seed, i)``, so the result does not
    depend on ``jobs``.
    """
    tasks = [(i, n, seed) for i in range(count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_instance_rows, tasks, chunksize=16))
    else:
        chunks = [_instance_rows(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def violations(rows):
    return [r for r in rows
            if r.slack < -SLACK_TOL or r.product > r.bound + SLACK_TOL]


def write_report(rows, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["instance", "direction_index", "lhs", "rhs", "slack", "tight"])
        for r in rows:
            out.writerow([r.instance, r.direction, repr(r.lhs), repr(r.rhs),
                          repr(r.slack), int(r.tight)])
