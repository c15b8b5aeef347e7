"""Low-dimensional convex polytope kernel.

Polytopes are given by halfspaces ``x . u_k <= h_k``.  Vertices come from
polar duality: with ``c`` an interior point, the vertices of ``P`` are in
one-to-one correspondence with the facets of ``conv{u_k / (h_k - u_k . c)}``.
Facet areas use a pyramid decomposition from the facet centroid, applied
recursively through the face lattice.
"""
import json
import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .errors import GeometryError
from .hull import convex_hull
from .measure import DiscreteMeasure, hemisphere_witness

EPS = 1e-9
AREA_TOL = 1e-12
MATCH_ANGLE = 1e-9


@dataclass(frozen=True)
class FacetData:
    normal_index: int
    area: float
    vertex_indices: tuple
    centroid: np.ndarray


@dataclass(frozen=True)
class Polytope:
    dim: int
    normals: np.ndarray  # (N, n) unit normals of the halfspaces
    offsets: np.ndarray  # (N,) right-hand sides h_k
    vertices: np.ndarray  # (V, n)
    facets: tuple  # one FacetData per halfspace, area 0 if redundant
    volume: float
    interior: np.ndarray  # a strictly interior reference point

    @property
    def areas(self):
        return np.array([f.area for f in self.facets])

    @property
    def facet_indices(self):
        return [f.normal_index for f in self.facets if f.area > AREA_TOL]

    def to_json(self):
        return {
            "dim": self.dim,
            "halfspaces": [{"u": u.tolist(), "h": float(h)}
                           for u, h in zip(self.normals, self.offsets)],
            "vertices": self.vertices.tolist(),
            "facets": [{"k": f.normal_index, "area": f.area}
                       for f in self.facets if f.area > AREA_TOL],
            "volume": self.volume,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data, check_tol=1e-6):
        """Rebuild from halfspaces and check the stored derived data."""
        try:
            normals = np.array([hs["u"] for hs in data["halfspaces"]], dtype=float)
            offsets = np.array([hs["h"] for hs in data["halfspaces"]], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise GeometryError(f"malformed polytope JSON: {exc}") from exc
        normals = normals.reshape(len(offsets), -1)
        if normals.shape[1] != int(data.get("dim", normals.shape[1])):
            raise GeometryError("halfspace normals do not match 'dim'")
        norms = np.linalg.norm(normals, axis=1)
        P = from_halfspaces(normals / norms[:, None], offsets / norms)
        if "volume" in data:
            vol = float(data["volume"])
            if abs(vol - P.volume) > check_tol * max(1.0, abs(P.volume)):
                raise GeometryError(
                    f"stored volume {vol} disagrees with recomputed {P.volume}")
        for fc in data.get("facets", []):
            k, area = int(fc["k"]), float(fc["area"])
            if abs(P.facets[k].area - area) > check_tol * max(1.0, area):
                raise GeometryError(f"stored area of facet {k} disagrees")
        return P

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise GeometryError(f"invalid JSON: {exc}") from exc
        return cls.from_json(data)


# -- construction ----------------------------------------------------------

def from_support(normals, supports):
    """Polytope ``{x : x . u_k <= h_k}`` with all ``h_k > 0``.

    The normals must not lie in a closed hemisphere, which makes the body
    bounded with the origin in its interior.
    """
    normals, supports = _clean(normals, supports)
    if np.any(supports <= 0):
        raise GeometryError("supports must be positive")
    return from_halfspaces(normals, supports, interior=np.zeros(normals.shape[1]))


def _clean(normals, offsets):
    U = np.asarray(normals, dtype=float)
    if U.ndim == 1:
        U = U.reshape(-1, 1)
    h = np.asarray(offsets, dtype=float).reshape(-1)
    if len(U) != len(h):
        raise GeometryError("normals and supports have different lengths")
    norms = np.linalg.norm(U, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise GeometryError("normals must be unit vectors")
    return U, h


def from_halfspaces(normals, offsets, interior=None, bounded=False):
    """Polytope from an H-representation and a strictly interior point.

    When ``interior`` is omitted, a Chebyshev-like interior point is found
    by linear programming.  ``bounded=True`` skips the hemisphere test for
    callers that have already made it.
    """
    U, h = _clean(normals, offsets)
    n = U.shape[1]
    witness = None if bounded else hemisphere_witness(U)
    if witness is not None:
        raise GeometryError("halfspaces define an unbounded set "
                            f"(recession direction {np.round(-witness, 6).tolist()})")
    if interior is None:
        interior = interior_point(U, h)
    c = np.asarray(interior, dtype=float)
    slack = h - U @ c
    if np.any(slack <= 0):
        raise GeometryError("reference point is not strictly interior")
    if n == 1:
        return _interval(U, h, c)

    dual = U / slack[:, None]
    hull = convex_hull(dual, eps=EPS)
    raw = hull.normals / hull.offsets[:, None]
    scale = float(np.abs(raw).max())
    tol = EPS * max(1.0, scale)
    dist = np.linalg.norm(raw[:, None, :] - raw[None, :, :], axis=-1)
    keep = [i for i in range(len(raw)) if not np.any(dist[i, :i] <= tol)]
    V = raw[keep] + c
    tight = np.abs((h - U @ c)[None, :] - (V - c) @ U.T) <= tol
    V = _polish(U, h, V, tight)
    return _assemble(U, h, V, tight, c)


def _polish(U, h, V, tight):
    """Re-solve each vertex from its tight constraints (least squares)."""
    out = V.copy()
    n = U.shape[1]
    for i, row in enumerate(tight):
        A = U[row]
        if len(A) < n:
            continue
        x, _, rank, _ = np.linalg.lstsq(A, h[row], rcond=None)
        if rank == n:
            out[i] = x
    return out


def interior_point(normals, offsets):
    """Centre of the largest inscribed ball (scipy's HiGHS LP)."""
    from scipy.optimize import linprog

    U = np.asarray(normals, dtype=float)
    h = np.asarray(offsets, dtype=float)
    n = U.shape[1]
    A = np.hstack([U, np.ones((len(h), 1))])
    res = linprog(np.r_[np.zeros(n), -1.0], A_ub=A, b_ub=h,
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12 * max(1.0, np.abs(h).max()):
        raise GeometryError("halfspaces have empty interior")
    return res.x[:n]


def _interval(U, h, c):
    plus = [k for k in range(len(h)) if U[k, 0] > 0]
    minus = [k for k in range(len(h)) if U[k, 0] < 0]
    if not plus or not minus:
        raise GeometryError("interval needs both +1 and -1 normals")
    kp = min(plus, key=lambda k: (h[k], k))
    km = min(minus, key=lambda k: (h[k], k))
    V = np.array([[-h[km]], [h[kp]]])
    facets = []
    for k in range(len(h)):
        if k == kp:
            facets.append(FacetData(k, 1.0, (1,), V[1].copy()))
        elif k == km:
            facets.append(FacetData(k, 1.0, (0,), V[0].copy()))
        else:
            facets.append(FacetData(k, 0.0, (), np.full(1, np.nan)))
    return _freeze(Polytope(1, U, h, V, tuple(facets), float(h[kp] + h[km]), c))


def _freeze(P):
    for arr in (P.normals, P.offsets, P.vertices, P.interior):
        arr.setflags(write=False)
    return P


def _affine_basis(points, tol):
    if len(points) < 2:
        return np.zeros((points.shape[1], 0))
    diffs = points[1:] - points[0]
    _, s, vt = np.linalg.svd(diffs, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return vt[:r].T


def _assemble(U, h, V, tight, c):
    n = U.shape[1]
    scale = max(1.0, float(np.abs(V - c).max()))
    rank_tol = EPS
    vsets = [frozenset(np.flatnonzero(tight[:, k]).tolist()) for k in range(len(h))]
    cache = {}

    def face_volume(ids, d):
        if d == 0:
            return 1.0
        if ids in cache:
            return cache[ids]
        pts = V[sorted(ids)]
        if d == 1:
            vol = float(max(np.linalg.norm(a - b) for a, b in combinations(pts, 2)))
            cache[ids] = vol
            return vol
        centre = pts.mean(axis=0)
        seen = set()
        vol = 0.0
        for other in vsets:
            sub = ids & other
            if len(sub) < d or sub == ids or sub in seen:
                continue
            sub_pts = V[sorted(sub)]
            B = _affine_basis(sub_pts, rank_tol)
            if B.shape[1] != d - 1:
                continue
            seen.add(sub)
            w = centre - sub_pts[0]
            height = np.linalg.norm(w - B @ (B.T @ w))
            vol += height * face_volume(sub, d - 1) / d
        cache[ids] = vol
        return vol

    facets = []
    claimed = set()
    for k in range(len(h)):
        ids = vsets[k]
        area = 0.0
        if len(ids) >= n and ids not in claimed:
            # distinct vertices of a polygon edge always span a line
            if n == 2 or _affine_basis(V[sorted(ids)], rank_tol).shape[1] == n - 1:
                area = face_volume(ids, n - 1)
                claimed.add(ids)
        if area > AREA_TOL * scale ** (n - 1):
            facets.append(FacetData(k, float(area), tuple(sorted(ids)),
                                    V[sorted(ids)].mean(axis=0)))
        else:
            facets.append(FacetData(k, 0.0, tuple(sorted(ids)),
                                    V[sorted(ids)].mean(axis=0) if ids else
                                    np.full(n, np.nan)))
    areas = np.array([f.area for f in facets])
    volume = float(np.sum((h - U @ c) * areas) / n)
    return _freeze(Polytope(n, U, h, V, tuple(facets), volume, c))


# -- queries ---------------------------------------------------------------

def volume(P):
    return P.volume


def facet_area(P, k):
    return P.facets[k].area


def support(P, x):
    """``h(P, x) = max_{y in P} x . y`` for any vector ``x``."""
    return float(np.max(P.vertices @ np.asarray(x, dtype=float)))


def support_values(P, directions):
    return np.max(np.asarray(directions, dtype=float) @ P.vertices.T, axis=1)


def diameter(P):
    V = P.vertices
    diff = V[:, None, :] - V[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def cone_volumes(P, origin_check=True):
    """Per-halfspace cone volumes ``(1/n) h_k |F_k|`` about the origin."""
    if origin_check and np.any(P.offsets[P.areas > AREA_TOL] <= 0):
        raise GeometryError("origin is not an interior point")
    return P.offsets * P.areas / P.dim


def cone_volume_measure(P):
    """Cone-volume measure of ``P`` (origin must be interior)."""
    masses = cone_volumes(P)
    keep = P.areas > AREA_TOL
    if np.any(P.offsets <= 0):
        raise GeometryError("origin is not an interior point")
    return DiscreteMeasure(P.normals[keep], masses[keep])


def mass_at(P, u):
    """Cone volume at direction ``u``; 0 when ``u`` is not a facet normal."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    masses = cone_volumes(P)
    total = 0.0
    for f in P.facets:
        if f.area > AREA_TOL:
            v = P.normals[f.normal_index]
            if 2 * math.atan2(np.linalg.norm(v - u), np.linalg.norm(v + u)) < MATCH_ANGLE:
                total += masses[f.normal_index]
    return float(total)


def faces(P, d):
    """Vertex-index sets of the ``d``-dimensional faces (``0 <= d < n``)."""
    n = P.dim
    current = {frozenset(f.vertex_indices) for f in P.facets if f.area > AREA_TOL}
    facet_sets = list(current)
    for level in range(n - 2, d - 1, -1):
        nxt = set()
        for F in current:
            for G in facet_sets:
                S = F & G
                if S and S != F:
                    B = _affine_basis(P.vertices[sorted(S)], EPS)
                    if B.shape[1] == level:
                        nxt.add(S)
        current = nxt
    return sorted(current, key=sorted)


# -- transformations ---------------------------------------------------------

def translate(P, x):
    x = np.asarray(x, dtype=float)
    facets = tuple(replace(f, centroid=f.centroid + x) for f in P.facets)
    return _freeze(Polytope(P.dim, P.normals.copy(), P.offsets + P.normals @ x,
                            P.vertices + x, facets, P.volume, P.interior + x))


def scale(P, lam):
    if lam <= 0:
        raise GeometryError("scale factor must be positive")
    n = P.dim
    area_factor = lam ** (n - 1) if n > 1 else 1.0
    facets = tuple(replace(f, area=f.area * area_factor, centroid=f.centroid * lam)
                   for f in P.facets)
    return _freeze(Polytope(n, P.normals.copy(), P.offsets * lam, P.vertices * lam,
                            facets, P.volume * lam ** n, P.interior * lam))


def linear_image(P, A):
    """Image ``A P`` for invertible ``A``; halfspaces map exactly."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape != (P.dim, P.dim) or abs(np.linalg.det(A)) < 1e-14:
        raise GeometryError("linear_image needs an invertible square matrix")
    W = np.linalg.solve(A.T, P.normals.T).T  # rows are A^{-T} u
    norms = np.linalg.norm(W, axis=1)
    return from_halfspaces(W / norms[:, None], P.offsets / norms,
                           interior=A @ P.interior)


def direct_sum(P1, P2, embed1=None, embed2=None):
    """Cartesian product ``{x : E1^T x in P1, E2^T x in P2}``.

    ``embed1`` (n x d1) and ``embed2`` (n x d2) have orthonormal columns with
    mutually orthogonal images; by default they are coordinate embeddings.
    """
    d1, d2 = P1.dim, P2.dim
    n = d1 + d2
    E1 = np.eye(n)[:, :d1] if embed1 is None else np.asarray(embed1, dtype=float)
    E2 = np.eye(n)[:, d1:] if embed2 is None else np.asarray(embed2, dtype=float)
    E = np.hstack([E1, E2])
    if E.shape != (n, n) or not np.allclose(E.T @ E, np.eye(n), atol=1e-10):
        raise GeometryError("embeddings must be orthonormal with orthogonal images")
    normals = np.vstack([P1.normals @ E1.T, P2.normals @ E2.T])
    offsets = np.concatenate([P1.offsets, P2.offsets])
    return from_halfspaces(normals, offsets,
                           interior=E1 @ P1.interior + E2 @ P2.interior)


def cut_volume(P, v, delta):
    """``V(P ∩ {x : x . v >= h(P, v) - delta})``."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    hv = support(P, v)
    width = hv + support(P, -v)
    if not 0 <= delta < width:
        raise GeometryError(f"delta must lie in [0, {width})")
    if delta == 0:
        return 0.0
    top = P.vertices[int(np.argmax(P.vertices @ v))]
    c = P.vertices.mean(axis=0)
    s = min(0.5, delta / (2.0 * (hv - c @ v)))
    p = top + s * (c - top)
    normals = np.vstack([P.normals, -v])
    offsets = np.append(P.offsets, delta - hv)
    return from_halfspaces(normals, offsets, interior=p).volume


def hausdorff_distance(P, Q, n_random=1000, seed=0):
    """Sampled sup-norm of ``h_P - h_Q`` over the unit sphere.

    Directions: facet normals and vertex directions of both bodies plus
    ``n_random`` uniform random directions.  The sampled maximum can only
    under-estimate the true distance, by at most the sampling error.
    """
    if P.dim != Q.dim:
        raise GeometryError("dimension mismatch")
    rng = np.random.default_rng(seed)
    dirs = [P.normals, Q.normals]
    for V in (P.vertices, Q.vertices):
        norms = np.linalg.norm(V, axis=1)
        dirs.append(V[norms > 0] / norms[norms > 0, None])
    G = rng.normal(size=(n_random, P.dim))
    dirs.append(G / np.linalg.norm(G, axis=1)[:, None])
    D = np.vstack(dirs)
    return float(np.max(np.abs(support_values(P, D) - support_values(Q, D))))


# -- convenience constructors ----------------------------------------------

def box(half_widths):
    """Axis-parallel box ``prod [-a_i, a_i]``."""
    a = np.asarray(half_widths, dtype=float)
    n = len(a)
    normals = np.vstack([np.eye(n), -np.eye(n)])
    return from_support(normals, np.concatenate([a, a]))


def from_vertices(points):
    """H-representation of ``conv(points)`` (full-dimensional)."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[1] == 1:
        lo, hi = pts.min(), pts.max()
        c = np.array([(lo + hi) / 2])
        return from_halfspaces(np.array([[1.0], [-1.0]]), np.array([hi, -lo]),
                               interior=c)
    hull = convex_hull(pts, eps=EPS)
    normals, offsets = [], []
    for a, b in zip(hull.normals, hull.offsets):
        if not any(np.linalg.norm(a - m) < 1e-9 for m in normals):
            normals.append(a)
            offsets.append(b)
    return from_halfspaces(np.array(normals), np.array(offsets),
                           interior=pts.mean(axis=0))
