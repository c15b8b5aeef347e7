"""Incremental beneath-beyond convex hull in low dimension.

Facets are kept as simplices.  A point is inserted only when it lies
strictly beyond (by more than ``eps``) at least one facet hyperplane, so
points on the boundary are skipped and coplanar regions end up triangulated.
Because a horizon ridge always belongs to a strictly visible facet, every
new facet is at least ``eps`` away from degenerate.
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import GeometryError


@dataclass(frozen=True)
class Hull:
    points: np.ndarray
    simplices: np.ndarray  # (F, d) point indices
    normals: np.ndarray  # (F, d) outward unit normals
    offsets: np.ndarray  # (F,) with normals @ x <= offsets inside
    interior: np.ndarray  # a strictly interior point
    eps: float

    @property
    def vertex_indices(self):
        return np.unique(self.simplices)


def insertion_order(points):
    """Order by norm (descending), ties broken lexicographically."""
    pts = np.asarray(points, dtype=float)
    keys = [(-round(float(np.linalg.norm(p)), 12), tuple(np.round(p, 12)))
            for p in pts]
    return sorted(range(len(pts)), key=lambda i: keys[i])


def _affine_rank(pts, tol):
    if len(pts) < 2:
        return 0
    diffs = pts[1:] - pts[0]
    s = np.linalg.svd(diffs, compute_uv=False)
    return int(np.sum(s > tol))


def _hyperplane(pts, interior):
    diffs = pts[1:] - pts[0]
    _, _, vt = np.linalg.svd(diffs)
    normal = vt[-1]
    offset = normal @ pts[0]
    if normal @ interior > offset:
        normal, offset = -normal, -offset
    return normal, offset


def convex_hull(points, eps=1e-9, order=None):
    """Convex hull of ``points`` (shape ``(N, d)``, ``d >= 2``).

    ``eps`` is relative to the largest coordinate magnitude.  Raises
    :class:`GeometryError` when the points do not span ``d`` dimensions.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise GeometryError("convex_hull needs an (N, d) array with d >= 2")
    n_pts, d = pts.shape
    scale = max(1.0, float(np.abs(pts).max()))
    tol = eps * scale
    if d == 2 and order is None:
        return _planar_hull(pts, tol)
    order = insertion_order(pts) if order is None else list(order)

    chosen = []
    for i in order:
        trial = pts[chosen + [i]]
        if _affine_rank(trial, tol) == len(chosen):
            chosen.append(i)
            if len(chosen) == d + 1:
                break
    if len(chosen) < d + 1:
        raise GeometryError(
            f"points span an affine space of dimension {len(chosen) - 1} < {d}")

    interior = pts[chosen].mean(axis=0)
    simplices = []
    normals = []
    offsets = []
    for face in combinations(chosen, d):
        nrm, off = _hyperplane(pts[list(face)], interior)
        simplices.append(tuple(sorted(face)))
        normals.append(nrm)
        offsets.append(off)

    in_simplex = set(chosen)
    for i in order:
        if i in in_simplex:
            continue
        p = pts[i]
        dist = np.asarray(normals) @ p - np.asarray(offsets)
        visible = np.flatnonzero(dist > tol)
        if visible.size == 0:
            continue
        ridge_count = {}
        for f in visible:
            face = simplices[f]
            for k in range(d):
                ridge = face[:k] + face[k + 1:]
                ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
        horizon = [r for r, c in ridge_count.items() if c == 1]
        keep = np.ones(len(simplices), dtype=bool)
        keep[visible] = False
        simplices = [s for s, k in zip(simplices, keep) if k]
        normals = [v for v, k in zip(normals, keep) if k]
        offsets = [o for o, k in zip(offsets, keep) if k]
        for ridge in horizon:
            face = tuple(sorted(ridge + (i,)))
            nrm, off = _hyperplane(pts[list(face)], interior)
            simplices.append(face)
            normals.append(nrm)
            offsets.append(off)

    return Hull(
        points=pts,
        simplices=np.array(simplices, dtype=int),
        normals=np.array(normals),
        offsets=np.array(offsets),
        interior=interior,
        eps=tol,
    )


def _planar_hull(pts, tol):
    """Andrew's monotone chain; points within ``tol`` of an edge are dropped."""
    idx = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2:
                a, b = pts[out[-2]], pts[out[-1]]
                edge = b - a
                cross = edge[0] * (pts[i, 1] - a[1]) - edge[1] * (pts[i, 0] - a[0])
                # signed distance of b from segment a -> i decides convexity
                far = pts[i] - a
                length = np.hypot(far[0], far[1])
                if cross <= tol * length:
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    lower = chain(idx)
    upper = chain(idx[::-1])
    ring = lower[:-1] + upper[:-1]
    if len(ring) < 3:
        raise GeometryError("points span an affine space of dimension < 2")
    interior = pts[ring].mean(axis=0)
    simplices, normals, offsets = [], [], []
    for a, b in zip(ring, ring[1:] + ring[:1]):
        edge = pts[b] - pts[a]
        nrm = np.array([edge[1], -edge[0]]) / np.hypot(edge[0], edge[1])
        off = nrm @ pts[a]
        if nrm @ interior > off:
            nrm, off = -nrm, -off
        simplices.append(tuple(sorted((a, b))))
        normals.append(nrm)
        offsets.append(off)
    return Hull(pts, np.array(simplices, dtype=int), np.array(normals),
                np.array(offsets), interior, tol)
