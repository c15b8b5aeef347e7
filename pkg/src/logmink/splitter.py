"""Existence pipeline: strict cases go to the solver, equality cases split.

An equality pair ``(xi, xi')`` carries all of the mass, so the measure is the
sum of its restrictions to the two subspaces.  Each restriction is solved in
its own coordinates and the two bodies are joined by

    K = M (P1 x P2),   M = [B1 B2]^{-T},

which is the body cut out by the original atom normals at the supports of
``P1`` and ``P2``.  Cone volumes of ``P1 x P2`` split as
``(d1/n) gamma_a V(P2)`` and ``(d2/n) gamma_b V(P1)`` and ``M`` multiplies
all of them by ``|det M|``, so one uniform scaling fixes the total.
"""
import logging

import numpy as np

from . import geometry as geo
from .errors import ConditionError, HemisphereError
from .measure import (Verdict, classify_concentration,
                      hemisphere_witness, members_of, restrict)
from .solver import SolveOptions, residual, solve_strict

log = logging.getLogger(__name__)

COMBINE_TOL = 1e-8


def solve(m, opts=None, traces=None):
    """Polytope whose cone-volume measure is ``m``.

    Raises :class:`HemisphereError` or :class:`ConditionError` when ``m``
    is not the cone-volume measure of any polytope.  If ``traces`` is a
    list, the trace of every strict sub-solve is appended to it.
    """
    opts = opts or SolveOptions()
    return _solve(m, opts, 0, traces)


def _solve(m, opts, depth, traces):
    if m.dim == 1:
        return interval(m)
    verdict = classify_concentration(m)
    if verdict.status is Verdict.FAIL:
        raise ConditionError(
            "measure violates the subspace concentration condition", verdict)
    if verdict.status is Verdict.STRICT_OK:
        P, trace = solve_strict(m, opts, check_condition=False)
        if traces is not None:
            traces.append(trace)
        return P
    xi, xi_prime = verdict.equality_pairs[0]
    covered = set(xi.members) | set(xi_prime.members)
    if covered != set(range(m.size)):
        raise ConditionError(
            "equality subspace pair does not carry the whole measure", verdict)
    log.debug("depth %d: split %s | %s", depth, xi.members, xi_prime.members)
    P1 = _solve(restrict(m, xi.basis), opts, depth + 1, traces)
    P2 = _solve(restrict(m, xi_prime.basis), opts, depth + 1, traces)
    return combine(xi.basis, xi_prime.basis, P1, P2, m)


def interval(m):
    """The segment ``[-gamma(-1), gamma(+1)]`` for a measure on the 0-sphere."""
    if m.dim != 1:
        raise ValueError("interval needs a one-dimensional measure")
    if hemisphere_witness(m.normals) is not None:
        raise HemisphereError("measure is concentrated on one side of 0",
                              witness=hemisphere_witness(m.normals))
    return geo.from_halfspaces(m.normals, m.weights, interior=np.zeros(1))


def combine(xi_basis, xi_prime_basis, P1, P2, m):
    """Join solutions on complementary subspaces into one solution of ``m``.

    ``P1`` and ``P2`` live in the coordinates of the orthonormal bases
    ``xi_basis`` and ``xi_prime_basis`` (columns).  The result is verified
    against ``m`` and a :class:`ConditionError` is raised on mismatch.
    """
    B1 = np.asarray(xi_basis, dtype=float).reshape(m.dim, -1)
    B2 = np.asarray(xi_prime_basis, dtype=float).reshape(m.dim, -1)
    n = m.dim
    d1, d2 = B1.shape[1], B2.shape[1]
    if d1 + d2 != n or abs(np.linalg.det(np.hstack([B1, B2]))) < 1e-12:
        raise ValueError("subspaces are not complementary")

    supports = np.empty(m.size)
    for B, P in ((B1, P1), (B2, P2)):
        idx = list(members_of(m.normals, B))
        coords = m.normals[idx] @ B
        coords /= np.linalg.norm(coords, axis=1)[:, None]
        supports[idx] = geo.support_values(P, coords)

    det_m = 1.0 / abs(np.linalg.det(np.hstack([B1, B2])))
    mass = m.total_mass
    tau = (n * n / (d1 * d2 * mass * det_m)) ** (1.0 / n)
    K = geo.from_support(m.normals, tau * supports)
    err = residual(K, m)
    if err > COMBINE_TOL:
        raise ConditionError(
            f"combined body misses the measure (relative residual {err:.3e})")
    return K
