"""The log-functional ``Phi(xi) = sum_k gamma_k log(h_k - xi . u_k)``.

``Phi`` is strictly concave on the interior of the polytope whenever the
normals span the space, so its maximizer is found by damped Newton
iteration on ``-Phi``.  Derivatives are returned for ``-Phi``: the gradient
``sum gamma_k u_k / gap_k`` and the positive definite Hessian
``sum gamma_k u_k u_k^T / gap_k^2``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .geometry import support_values

MAX_ITER = 100
GRAD_TOL = 1e-12


@dataclass(frozen=True)
class LogCenterResult:
    xi: np.ndarray
    gradient_norm: float
    iterations: int
    phi_value: float


def _gaps(normals, offsets, xi):
    gaps = offsets - normals @ xi
    if np.any(gaps <= 0):
        raise DomainError("point is on or outside a constraint")
    return gaps


def phi_raw(normals, offsets, weights, xi):
    return float(weights @ np.log(_gaps(normals, offsets, np.asarray(xi, float))))


def gradient_raw(normals, offsets, weights, xi):
    gaps = _gaps(normals, offsets, np.asarray(xi, float))
    return (weights / gaps) @ normals


def hessian_raw(normals, offsets, weights, xi):
    gaps = _gaps(normals, offsets, np.asarray(xi, float))
    return (normals * (weights / gaps ** 2)[:, None]).T @ normals


def maximize(normals, offsets, weights, x0, max_iter=MAX_ITER, tol=GRAD_TOL):
    """Damped Newton ascent of ``Phi`` from the interior point ``x0``."""
    U = np.asarray(normals, dtype=float)
    h = np.asarray(offsets, dtype=float)
    w = np.asarray(weights, dtype=float)
    xi = np.asarray(x0, dtype=float).copy()
    gaps = _gaps(U, h, xi)
    value = float(w @ np.log(gaps))
    total = float(w.sum())
    for it in range(max_iter + 1):
        g = (w / gaps) @ U
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol * (1.0 + total / gaps.min()):
            return LogCenterResult(xi, gnorm, it, value)
        if it == max_iter:
            break
        H = (U * (w / gaps ** 2)[:, None]).T @ U
        step = -np.linalg.solve(H, g)
        decrement = float(-g @ step)
        t = 1.0
        while True:
            trial = xi + t * step
            tgaps = h - U @ trial
            if np.all(tgaps > 0):
                tval = float(w @ np.log(tgaps))
                # below ~1e-14 relative, Phi differences are rounding noise
                if tval >= value or decrement < 1e-14 * max(1.0, abs(value)):
                    break
            t *= 0.5
            if t < 1e-16:
                raise ConvergenceError("line search failed in log-center Newton")
        xi, gaps, value = trial, tgaps, tval
    raise ConvergenceError(
        f"log-center Newton did not converge in {max_iter} iterations "
        f"(|g| = {gnorm:.3e})")


def _measure_supports(P, m):
    if P.dim != m.dim:
        raise ValueError("polytope and measure dimensions differ")
    return support_values(P, m.normals)


def phi(P, m, xi):
    """``sum gamma_k log(h(P, u_k) - xi . u_k)`` over the atoms of ``m``."""
    return phi_raw(m.normals, _measure_supports(P, m), m.weights, xi)


def phi_gradient(P, m, xi):
    """Gradient of ``-Phi``: ``sum gamma_k u_k / (h(P, u_k) - xi . u_k)``."""
    return gradient_raw(m.normals, _measure_supports(P, m), m.weights, xi)


def phi_hessian(P, m, xi):
    """Hessian of ``-Phi``: ``sum gamma_k u_k u_k^T / (h(P, u_k) - xi . u_k)^2``."""
    return hessian_raw(m.normals, _measure_supports(P, m), m.weights, xi)


def log_center(P, m, max_iter=MAX_ITER):
    """The unique interior maximizer of ``Phi_P``, started at the vertex centroid."""
    h = _measure_supports(P, m)
    return maximize(m.normals, h, m.weights, P.vertices.mean(axis=0), max_iter)
