"""Variational solver for the discrete logarithmic Minkowski problem.

The measure is normalized to unit mass and the functional

    G(h) = max_xi sum_k gamma_k log(h_k - xi . u_k) - (1/n) log V(P(h))

is minimized over support vectors ``h``, where ``P(h) = {x : x . u_k <= h_k}``.
``G`` is invariant under translating and rescaling ``P(h)``; on volume-one
polytopes with log-center at the origin it equals the max of the
log-functional.  After every accepted step the polytope is recentred
(log-center moved to the origin) and rescaled to unit volume, where

    dG/dh_k = gamma_k / h_k - |F_k| / n,

which vanishes exactly when ``gamma_k = h_k |F_k| / n`` for every ``k``.
Descent runs in ``z = log h`` coordinates with Armijo backtracking along an
L-BFGS direction (steepest descent whenever that fails to be a descent
direction, started at a safeguarded Barzilai-Borwein step).  Once the
decrease of ``G`` is below rounding, acceptance switches to the approximate
Armijo test on the directional derivative.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ConvergenceError, GeometryError, HemisphereError
from .logcenter import maximize
from .measure import Verdict, classify_concentration, hemisphere_witness

log = logging.getLogger(__name__)

MIN_VOLUME = 1e-14
DIAMETER_GUARD = 1e6
FACET_FLOOR = 1e-10
MATCH_ANGLE = 1e-9
MONOTONE_SLACK = 1e-12
BB_MIN = 1e-6
BB_MAX = 1e3
APPROX_DELTA = 0.1


@dataclass(frozen=True)
class SolveOptions:
    """Descent settings.

    ``precondition`` scales the gradient by ``1/gamma``; it was slower than
    plain steepest descent on random instances and is off by default.
    ``barzilai_borwein=False`` restarts every line search at ``step0``.
    ``memory`` is the number of curvature pairs kept for the L-BFGS
    direction; 0 gives plain steepest descent.
    """
    residual_tol: float = 1e-8
    max_iter: int = 5000
    step0: float = 1.0
    seed: int = 0
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    precondition: bool = False
    barzilai_borwein: bool = True
    memory: int = 10

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")


@dataclass
class SolveTrace:
    iterations: list = field(default_factory=list)
    converged: bool = False
    wall_time: float = 0.0

    def record(self, objective, residual_inf, step, min_support):
        self.iterations.append((objective, residual_inf, step, min_support))

    @property
    def objectives(self):
        return [row[0] for row in self.iterations]

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iter,objective,residual_inf,step,min_support\n")
            for i, (obj, res, step, hmin) in enumerate(self.iterations):
                fh.write(f"{i},{obj:.17g},{res:.17g},{step:.17g},{hmin:.17g}\n")


@dataclass(frozen=True)
class _State:
    h: np.ndarray
    P: geo.Polytope
    xi: np.ndarray
    value: float


def _unit_weights(m):
    return m.weights / m.total_mass


def _evaluate(h, normals, weights):
    P = geo.from_halfspaces(normals, h, interior=_start_point(normals, h),
                             bounded=True)
    if P.volume < MIN_VOLUME:
        raise GeometryError(f"polytope volume {P.volume:.3e} below {MIN_VOLUME}")
    res = maximize(normals, h, weights, P.vertices.mean(axis=0))
    n = normals.shape[1]
    value = res.phi_value - np.log(P.volume) / n
    return _State(h, P, res.xi, float(value))


def _start_point(normals, h):
    # all h > 0 in solver coordinates, so the origin is interior
    if np.all(h > 0):
        return np.zeros(normals.shape[1])
    return None


def _normalized(state):
    """Translate the log-center to the origin and rescale to unit volume."""
    n = state.P.dim
    lam = state.P.volume ** (-1.0 / n)
    P = geo.scale(geo.translate(state.P, -state.xi), lam)
    return _State(P.offsets.copy(), P, np.zeros(n), state.value)


def objective(h, m):
    """Normalized extremal objective at the support vector ``h``.

    The body ``P(h)`` is rescaled to unit volume and recentred at its
    log-center; the value is the maximum of the log-functional of the
    unit-mass version of ``m`` there.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise GeometryError("supports must be positive")
    return _evaluate(h, m.normals, _unit_weights(m)).value


def _gradient(state, weights):
    P = state.P
    gaps = state.h - P.normals @ state.xi
    return weights / gaps - P.areas / (P.dim * P.volume)


def objective_gradient(h, m):
    """Gradient of :func:`objective` with respect to ``h``.

    At a normalized support vector this is ``gamma_k / h_k - |F_k| / n``
    with ``gamma`` scaled to unit mass.
    """
    h = np.asarray(h, dtype=float)
    w = _unit_weights(m)
    return _gradient(_evaluate(h, m.normals, w), w)


def residual(P, m):
    """Max relative cone-volume error ``|V_P({u_k}) - gamma_k| / gamma_k``.

    Atoms whose normal is a halfspace of ``P`` but not a facet count as
    mass 0.  Raises ``ValueError`` if an atom has no matching halfspace.
    """
    masses = _atom_masses(P, m)
    return float(np.max(np.abs(masses - m.weights) / m.weights))


def _atom_masses(P, m):
    cone = geo.cone_volumes(P)
    out = np.zeros(m.size)
    for i, u in enumerate(m.normals):
        close = np.flatnonzero(np.linalg.norm(P.normals - u, axis=1) <= MATCH_ANGLE)
        if close.size == 0:
            raise ValueError(f"atom {i} has no matching halfspace normal")
        out[i] = cone[close].sum()
    return out


def _relative_residual(state, weights):
    P = state.P
    masses = P.offsets * P.areas / P.dim / P.volume
    return float(np.max(np.abs(masses - weights) / weights))


def _bb_step(s, y, opts):
    """Safeguarded Barzilai-Borwein trial step from the last accepted move."""
    sy = float(s @ y)
    if sy <= 0:
        return opts.step0
    return float(np.clip(s @ s / sy, BB_MIN * opts.step0, BB_MAX * opts.step0))


def _two_loop(g, pairs):
    """L-BFGS product ``-H g`` from the stored ``(s, y)`` pairs."""
    q = g.copy()
    alphas = []
    for s, y in reversed(pairs):
        a = (s @ q) / (s @ y)
        alphas.append(a)
        q -= a * y
    s, y = pairs[-1]
    q *= (s @ y) / (y @ y)
    for (s, y), a in zip(pairs, reversed(alphas)):
        q += (a - (y @ q) / (s @ y)) * s
    return -q


def _accept(state, trial, t, direction, slope, w, c):
    change = trial.value - state.value
    if change <= c * t * slope:
        return True
    # Near the minimizer the decrease drops below rounding in G; fall back
    # to the approximate Armijo test on the directional derivative.
    if abs(change) > MONOTONE_SLACK:
        return False
    trial_slope = float((trial.h * _gradient(trial, w)) @ direction)
    return trial_slope <= (1.0 - 2.0 * APPROX_DELTA) * -slope


def solve_strict(m, opts=None, h0=None, check_condition=True):
    """Polytope whose cone-volume measure is ``m`` (strict case).

    Requires ``classify_concentration(m).status == STRICT_OK``.  Returns
    ``(P, trace)``; ``P`` has volume ``|m|`` and log-center at the origin.
    Raises :class:`ConvergenceError` (carrying the trace) when ``max_iter``
    is exhausted.
    """
    opts = opts or SolveOptions()
    t_start = time.perf_counter()
    witness = hemisphere_witness(m.normals)
    if witness is not None:
        raise HemisphereError("measure is concentrated on a closed hemisphere",
                              witness=witness)
    if check_condition and m.dim > 1:
        verdict = classify_concentration(m)
        if verdict.status is not Verdict.STRICT_OK:
            raise ValueError(
                f"solve_strict needs a STRICT_OK measure, got {verdict.status.value}")

    U = m.normals
    n = m.dim
    w = _unit_weights(m)
    h = np.ones(m.size) if h0 is None else np.asarray(h0, dtype=float)
    state = _normalized(_evaluate(h, U, w))
    trace = SolveTrace()
    metric = 1.0 / w if opts.precondition else np.ones_like(w)
    bb_step = None
    pairs = []

    for it in range(opts.max_iter + 1):
        res = _relative_residual(state, w)
        if it == 0:
            trace.record(state.value, res, 0.0, float(state.h.min()))
        if res <= opts.residual_tol:
            trace.converged = True
            break
        if it == opts.max_iter:
            break
        if geo.diameter(state.P) > DIAMETER_GUARD:
            trace.wall_time = time.perf_counter() - t_start
            raise ConvergenceError(
                "iterates became unbounded; check for near-equality subspaces",
                trace=trace)
        # gradient in z = log h
        gz = state.h * _gradient(state, w)
        direction = -metric * gz
        t = opts.step0 if bb_step is None else bb_step
        if pairs:
            quasi = _two_loop(gz, pairs)
            if gz @ quasi < 0:
                direction, t = quasi, 1.0
            else:
                pairs.clear()
        slope = float(gz @ direction)
        while True:
            trial_h = state.h * np.exp(t * direction)
            try:
                trial = _evaluate(trial_h, U, w)
            except (GeometryError, ConvergenceError):
                trial = None
            if trial is not None and _accept(state, trial, t, direction, slope, w,
                                             opts.armijo_c):
                break
            t *= opts.backtrack
            if t < 1e-14:
                trace.wall_time = time.perf_counter() - t_start
                raise ConvergenceError("Armijo line search failed", trace=trace)
        step_s = t * direction
        step_y = trial.h * _gradient(trial, w) - gz
        bb_step = _bb_step(step_s, step_y, opts) if opts.barzilai_borwein else None
        if opts.memory and step_s @ step_y > 1e-12 * np.linalg.norm(step_s) * np.linalg.norm(step_y):
            pairs.append((step_s, step_y))
            del pairs[:-opts.memory]
        state = _normalized(trial)
        trace.record(state.value, _relative_residual(state, w), t,
                     float(state.h.min()))

    trace.wall_time = time.perf_counter() - t_start
    if not trace.converged:
        raise ConvergenceError(
            f"no convergence in {opts.max_iter} iterations (residual "
            f"{trace.iterations[-1][1]:.3e}); check for near-equality subspaces",
            trace=trace)

    P = geo.scale(state.P, m.total_mass ** (1.0 / n))
    small = [k for k in range(m.size) if P.facets[k].area <= FACET_FLOOR]
    if small:
        raise ConvergenceError(f"solution lost facets {small}", trace=trace)
    log.debug("solve_strict: %d iterations, %.3fs", len(trace.iterations) - 1,
              trace.wall_time)
    return P, trace
