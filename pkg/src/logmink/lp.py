"""Dense Phase-I simplex for small feasibility problems.

Only feasibility of ``A x = b, x >= 0`` is ever needed here (hemisphere
tests, interior points), so there is no Phase II.  Pivoting follows Bland's
rule, which keeps the method finite and the output deterministic.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhaseOneResult:
    feasible: bool
    x: np.ndarray
    # Farkas certificate when infeasible: y @ A <= 0 and y @ b > 0.
    certificate: np.ndarray
    infeasibility: float
    pivots: int


def phase_one(A, b, tol=1e-10, max_pivots=10_000):
    """Decide feasibility of ``A x = b, x >= 0``.

    Returns a feasible ``x`` when one exists, otherwise a vector ``y`` with
    ``y @ A <= tol`` componentwise and ``y @ b > 0``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = A.shape
    if b.shape[0] != m:
        raise ValueError(f"rhs has length {b.shape[0]}, expected {m}")

    signs = np.where(b < 0, -1.0, 1.0)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A * signs[:, None]
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b * signs
    # reduced costs of the artificial objective sum(a)
    T[m, :n] = -T[:m, :n].sum(axis=0)
    T[m, -1] = -T[:m, -1].sum()
    basis = list(range(n, n + m))

    scale = max(1.0, float(np.abs(T[:m]).max()))
    eps = tol * scale
    pivots = 0
    while True:
        entering = next((j for j in range(n + m) if T[m, j] < -eps), None)
        if entering is None:
            break
        col = T[:m, entering]
        rows = [i for i in range(m) if col[i] > eps]
        if not rows:
            # cannot happen for a bounded Phase-I objective
            break
        ratios = [T[i, -1] / col[i] for i in rows]
        best = min(ratios)
        ties = [i for i, r in zip(rows, ratios) if r <= best + eps]
        leave = min(ties, key=lambda i: basis[i])
        T[leave] /= T[leave, entering]
        for i in range(m + 1):
            if i != leave and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[leave]
        basis[leave] = entering
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot limit exceeded")

    x = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            x[j] = T[i, -1]
    infeas = -T[m, -1]
    multipliers = 1.0 - T[m, n:n + m]
    certificate = signs * multipliers
    return PhaseOneResult(
        feasible=bool(infeas <= eps),
        x=x,
        certificate=certificate,
        infeasibility=float(infeas),
        pivots=pivots,
    )
