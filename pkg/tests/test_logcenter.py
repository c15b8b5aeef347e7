import math

import numpy as np
import pytest

from logmink import geometry as geo
from logmink.errors import DomainError
from logmink.logcenter import (GRAD_TOL, log_center, phi, phi_gradient, phi_hessian)
from logmink.measure import DiscreteMeasure

from conftest import axis_measure, random_body


def random_pair(rng, n):
    P = random_body(rng, n)
    k = int(rng.integers(1, 4))
    extra = rng.normal(size=(k, n))
    U = np.vstack([P.normals, extra / np.linalg.norm(extra, axis=1)[:, None]])
    m = DiscreteMeasure.from_atoms(U, rng.uniform(0.5, 2.0, len(U)))
    return P, m


def interior_sample(rng, P):
    w = rng.dirichlet(np.ones(len(P.vertices)))
    return 0.9 * (w @ P.vertices) + 0.1 * P.vertices.mean(axis=0)


class TestExamples:
    def test_phi_values(self, square, square_measure):
        assert phi(square, square_measure, [0, 0]) == 0.0
        assert phi(geo.scale(square, 3.0), square_measure, [0, 0]) == pytest.approx(
            4 * math.log(3.0))
        m = axis_measure(2, [2, 1, 1, 1])
        assert phi(square, m, [-1 / 3, 0]) == pytest.approx(
            2 * math.log(4 / 3) + math.log(2 / 3))

    def test_gradient_and_hessian(self, square, square_measure):
        assert np.allclose(phi_gradient(square, square_measure, [0, 0]), 0)
        assert np.allclose(phi_gradient(square, axis_measure(2, [2, 1, 1, 1]), [0, 0]),
                           [1, 0])
        assert np.allclose(phi_hessian(square, square_measure, [0, 0]), 2 * np.eye(2))

    def test_centers(self, square, square_measure):
        assert np.allclose(log_center(square, square_measure).xi, 0, atol=1e-14)
        xi = log_center(square, axis_measure(2, [2, 1, 1, 1])).xi
        assert np.allclose(xi, [-1 / 3, 0], atol=1e-12)

    def test_boundary_point_is_outside_domain(self, square, square_measure):
        with pytest.raises(DomainError):
            phi(square, square_measure, [1.0, 0.0])

    def test_measure_normals_need_not_be_facets(self, square):
        m = DiscreteMeasure.from_atoms([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]],
                                       [1, 1, 1, 1, 1])
        # h(square, (1,1)/sqrt2) = sqrt2
        assert phi(square, m, [0, 0]) == pytest.approx(math.log(math.sqrt(2)))


def test_concavity():
    rng = np.random.default_rng(11)
    worst = 0.0
    for trial in range(1000):
        P, m = random_pair(rng, 2 + trial % 2)
        a, b = interior_sample(rng, P), interior_sample(rng, P)
        lam = rng.uniform()
        gap = (lam * phi(P, m, a) + (1 - lam) * phi(P, m, b)
               - phi(P, m, lam * a + (1 - lam) * b))
        worst = max(worst, gap)
    assert worst <= 1e-12


def test_derivatives_match_central_differences():
    rng = np.random.default_rng(12)
    step = 1e-6
    for trial in range(50):
        n = 2 + trial % 3
        P, m = random_pair(rng, n)
        x = interior_sample(rng, P)
        g = phi_gradient(P, m, x)
        H = phi_hessian(P, m, x)
        fd_g = np.empty(n)
        fd_H = np.empty((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            fd_g[i] = -(phi(P, m, x + e) - phi(P, m, x - e)) / (2 * step)
            fd_H[:, i] = (phi_gradient(P, m, x + e) - phi_gradient(P, m, x - e)) / (2 * step)
        assert np.linalg.norm(fd_g - g) <= 1e-6 * max(1.0, np.linalg.norm(g))
        assert np.linalg.norm(fd_H - H) <= 1e-6 * max(1.0, np.linalg.norm(H))
        assert np.allclose(H, H.T) and np.all(np.linalg.eigvalsh(H) > 0)


def test_matches_grid_search():
    rng = np.random.default_rng(13)
    cells = 400
    for _ in range(20):
        P, m = random_pair(rng, 2)
        lo, hi = P.vertices.min(axis=0), P.vertices.max(axis=0)
        xs = np.linspace(lo[0], hi[0], cells)
        ys = np.linspace(lo[1], hi[1], cells)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.c_[X.ravel(), Y.ravel()]
        h = geo.support_values(P, m.normals)
        gaps = h[None, :] - pts @ m.normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(gaps.min(axis=1) > 0,
                            np.log(np.where(gaps > 0, gaps, 1.0)) @ m.weights, -np.inf)
        best = pts[int(np.argmax(vals))]
        xi = log_center(P, m).xi
        cell = (hi - lo) / (cells - 1)
        assert np.all(np.abs(xi - best) <= 2 * cell)


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_scaling_law(lam):
    rng = np.random.default_rng(14)
    for _ in range(10):
        P, m = random_pair(rng, 3)
        xi = log_center(P, m).xi
        xi_l = log_center(geo.scale(P, lam), m).xi
        assert np.linalg.norm(xi_l - lam * xi) <= 1e-8 * max(1.0, lam * np.linalg.norm(xi))


def test_translation_equivariance():
    rng = np.random.default_rng(15)
    for _ in range(20):
        P, m = random_pair(rng, 2 + int(rng.integers(0, 2)))
        x = rng.normal(size=P.dim)
        xi = log_center(P, m).xi
        shifted = log_center(geo.translate(P, x), m).xi
        assert np.allclose(shifted, xi + x, atol=1e-10)


def test_stationarity_and_result_invariants():
    rng = np.random.default_rng(16)
    for _ in range(30):
        P, m = random_pair(rng, 2 + int(rng.integers(0, 3)))
        res = log_center(P, m)
        h = geo.support_values(P, m.normals)
        gaps = h - m.normals @ res.xi
        assert np.all(gaps > 0)
        g = np.linalg.norm((m.weights / gaps) @ m.normals)
        assert g <= 1e-10 * m.total_mass / gaps.min()
        assert res.gradient_norm <= GRAD_TOL * (1 + m.total_mass / gaps.min())
        assert res.iterations <= 100


def test_small_support_perturbation_moves_center_little():
    rng = np.random.default_rng(17)
    for _ in range(10):
        P, m = random_pair(rng, 2)
        xi = log_center(P, m).xi
        for eps in (1e-3, 1e-5):
            Q = geo.from_support(P.normals, P.offsets + eps * rng.uniform(-1, 1, len(P.offsets)))
            assert np.linalg.norm(log_center(Q, m).xi - xi) <= 100 * eps
