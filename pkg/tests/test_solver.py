import csv
import math
import time

import numpy as np
import pytest

from logmink import geometry as geo
from logmink.errors import ConvergenceError, HemisphereError
from logmink.logcenter import log_center
from logmink.measure import DiscreteMeasure
from logmink.solver import (SolveOptions, objective, objective_gradient, residual,
                            solve_strict)

from conftest import angles_measure, axis_measure, random_measure, triangle_normals


def regular_polygon_support(N, gamma):
    """Inradius of the regular N-gon whose cone masses all equal ``gamma``.

    Each cone is a triangle with height r and base 2 r tan(pi/N), so its
    area is r^2 tan(pi/N).
    """
    return math.sqrt(gamma / math.tan(math.pi / N))


def fixed_point_errors(P, m):
    """Stationarity norm and the largest cone-mass error."""
    h = P.offsets
    stationarity = np.linalg.norm((m.weights / h) @ m.normals)
    mass_gap = np.max(np.abs(m.weights - h * P.areas / P.dim))
    return stationarity, mass_gap


class TestObjective:
    def test_square_value(self):
        m = axis_measure(2, [0.25] * 4)
        assert objective(np.ones(4), m) == pytest.approx(math.log(0.5))

    def test_scale_invariance(self):
        m = random_measure(np.random.default_rng(0), 3)
        h = np.random.default_rng(1).uniform(0.8, 1.5, m.size)
        assert objective(3.7 * h, m) == pytest.approx(objective(h, m), abs=1e-12)

    def test_translation_invariance(self):
        rng = np.random.default_rng(2)
        m = random_measure(rng, 2)
        h = np.ones(m.size)
        x = 0.05 * rng.normal(size=2)
        assert objective(h + m.normals @ x, m) == pytest.approx(objective(h, m), abs=1e-12)

    def test_gradient_vanishes_at_symmetric_square(self):
        m = axis_measure(2, [0.25] * 4)
        assert np.allclose(objective_gradient(np.full(4, 0.5), m), 0, atol=1e-14)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(3)
        for trial in range(100):
            m = random_measure(rng, 2 + trial % 2)
            h = rng.uniform(0.7, 1.4, m.size)
            g = objective_gradient(h, m)
            fd = np.empty(m.size)
            for k in range(m.size):
                e = np.zeros(m.size)
                e[k] = 1e-6
                fd[k] = (objective(h + e, m) - objective(h - e, m)) / 2e-6
            assert np.linalg.norm(fd - g) <= 1e-6 * max(np.linalg.norm(g), 1.0)


class TestResidual:
    def test_zero_on_solutions(self, square, cube):
        assert residual(square, axis_measure(2)) == 0.0
        assert residual(cube, axis_measure(3, [4 / 3] * 6)) == pytest.approx(0, abs=1e-15)

    def test_relative_error(self, square):
        # atom e1 expects 2 and gets 1
        assert residual(square, axis_measure(2, [2, 1, 1, 1])) == pytest.approx(0.5)

    def test_missing_facet_counts_as_zero(self):
        P = geo.from_support([[1, 0], [-1, 0], [0, 1], [0, -1], [1 / math.sqrt(2)] * 2],
                             [1, 1, 1, 1, 5])
        m = DiscreteMeasure(P.normals, np.ones(5))
        assert residual(P, m) == pytest.approx(1.0)

    def test_unknown_normal_rejected(self, square):
        with pytest.raises(ValueError):
            residual(square, DiscreteMeasure.from_atoms(triangle_normals(), [1, 1, 1]))


class TestGolden:
    def test_regular_triangle(self):
        m = angles_measure([90, 210, 330], [1, 1, 1])
        t = time.perf_counter()
        P, trace = solve_strict(m)
        assert time.perf_counter() - t < 1.0
        r = regular_polygon_support(3, 1.0)
        assert r == pytest.approx(3 ** -0.25)
        assert np.allclose(P.offsets, r, atol=1e-6)
        assert P.volume == pytest.approx(3.0)
        assert trace.converged

    def test_general_position_triangle(self, triangle_measure):
        P, _ = solve_strict(triangle_measure)
        assert residual(P, triangle_measure) <= 1e-8
        assert np.allclose(geo.cone_volume_measure(P).weights, 1.0, atol=1e-8)

    @pytest.mark.parametrize("N", [5, 6, 7])
    def test_regular_polygons(self, N):
        m = angles_measure(np.arange(N) * 360.0 / N + 10, [2.0] * N)
        P, _ = solve_strict(m, check_condition=(N % 2 == 1))
        assert np.allclose(P.offsets, regular_polygon_support(N, 2.0), atol=1e-6)

    def test_square_and_cube_by_descent(self):
        P, _ = solve_strict(axis_measure(2), check_condition=False)
        assert np.allclose(P.offsets, 1.0, atol=1e-6)
        C, _ = solve_strict(axis_measure(3, [4 / 3] * 6), check_condition=False)
        assert np.allclose(C.offsets, 1.0, atol=1e-6)


class TestRandom:
    @pytest.mark.parametrize("seed", range(6))
    def test_converges_with_fixed_point_identities(self, seed):
        rng = np.random.default_rng(100 + seed)
        m = random_measure(rng, 2 + seed % 2, int(rng.integers(4, 9)))
        P, trace = solve_strict(m)
        assert residual(P, m) <= 1e-8
        stat, gap = fixed_point_errors(P, m)
        assert stat <= 1e-8 and gap <= 1e-8 * m.total_mass
        assert P.volume == pytest.approx(m.total_mass, rel=1e-10)
        assert np.allclose(log_center(P, m).xi, 0, atol=1e-9)
        assert np.all(P.areas > 1e-10)

    def test_descent_is_monotone(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            _, trace = solve_strict(random_measure(rng, 3))
            obj = np.array(trace.objectives)
            assert np.all(np.diff(obj) <= 1e-12)

    @pytest.mark.parametrize("opts", [SolveOptions(memory=0),
                                      SolveOptions(memory=0, barzilai_borwein=False,
                                                   max_iter=20000)])
    def test_steepest_descent_variants(self, opts):
        rng = np.random.default_rng(18)
        m = random_measure(rng, 2, 5)
        P, trace = solve_strict(m, opts)
        Q, _ = solve_strict(m)
        assert residual(P, m) <= 1e-8
        assert np.all(np.diff(trace.objectives) <= 1e-12)
        # both runs stop at a normalized solution of the same measure
        assert trace.objectives[-1] == pytest.approx(objective(Q.offsets, m), abs=1e-10)

    def test_homogeneity(self):
        m = random_measure(np.random.default_rng(8), 3)
        P, _ = solve_strict(m)
        Q, _ = solve_strict(m.scaled(5.0))
        assert np.allclose(Q.offsets, 5.0 ** (1 / 3) * P.offsets, rtol=1e-6)

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(9)
        m = random_measure(rng, 3)
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        Q = q * np.sign(np.diag(r))
        P, _ = solve_strict(m)
        R, _ = solve_strict(m.rotated(Q))
        # supports are indexed by atom, so they must agree directly
        assert np.allclose(R.offsets, P.offsets, rtol=1e-6)


class TestErrors:
    def test_hemisphere(self):
        with pytest.raises(HemisphereError):
            solve_strict(DiscreteMeasure.from_atoms([[1, 0], [0, 1]], [1, 1]))

    def test_equality_measure_refused(self):
        with pytest.raises(ValueError):
            solve_strict(axis_measure(2))

    def test_non_convergence_carries_trace(self):
        m = random_measure(np.random.default_rng(10), 2, 8)
        with pytest.raises(ConvergenceError) as err:
            solve_strict(m, SolveOptions(max_iter=2, residual_tol=1e-14))
        assert len(err.value.trace.iterations) == 3
        assert not err.value.trace.converged

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            SolveOptions(residual_tol=0.0)


def test_trace_csv(tmp_path, triangle_measure):
    m = random_measure(np.random.default_rng(4), 2)
    _, trace = solve_strict(m)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iter", "objective", "residual_inf", "step", "min_support"]
    assert len(rows) == len(trace.iterations) + 1
    assert float(rows[-1][2]) <= 1e-8
