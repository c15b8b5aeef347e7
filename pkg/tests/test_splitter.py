import numpy as np
import pytest

from logmink import geometry as geo
from logmink.errors import ConditionError, HemisphereError
from logmink.measure import DiscreteMeasure, Verdict, classify_concentration, members_of
from logmink.solver import residual
from logmink.splitter import combine, interval, solve

from conftest import angles_measure, axis_measure, random_measure


def mass_split_holds(K, m, basis):
    idx = list(members_of(m.normals, basis))
    mass = geo.cone_volumes(K)[idx].sum()
    return abs(mass - basis.shape[1] / m.dim * K.volume) <= 1e-9 * K.volume


class TestBaseCase:
    def test_interval(self):
        P = solve(DiscreteMeasure.from_atoms([[1.0], [-1.0]], [3, 2]))
        assert sorted(P.vertices[:, 0]) == [-2.0, 3.0]
        assert np.allclose(geo.cone_volumes(P), [3, 2])

    def test_one_sided_rejected(self):
        with pytest.raises(HemisphereError):
            interval(DiscreteMeasure.from_atoms([[1.0]], [3]))


class TestEquality:
    def test_square(self):
        P = solve(axis_measure(2))
        assert np.allclose(P.offsets, 1.0)
        assert residual(P, axis_measure(2)) <= 1e-12

    def test_cube_measure_gives_a_box(self):
        m = axis_measure(3, [4 / 3] * 6)
        K = solve(m)
        assert residual(K, m) <= 1e-10
        assert K.volume == pytest.approx(8.0)
        # a box: opposite supports agree, and a1 a2 a3 = 1
        assert np.allclose(K.offsets[:3], K.offsets[3:])
        assert np.prod(K.offsets[:3]) == pytest.approx(1.0)

    def test_unbalanced_box_measure(self):
        m = axis_measure(3, [1, 2, 3.5, 3, 2, 0.5])
        K = solve(m)
        assert residual(K, m) <= 1e-9
        assert mass_split_holds(K, m, np.eye(3)[:, :1])

    def test_non_orthogonal_pair(self):
        m = DiscreteMeasure.from_atoms([[1, 0], [-1, 0], [1, 1], [-1, -1]], [1, 3, 2, 2])
        assert classify_concentration(m).status is Verdict.EQUALITY_OK
        K = solve(m)
        assert residual(K, m) <= 1e-9
        assert mass_split_holds(K, m, np.array([[1.0], [0.0]]))

    def test_strict_measure_inside_a_split(self):
        a = np.radians([90, 200, 330])
        T = np.c_[np.zeros(3), np.cos(a), np.sin(a)]
        m = DiscreteMeasure.from_atoms(np.vstack([[1, 0, 0], [-1, 0, 0], T]),
                                       [1, 1.5, 5 / 3, 5 / 3, 5 / 3])
        K = solve(m)
        assert residual(K, m) <= 1e-8
        assert mass_split_holds(K, m, np.eye(3)[:, 1:])

    def test_nested_split(self):
        # R^4 = lin{e1} + lin{e2} + lin{e3, e4}; every level is at equality
        m = axis_measure(4, [1, 1, 1, 1, 1, 1, 1, 1])
        K = solve(m)
        assert residual(K, m) <= 1e-9
        assert K.volume == pytest.approx(8.0)


class TestFailures:
    def test_violated_measure(self):
        with pytest.raises(ConditionError):
            solve(axis_measure(2, [2, 1, 2, 1]))

    def test_combine_rejects_wrong_inputs(self):
        m = axis_measure(2)
        seg = geo.box([1.0])
        wrong = geo.box([3.0])
        with pytest.raises(ConditionError):
            combine(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]), seg, wrong,
                    axis_measure(2, [1, 2, 1, 2]))
        assert residual(combine(np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]),
                                seg, seg, m), m) == 0.0

    def test_combine_needs_complementary_subspaces(self):
        e1 = np.array([[1.0], [0.0]])
        with pytest.raises(ValueError):
            combine(e1, e1, geo.box([1.0]), geo.box([1.0]), axis_measure(2))


def test_strict_measures_are_delegated():
    rng = np.random.default_rng(3)
    for _ in range(4):
        m = random_measure(rng, 2 + int(rng.integers(0, 2)))
        assert residual(solve(m), m) <= 1e-8


def test_regular_hexagon_with_opposite_pairs():
    m = angles_measure(np.arange(6) * 60.0, [1.0] * 6)
    # each antipodal line carries 1/3 < 1/2 of the mass
    assert classify_concentration(m).status is Verdict.STRICT_OK
    P = solve(m)
    assert residual(P, m) <= 1e-8
    assert np.allclose(P.offsets, P.offsets[0], rtol=1e-6)
    assert P.offsets[0] == pytest.approx(np.sqrt(1 / np.tan(np.pi / 6)), rel=1e-6)
