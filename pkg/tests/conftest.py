import math

import numpy as np
import pytest

from logmink import geometry as geo
from logmink.inequalities import random_normals
from logmink.measure import DiscreteMeasure

SQRT2 = math.sqrt(2.0)


def axis_measure(n, weights=None):
    normals = np.vstack([np.eye(n), -np.eye(n)])
    w = np.ones(2 * n) if weights is None else np.asarray(weights, dtype=float)
    return DiscreteMeasure.from_atoms(normals, w)


def angles_measure(degrees, weights):
    a = np.radians(degrees)
    return DiscreteMeasure.from_atoms(np.c_[np.cos(a), np.sin(a)], weights)


def triangle_normals():
    return np.array([[1.0, 0.0], [0.0, 1.0], [-1 / SQRT2, -1 / SQRT2]])


def random_measure(rng, n, n_atoms=None, lo=0.5, hi=2.0):
    U = random_normals(n, rng, n_atoms)
    return DiscreteMeasure(U, rng.uniform(lo, hi, len(U)))


def random_body(rng, n, n_atoms=None):
    U = random_normals(n, rng, n_atoms)
    return geo.from_support(U, rng.uniform(0.5, 2.0, len(U)))


@pytest.fixture
def square():
    return geo.box([1.0, 1.0])


@pytest.fixture
def cube():
    return geo.box([1.0, 1.0, 1.0])


@pytest.fixture
def square_measure():
    return axis_measure(2)


@pytest.fixture
def triangle_measure():
    return DiscreteMeasure.from_atoms(triangle_normals(), [1.0, 1.0, 1.0])
