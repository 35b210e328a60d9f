"""Frames and connections shared by several test modules."""

import numpy as np

from starc.fields import Chart, Coframe, MultivectorField, ScalarField
from starc.geometry import Connection
from starc.sta import BIVECTOR_PAIRS, Multivector, exp_bivector


def diag_coframe(d, chart):
    rows = [["0"] * 4 for _ in range(4)]
    for a in range(4):
        rows[a][a] = d[a]
    return Coframe.from_expressions(rows, chart)


FLAT_CHART = Chart(domain=((-1, 1),) * 4, samples=12)
FLAT = Coframe.identity(FLAT_CHART)

RINDLER_CHART = Chart(domain=((-1, 1), (1, 2), (-1, 1), (-1, 1)), samples=12)
RINDLER = diag_coframe(["x", "1", "1", "1"], RINDLER_CHART)

SPHERE_CHART = Chart(coord_names=("t", "r", "th", "ph"), domain=((-1, 1), (-1, 1), (0.5, 2.5), (-1, 1)), samples=12)
SPHERE = diag_coframe(["1", "1", "1", "sin(th)"], SPHERE_CHART)

SKEW_CHART = Chart(domain=((0, 1), (1, 2), (0, 1), (0.5, 1.5)), samples=10)
SKEW = Coframe.from_expressions(
    [
        ["1 + 0.1*x", "0.2*t", "0", "0.1*sin(y)"],
        ["0.1*z", "x", "0.05*t*y", "0"],
        ["0", "0.1*cos(t)", "x*z", "0.2"],
        ["0.1*y", "0", "0.1*x", "1 + 0.1*t^2"],
    ],
    SKEW_CHART,
)


def trig_scalar(rng, scale=0.5):
    k = rng.uniform(-1.5, 1.5, 4)
    phase = rng.uniform(0, 2 * np.pi)
    amp = rng.uniform(-scale, scale)
    return ScalarField(lambda q: amp * np.sin(q @ k + phase))


def random_connection(seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    return Connection.from_pairs([[trig_scalar(rng, scale) for _ in range(6)] for _ in range(4)], "random")


def random_constant_connection(seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    om = np.zeros((4, 4, 4))
    for a in range(4):
        for b, c in BIVECTOR_PAIRS:
            v = rng.uniform(-scale, scale)
            om[a, b, c], om[a, c, b] = v, -v
    return Connection.constant(om)


def random_field(seed=0, grades=range(5), scale=1.0):
    rng = np.random.default_rng(seed)
    masks = [m for m in range(16) if bin(m).count("1") in grades]
    return MultivectorField.from_blades({m: trig_scalar(rng, scale) for m in masks})


def vector_field(seed=0):
    return random_field(seed, grades=(1,))


def const_vector(comps):
    return MultivectorField.constant(Multivector.vector(comps))


MILD_CHART = Chart(domain=((0, 1), (0, 1), (0, 1), (0, 1)), samples=8)
MILD = Coframe.from_expressions(
    [
        ["1 + 0.1*x", "0.05*t", "0", "0.02*sin(y)"],
        ["0.02*z", "1 + 0.05*y", "0.02*t*y", "0"],
        ["0", "0.03*cos(t)", "1 + 0.1*z", "0.02"],
        ["0.02*y", "0", "0.03*x", "1 + 0.05*t^2"],
    ],
    MILD_CHART,
)


def assert_second_order(err_at, tol, fine=1e-3, floor=1e-9):
    """err_at(step) must be <= tol at ``fine`` and shrink ~4x from 2*fine to fine."""
    e_fine, e_coarse = err_at(fine), err_at(2 * fine)
    assert e_fine <= tol, e_fine
    if e_fine > floor:
        assert 3.0 <= e_coarse / e_fine <= 5.0, (e_coarse, e_fine)


def rotor_from_generator(fn):
    """Rotor field q -> exp F(q) for F given by its six pair components."""
    return lambda q: exp_bivector(Multivector.bivector(fn(np.asarray(q, dtype=float)))).value


def mixed_generator(q):
    """Boosts and rotations of moderate size that vary with position."""
    t, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack([0.3 * z, 0 * t, 0.2 * np.sin(x), 0.5 * x * t, 0.1 * z, 0.4 * np.cos(t)], -1)


def spatial_generator(q):
    t, x, y, z = np.moveaxis(q, -1, 0)
    return np.stack([0 * t, 0 * t, 0 * t, 0.6 * x * y, 0.3 * np.sin(t + z), 0.2 * x], -1)


def random_spinor(seed=0, scale=0.5):
    return random_field(seed, grades=(0, 2, 4), scale=scale)
