import numpy as np
import pytest

from oracles import det_cofactor
from starc.errors import DomainError, SingularTetrad
from starc.fields import (
    Chart, Coframe, MultivectorField, ScalarField, central_difference, frame_vector_apply,
    pfaff_derivative, structure_coefficients, tetrad_determinant, volume_element,
)
from starc.sta import ONE, THETA, THETA5, Multivector, norm_max, reversion

ZERO = "0"


def diag_coframe(d, chart):
    rows = [[ZERO] * 4 for _ in range(4)]
    for a in range(4):
        rows[a][a] = d[a]
    return Coframe.from_expressions(rows, chart)


RINDLER_CHART = Chart(domain=((-1, 1), (1, 2), (-1, 1), (-1, 1)))
RINDLER = diag_coframe(["x", "1", "1", "1"], RINDLER_CHART)

# a sheared, position-dependent tetrad used for oracle comparisons
SKEW_CHART = Chart(domain=((0, 1), (1, 2), (0, 1), (0.5, 1.5)))
SKEW_EXPRS = [
    ["1 + 0.1*x", "0.2*t", "0", "0.1*sin(y)"],
    ["0.1*z", "x", "0.05*t*y", "0"],
    ["0", "0.1*cos(t)", "x*z", "0.2"],
    ["0.1*y", "0", "0.1*x", "1 + 0.1*t^2"],
]
SKEW = Coframe.from_expressions(SKEW_EXPRS, SKEW_CHART)


def test_chart_validation():
    with pytest.raises(ValueError):
        Chart(domain=((0, 0),) * 4)
    with pytest.raises(ValueError):
        Chart(samples=0)
    with pytest.raises(ValueError):
        Chart(coord_names=("t", "t", "y", "z"))


def test_sample_points_interior_and_deterministic():
    chart = Chart(domain=((0, 1),) * 4, samples=32, seed=7)
    p = chart.sample_points(1e-2)
    assert p.shape == (32, 4)
    assert chart.contains(p, margin=5e-2 - 1e-12)
    assert np.array_equal(p, chart.sample_points(1e-2))
    assert not np.array_equal(p, chart.sample_points(1e-2, seed=8))
    with pytest.raises(DomainError):
        Chart(domain=((0, 0.01),) * 4).sample_points(1e-2)


def test_central_difference_convergence_order():
    f = ScalarField.from_expression("sin(2*x)*exp(t) + y^3*cos(z)")
    pts = Chart(domain=((0, 1),) * 4, samples=16).sample_points(0.05)
    exact = np.stack([f.derivative(mu)(pts) for mu in range(4)], axis=-1)
    e1 = np.max(np.abs(central_difference(f, pts, 0.02) - exact))
    e2 = np.max(np.abs(central_difference(f, pts, 0.01) - exact))
    assert 3.5 <= e1 / e2 <= 4.5


def test_pfaff_convergence_order_skew_frame():
    A = MultivectorField.from_blades({
        0: ScalarField.from_expression("sin(x)*t"),
        3: ScalarField.from_expression("exp(y)*z"),
        15: ScalarField.from_expression("cos(t*x)"),
    })
    comps = {0: "sin(x)*t", 3: "exp(y)*z", 15: "cos(t*x)"}
    pts = SKEW_CHART.sample_points(0.05, n=16)
    hi = SKEW.h_inv(pts)
    exact = np.zeros(pts.shape[:-1] + (4, 16))
    for mask, text in comps.items():
        grad = np.stack([ScalarField.from_expression(text).derivative(mu)(pts) for mu in range(4)], axis=-1)
        exact[..., :, mask] = np.einsum("...am,...m->...a", hi, grad)
    errs = []
    for h in (0.02, 0.01):
        got = np.stack([pfaff_derivative(A, SKEW, a, pts, h).coeffs for a in range(4)], axis=-2)
        errs.append(np.max(np.abs(got - exact)))
    assert 3.5 <= errs[0] / errs[1] <= 4.5
    got = np.stack([pfaff_derivative(A, SKEW, a, pts, 1e-3).coeffs for a in range(4)], axis=-2)
    assert np.max(np.abs(got - exact)) < 1e-5


def test_pfaff_examples():
    chart = Chart()
    flat = Coframe.identity(chart)
    pts = chart.sample_points()
    const = MultivectorField.constant(2 * ONE + THETA[1])
    assert norm_max(pfaff_derivative(const, flat, 2, pts)) < 1e-12
    A = MultivectorField.from_blades({1: ScalarField.from_expression("x")})
    assert norm_max(pfaff_derivative(A, flat, 1, pts) - THETA[0]) < 1e-8


def test_pfaff_boundary():
    chart = Chart(domain=((0, 1),) * 4)
    A = MultivectorField.constant(ONE)
    with pytest.raises(DomainError):
        pfaff_derivative(A, Coframe.identity(chart), 0, np.array([0.0, 0.5, 0.5, 0.5]))


def test_frame_vector_apply_examples():
    chart = Chart()
    flat = Coframe.identity(chart)
    p = np.array([0.1, 0.2, 0.3, 0.4])
    assert abs(frame_vector_apply(flat, 1, ScalarField.from_expression("x"), p) - 1) < 1e-10
    assert abs(frame_vector_apply(flat, 2, ScalarField.constant(3.0), p)) < 1e-12
    # h^1_x = 1/2 so e_1 = 2 ∂_x
    scaled = diag_coframe(["1", "0.5", "1", "1"], chart)
    assert abs(frame_vector_apply(scaled, 1, ScalarField.from_expression("x"), p) - 2) < 1e-10


def test_structure_coefficients_identity_and_rindler():
    pts = RINDLER_CHART.sample_points()
    assert np.max(np.abs(structure_coefficients(Coframe.identity(RINDLER_CHART), pts))) == 0.0
    c = structure_coefficients(RINDLER, pts)
    x = pts[:, 1]
    # [e_0, e_1] = [(1/x)∂_t, ∂_x] = (1/x²)∂_t = (1/x) e_0
    assert np.max(np.abs(c[:, 0, 0, 1] - 1 / x)) < 1e-6
    assert np.max(np.abs(c[:, 0, 1, 0] + 1 / x)) < 1e-6
    mask = np.ones((4, 4, 4), bool)
    mask[0, 0, 1] = mask[0, 1, 0] = False
    assert np.max(np.abs(c[:, mask])) < 1e-8


def test_structure_coefficients_vs_exterior_derivative_oracle():
    # c^c_ab = -h_a^mu h_b^nu (∂_mu h^c_nu - ∂_nu h^c_mu), analytic derivatives
    pts = SKEW_CHART.sample_points(n=20)
    dh = np.zeros(pts.shape[:-1] + (4, 4, 4))  # [c, nu, mu] = ∂_mu h^c_nu
    for cc in range(4):
        for nu in range(4):
            f = SKEW.exprs[cc][nu]
            for mu in range(4):
                dh[..., cc, nu, mu] = f.derivative(mu)(pts)
    curl = dh - np.swapaxes(dh, -1, -2)  # [c, nu, mu] = ∂_mu h_nu - ∂_nu h_mu
    hi = SKEW.h_inv(pts)
    oracle = -np.einsum("...am,...bn,...cnm->...cab", hi, hi, curl)
    got = structure_coefficients(SKEW, pts)
    err = np.max(np.abs(got - oracle))
    coarse = np.max(np.abs(structure_coefficients(SKEW, pts, 2e-3) - oracle))
    assert err < 5e-5
    assert 3.5 <= coarse / err <= 4.5
    assert np.max(np.abs(got + np.swapaxes(got, -1, -2))) < 1e-12


def test_coframe_duality_and_metric():
    pts = SKEW_CHART.sample_points()
    assert SKEW.duality_residual(pts) < 1e-10
    assert SKEW.frame_metric_residual(pts) < 1e-10
    g = SKEW.metric(pts)
    assert np.max(np.abs(g - np.swapaxes(g, -1, -2))) < 1e-14


def test_volume_element():
    assert norm_max(volume_element() - THETA5) == 0.0
    assert norm_max(reversion(THETA5) * volume_element() + ONE) == 0.0


def test_tetrad_determinant():
    chart = Chart()
    p = np.array([0.1, 0.2, 0.3, 0.4])
    assert tetrad_determinant(Coframe.identity(chart), p) == 1.0
    assert abs(tetrad_determinant(diag_coframe(["2", "1", "1", "1"], chart), p) - 2) < 1e-14
    pts = SKEW_CHART.sample_points(n=10)
    dets = tetrad_determinant(SKEW, pts)
    for pt, d in zip(pts, dets):
        assert abs(d - det_cofactor(SKEW.h(pt))) < 1e-12
    with pytest.raises(SingularTetrad):
        tetrad_determinant(diag_coframe(["0", "1", "1", "1"], chart), p)


def test_multivector_field_constructors():
    pts = Chart().sample_points(n=5)
    v = MultivectorField.vector([ScalarField.from_expression(s) for s in ("t", "x", "y", "z")])
    assert np.allclose(v(pts).vector_part(), pts)
    e = MultivectorField.even([ScalarField.constant(float(i)) for i in range(8)])
    assert np.allclose(e(pts).even_part(), np.arange(8.0))
    prod = (v * v)(pts)
    assert isinstance(prod, Multivector) and prod.shape == (5,)
