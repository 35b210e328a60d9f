import numpy as np
import pytest

from common import (
    FLAT, FLAT_CHART, MILD, MILD_CHART, RINDLER, RINDLER_CHART, SKEW, SKEW_CHART, SPHERE, SPHERE_CHART,
    assert_second_order, const_vector, random_connection, random_constant_connection, random_field, vector_field,
)
from oracles import levi_civita_bruteforce
from starc.errors import NotAVector
from starc.fields import MultivectorField, ScalarField, structure_coefficients
from starc.geometry import (
    Connection, bianchi_residuals, bivector_from_components,
    cartan_curvature_forms, cartan_torsion_forms, commutator_identity_parts,
    commutator_identity_residual, components_from_bivector, connection_bivector,
    covd_all, covd_clifford, curvature_biform,
    curvature_commutator_residual, codifferential, dirac_contraction_part,
    dirac_exterior_part, dirac_operator, exterior_derivative, forms_on_frame,
    gamma_from_omega, levi_civita_from_coframe, metric_compatibility_residual,
    omega_from_gamma, riemann_components, torsion_components, torsion_covector,
    torsion_operator,
)
from starc.sta import (
    ETA, ONE, THETA, THETA_LOWER, Multivector, commutator,
    grade_project, norm_max, scalar_product,
)


def pts(chart, n=None, step=1e-3):
    return chart.sample_points(step, n=n)


# conversions -------------------------------------------------------------------

def test_gamma_omega_round_trip():
    rng = np.random.default_rng(0)
    om = rng.normal(size=(5, 4, 4, 4))
    om = om - np.swapaxes(om, -1, -2)
    assert np.allclose(omega_from_gamma(gamma_from_omega(om)), om)
    g = gamma_from_omega(om)
    # Γ^c_ab = ω_a^{cd} η_db, written out
    for c in range(4):
        for a in range(4):
            for b in range(4):
                assert g[0, c, a, b] == om[0, a, c, b] * ETA[b]


def test_connection_bivector_examples():
    p = pts(FLAT_CHART, 3)
    assert norm_max(connection_bivector(Connection.zero(), 0, p)) == 0.0
    om = np.zeros((4, 4, 4))
    om[0, 1, 2], om[0, 2, 1] = 0.7, -0.7
    B = connection_bivector(Connection.constant(om), 0, p)
    assert norm_max(B - 0.7 * (THETA_LOWER[1] * THETA_LOWER[2])) < 1e-15
    rc = random_connection(3)
    for a in range(4):
        W = connection_bivector(rc, a, p)
        assert norm_max(W - grade_project(W, 2)) == 0.0


def test_components_by_scalar_products():
    rng = np.random.default_rng(1)
    B = Multivector.bivector(rng.normal(size=(7, 6)))
    w = components_from_bivector(B)
    for k in range(4):
        for l in range(4):
            assert np.allclose(w[:, k, l], scalar_product(THETA[k] ^ THETA[l], B))
    assert norm_max(bivector_from_components(w) - B) < 1e-14


def test_covd_of_coframe_reproduces_component_formula():
    conn = random_constant_connection(5)
    p = pts(FLAT_CHART, 4)
    om = conn(p)
    for a in range(4):
        for b in range(4):
            got = covd_clifford(conn, FLAT, MultivectorField.constant(THETA[b]), a, p)
            expected = -sum(om[:, a, b, c][:, None] * THETA_LOWER[c].coeffs for c in range(4))
            assert np.max(np.abs(got.coeffs - expected)) < 1e-10


def test_covd_examples():
    p = pts(FLAT_CHART, 4)
    A = MultivectorField.constant(2 * ONE + THETA[3])
    assert norm_max(covd_clifford(Connection.zero(), FLAT, A, 1, p)) < 1e-12
    f = MultivectorField.from_blades({0: ScalarField.from_expression("t*x + y^2")})
    conn = random_connection(2)
    got = covd_clifford(conn, FLAT, f, 2, p)
    assert norm_max(got - Multivector.scalar(2 * p[:, 2])) < 1e-6


def test_grade_preservation():
    conn = random_connection(4)
    p = pts(SKEW_CHART, 6)
    for k in range(5):
        A = random_field(10 + k, grades=(k,))
        D = Multivector(covd_all(conn, SKEW, A, p))
        assert norm_max(D - grade_project(D, k)) < 1e-10


def test_derivation_law():
    conn = random_connection(6)
    p = pts(SKEW_CHART, 6)
    A, B = random_field(1, scale=0.5), random_field(2, scale=0.5)
    AB = A * B
    for a in range(4):
        lhs = covd_clifford(conn, SKEW, AB, a, p)
        rhs = covd_clifford(conn, SKEW, A, a, p) * B(p) + A(p) * covd_clifford(conn, SKEW, B, a, p)
        assert norm_max(lhs - rhs) < 1e-6


# Levi-Civita ---------------------------------------------------------------------

def test_levi_civita_flat_is_zero():
    p = pts(FLAT_CHART, 4)
    assert np.max(np.abs(levi_civita_from_coframe(FLAT, p))) == 0.0


def test_levi_civita_rindler():
    p = pts(RINDLER_CHART)
    om = levi_civita_from_coframe(RINDLER, p)
    x = p[:, 1]
    # ∇_{e_0} e_1 = (1/x) e_0, i.e. Γ^0_01 = 1/x, ω_0^{10} = 1/x
    assert np.max(np.abs(om[:, 0, 1, 0] - 1 / x)) < 1e-6
    assert np.max(np.abs(om[:, 0, 0, 1] + 1 / x)) < 1e-6
    rest = om.copy()
    rest[:, 0, 1, 0] = rest[:, 0, 0, 1] = 0
    assert np.max(np.abs(rest)) < 1e-8


def test_levi_civita_matches_bruteforce_solve():
    p = pts(SKEW_CHART, 5)
    c = structure_coefficients(SKEW, p)
    g = gamma_from_omega(levi_civita_from_coframe(SKEW, p))
    for i in range(len(p)):
        assert np.max(np.abs(g[i] - levi_civita_bruteforce(c[i]))) < 1e-10


def test_levi_civita_torsion_free_and_metric():
    p = pts(SKEW_CHART)
    lc = Connection.levi_civita(SKEW)
    assert np.max(np.abs(torsion_components(lc, SKEW, p))) < 1e-7
    assert metric_compatibility_residual(lc, SKEW, p) < 1e-15


def test_metric_compatibility_detects_symmetric_part():
    om = np.zeros((4, 4, 4))
    om[1, 2, 3] = 0.3
    assert metric_compatibility_residual(Connection.constant(om), FLAT, pts(FLAT_CHART, 2)) == pytest.approx(0.3)
    assert metric_compatibility_residual(random_connection(1), FLAT, pts(FLAT_CHART, 4)) <= 1e-12


# Dirac operator --------------------------------------------------------------------

def test_dirac_examples():
    p = pts(FLAT_CHART, 5)
    zero = Connection.zero()
    assert norm_max(dirac_operator(zero, FLAT, MultivectorField.constant(ONE + THETA[2]), p)) < 1e-12
    x = MultivectorField.from_blades({0: ScalarField.from_expression("x")})
    assert norm_max(dirac_operator(zero, FLAT, x, p) - THETA[1]) < 1e-10


@pytest.mark.parametrize("k", range(5))
def test_dirac_split_matches_d_and_delta(k):
    A = random_field(20 + k, grades=(k,), scale=0.5)
    for frame, chart, tol in ((MILD, MILD_CHART, 1e-6), (SKEW, SKEW_CHART, 1e-5)):
        p = pts(chart, 4, step=2e-3)

        def errs(step):
            lc = Connection.levi_civita(frame, step)
            ext = dirac_exterior_part(lc, frame, A, p, step)
            con = dirac_contraction_part(lc, frame, A, p, step)
            assert norm_max(ext + con - dirac_operator(lc, frame, A, p, step)) < 1e-12
            return max(norm_max(ext - exterior_derivative(A, frame, p, step)),
                       norm_max(con + codifferential(A, frame, p, step)))

        assert_second_order(errs, tol)


def test_d_squared_vanishes():
    p = pts(SKEW_CHART, 3)
    A = random_field(3, grades=(1,), scale=0.5)
    dA = MultivectorField(lambda q: exterior_derivative(A, SKEW, q))
    assert norm_max(exterior_derivative(dA, SKEW, p)) < 1e-5


# torsion --------------------------------------------------------------------------------

def test_torsion_operator_levi_civita_zero():
    lc = Connection.levi_civita(SKEW)
    p = pts(SKEW_CHART, 6)
    u, v = vector_field(1), vector_field(2)
    assert norm_max(torsion_operator(lc, SKEW, u, v, p)) < 1e-6
    assert norm_max(torsion_operator(random_connection(3), SKEW, u, u, p)) < 1e-12


def test_torsion_operator_matches_components():
    conn = random_connection(7)
    p = pts(SKEW_CHART, 6)
    u, v = vector_field(3), vector_field(4)
    tau = torsion_operator(conn, SKEW, u, v, p)
    T = torsion_components(conn, SKEW, p)
    ua = u(p).vector_part() * ETA
    va = v(p).vector_part() * ETA
    for d in range(4):
        lhs = scalar_product(THETA[d], tau)
        rhs = np.einsum("nab,na,nb->n", T[:, d], ua, va)
        assert np.max(np.abs(lhs - rhs)) < 1e-6
    # bilinear and antisymmetric
    assert norm_max(tau + torsion_operator(conn, SKEW, v, u, p)) < 1e-12
    w = vector_field(5)
    lhs = torsion_operator(conn, SKEW, u + w, v, p)
    assert norm_max(lhs - tau - torsion_operator(conn, SKEW, w, v, p)) < 1e-8


def test_torsion_operator_rejects_non_vectors():
    with pytest.raises(NotAVector):
        torsion_operator(Connection.zero(), FLAT, MultivectorField.constant(ONE), vector_field(1), pts(FLAT_CHART, 2))


def test_torsion_components_zero_connection():
    p = pts(RINDLER_CHART)
    T = torsion_components(Connection.zero(), RINDLER, p)
    assert np.allclose(T, -structure_coefficients(RINDLER, p))
    assert np.max(np.abs(T + np.swapaxes(T, -1, -2))) == 0.0


def test_torsion_covector():
    T = np.zeros((4, 4, 4))
    T[1, 0, 1], T[1, 1, 0] = 0.8, -0.8
    assert norm_max(torsion_covector(T) - 0.8 * THETA[0]) == 0.0
    assert norm_max(torsion_covector(2 * T) - 2 * torsion_covector(T)) == 0.0
    lc = Connection.levi_civita(RINDLER)
    p = pts(RINDLER_CHART, 4)
    assert norm_max(torsion_covector(torsion_components(lc, RINDLER, p))) < 1e-10


# curvature ----------------------------------------------------------------------------

def test_curvature_biform_zero_and_constant():
    p = pts(FLAT_CHART, 4)
    u, v = const_vector([0, 1, 0, 0]), const_vector([0, 0, 0, 1])
    assert norm_max(curvature_biform(Connection.zero(), FLAT, u, v, p)) == 0.0
    conn = random_constant_connection(8)
    R = curvature_biform(conn, FLAT, u, v, p)
    wu = u(p).vector_part() * ETA @ conn.bivectors(p).coeffs[0]
    wv = v(p).vector_part() * ETA @ conn.bivectors(p).coeffs[0]
    # covariant derivatives of the constant ω fields leave ½[ω_u, ω_v]
    assert norm_max(R - 0.5 * commutator(Multivector(wu), Multivector(wv))) < 1e-12


def test_curvature_biform_matches_components():
    conn = random_connection(9)
    p = pts(SKEW_CHART, 5)
    u, v = vector_field(6), vector_field(7)
    Rb = curvature_biform(conn, SKEW, u, v, p)
    R = riemann_components(conn, SKEW, p)
    ua = u(p).vector_part() * ETA
    va = v(p).vector_part() * ETA
    for f in range(4):
        for g in range(f + 1, 4):
            lhs = scalar_product(THETA[f] ^ THETA[g], Rb)
            rhs = np.einsum("nab,na,nb->n", R[:, f, g] * ETA[g], ua, va)
            assert np.max(np.abs(lhs - rhs)) < 1e-6
    assert norm_max(Rb + curvature_biform(conn, SKEW, v, u, p)) < 1e-12


def test_riemann_flat_and_rindler():
    p = pts(FLAT_CHART, 4)
    assert np.max(np.abs(riemann_components(Connection.zero(), FLAT, p))) == 0.0
    p = pts(RINDLER_CHART)
    R = riemann_components(Connection.levi_civita(RINDLER), RINDLER, p)
    assert np.max(np.abs(R)) <= 1e-5


def test_riemann_sphere_block():
    p = pts(SPHERE_CHART)
    R = riemann_components(Connection.levi_civita(SPHERE), SPHERE, p)
    assert_second_order(
        lambda h: np.max(np.abs(riemann_components(Connection.levi_civita(SPHERE, h), SPHERE, p, h)[:, 2, 3, 2, 3] - 1)),
        1e-4,
    )
    assert np.max(np.abs(R[:, 3, 2, 2, 3] + 1.0)) < 1e-4
    assert np.max(np.abs(R + np.swapaxes(R, -1, -2))) < 1e-12
    mask = np.ones((4,) * 4, bool)
    for idx in [(2, 3, 2, 3), (3, 2, 2, 3), (2, 3, 3, 2), (3, 2, 3, 2)]:
        mask[idx] = False
    assert np.max(np.abs(R[:, mask])) < 1e-4


def test_commutator_identity_flat_linear():
    p = pts(FLAT_CHART, 4)
    t = MultivectorField.vector([ScalarField.from_expression(e) for e in ("x", "2*t - y", "z", "1")])
    for a, b in [(0, 1), (1, 2), (2, 3)]:
        assert commutator_identity_residual(Connection.zero(), FLAT, t, a, b, p) < 1e-6


@pytest.mark.parametrize("case", ["rindler", "sphere", "torsioned"])
def test_commutator_identity(case):
    frame, chart, conn = {
        "rindler": (RINDLER, RINDLER_CHART, Connection.levi_civita(RINDLER)),
        "sphere": (SPHERE, SPHERE_CHART, Connection.levi_civita(SPHERE)),
        "torsioned": (SKEW, SKEW_CHART, random_connection(11)),
    }[case]
    p = pts(chart, 5)
    t = vector_field(8)
    lhs, rhs = commutator_identity_parts(conn, frame, t, p)
    assert norm_max(Multivector(lhs - rhs)) < 1e-4
    assert commutator_identity_residual(conn, frame, t, 0, 1, p) < 1e-4


def test_curvature_commutator_link():
    p = pts(SKEW_CHART, 4)
    assert curvature_commutator_residual(random_connection(12), SKEW, vector_field(9), p) < 1e-4


# Cartan forms ---------------------------------------------------------------------------

def test_cartan_torsion_zero_connection_rindler():
    p = pts(RINDLER_CHART)
    Th = forms_on_frame(cartan_torsion_forms(Connection.zero(), RINDLER, p), RINDLER, p)
    c = structure_coefficients(RINDLER, p)
    assert np.max(np.abs(Th[:, 0, 0, 1] + c[:, 0, 0, 1])) < 1e-5
    assert np.max(np.abs(Th[:, 0, 0, 1])) > 0.4


@pytest.mark.parametrize("seed", [0, 1])
def test_cartan_torsion_vs_components(seed):
    conn = random_connection(seed)
    for frame, chart, tol in ((MILD, MILD_CHART, 1e-6), (SKEW, SKEW_CHART, 1e-5)):
        p = pts(chart, 6, step=2e-3)

        def err(h):
            Th = forms_on_frame(cartan_torsion_forms(conn, frame, p, h), frame, p)
            return np.max(np.abs(Th - torsion_components(conn, frame, p, h)))

        assert_second_order(err, tol)


@pytest.mark.parametrize("seed", [0, 1])
def test_cartan_curvature_vs_components(seed):
    conn = random_connection(seed)
    for frame, chart, tol in ((MILD, MILD_CHART, 1e-6), (SKEW, SKEW_CHART, 1e-5)):
        p = pts(chart, 6, step=2e-3)

        def err(h):
            Om = forms_on_frame(cartan_curvature_forms(conn, frame, p, h), frame, p)
            return np.max(np.abs(Om - riemann_components(conn, frame, p, h)))

        assert_second_order(err, tol)


def test_cartan_curvature_constant_connection():
    conn = random_constant_connection(3)
    p = pts(FLAT_CHART, 3)
    Om = cartan_curvature_forms(conn, FLAT, p)
    g = conn.gamma(p)
    w = np.einsum("nacb->nabc", g)  # (ω^a_b)_c on the identity coframe
    ww = np.einsum("nacm,ncbk->nabmk", w, w) - np.einsum("nack,ncbm->nabmk", w, w)
    assert np.max(np.abs(Om - ww)) < 1e-12
    assert np.max(np.abs(cartan_torsion_forms(Connection.zero(), FLAT, p))) == 0.0


def test_bianchi_examples():
    p = pts(FLAT_CHART, 3)
    assert bianchi_residuals(Connection.zero(), FLAT, p) == (0.0, 0.0)
    first, second = bianchi_residuals(random_constant_connection(4), FLAT, p)
    assert second <= 1e-10
    p = pts(RINDLER_CHART, 6)
    first, second = bianchi_residuals(Connection.levi_civita(RINDLER), RINDLER, p)
    assert first <= 1e-3 and second <= 1e-3


def test_bianchi_torsioned_converges():
    conn = random_connection(13)
    p = pts(SKEW_CHART, 4, step=2e-3)
    coarse = bianchi_residuals(conn, SKEW, p, 2e-3)
    fine = bianchi_residuals(conn, SKEW, p, 1e-3)
    assert max(fine) < 1e-4
    for c_, f_ in zip(coarse, fine):
        assert f_ < 1e-8 or c_ / f_ > 3.0
