"""Dirac-Hestenes spinor fields as even Clifford fields.

A spinor field is carried by its representative ψ relative to a fixed spin
coframe: an even multivector field.  The effective covariant derivative is
∇^{(s)}_{e_a}ψ = ∂_{e_a}ψ + ½ ω_{e_a} ψ, a one-sided action, and the
equation residuals below are evaluated pointwise from finite differences.

Passive gauge changes are realized in "component form": a Clifford field X
of the new gauge is stored through the coefficients X_c it has on the new
coframe θ'^a = U θ^a Ũ, that is X = U X_c Ũ.  Code written for the fixed
generators THETA can then be reused unchanged in either gauge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotAVector, NotEven, TorsionPresent, UnsupportedScenario
from .fields import DEFAULT_STEP, Coframe, MultivectorField, ScalarField, pfaff_all, tetrad_determinant
from .geometry import (
    Connection, components_from_bivector, curvature_bivectors, covd_all, riemann_components,
    torsion_components, torsion_covector,
)
from .sta import (
    ETA_MATRIX, GRADES, check_rotor, NBLADES, ODD_MASK, THETA, Multivector, _gp_coeffs,
    lorentz_matrix, norm_euclid, norm_max, reversion, scalar_product,
)

THETA_21 = THETA[2] * THETA[1]
THETA_021 = THETA[0] * THETA[2] * THETA[1]


@dataclass(frozen=True)
class SpinorRepresentative:
    """Even Clifford field ψ standing for a Dirac-Hestenes spinor field."""

    psi: MultivectorField

    def __call__(self, points) -> Multivector:
        return self.psi(points)

    @classmethod
    def from_expressions(cls, exprs, coord_names=("t", "x", "y", "z"), params=None):
        """Eight components ordered 1, 01, 02, 03, 12, 13, 23, 0123."""
        if len(exprs) != 8:
            raise ValueError("a spinor needs 8 even components")
        fields = [ScalarField.from_expression(e, coord_names, params) for e in exprs]
        return cls(MultivectorField.even(fields))

    @classmethod
    def constant(cls, mv):
        check_even(mv)
        return cls(MultivectorField.constant(mv))

    def check(self, points, tol=1e-14):
        check_even(self.psi(points), tol)
        return self


def check_even(mv, tol=1e-14):
    c = mv.coeffs if isinstance(mv, Multivector) else np.asarray(mv)
    if c.size and np.max(np.abs(c[..., ODD_MASK])) > tol:
        raise NotEven("spinor representative has odd-grade components")


def _as_spinor(psi):
    return psi if isinstance(psi, SpinorRepresentative) else SpinorRepresentative(psi)


@dataclass(frozen=True)
class EmPotential:
    """Electromagnetic potential A (a 1-form field) with the charge and mass it couples."""

    A: MultivectorField
    q: float = 0.0
    m: float = 0.0

    @classmethod
    def free(cls, m=0.0):
        return cls(MultivectorField.constant(Multivector.zero()), 0.0, m)

    def check(self, points):
        a = self.A(points).coeffs
        if np.any(np.abs(a[..., GRADES != 1]) > 1e-12):
            raise NotAVector("electromagnetic potential must be grade 1")
        return self


def plane_wave_at_rest(m):
    """ψ = exp(m t θ¹θ²), a rest-frame solution of the free equation of mass m."""
    cos = ScalarField(lambda q: np.cos(m * q[..., 0]))
    sin = ScalarField(lambda q: np.sin(m * q[..., 0]))
    return SpinorRepresentative(MultivectorField.from_blades({0: cos, 0b0110: sin}))


# derivatives ---------------------------------------------------------------------------

def effective_covd_all(conn, frame, psi, points, step=DEFAULT_STEP):
    """∇^{(s)}_{e_a}ψ for a = 0..3, coefficients (..., *extra, 4, 16).

    ``psi`` may be any field, including one with extra axes after the batch;
    the extra axes are carried along as labels.
    """
    p = np.asarray(points, dtype=float)
    d = pfaff_all(psi, frame, p, step)
    w = conn.bivectors(p).coeffs
    x = psi(p).coeffs
    extra = x.ndim - p.ndim
    w = w.reshape(w.shape[:-2] + (1,) * extra + w.shape[-2:])
    return d + 0.5 * _gp_coeffs(w, x[..., None, :])


def effective_covd(conn, frame, psi, a, points, step=DEFAULT_STEP) -> Multivector:
    return Multivector(effective_covd_all(conn, frame, psi, points, step)[..., a, :])


def _spin_dirac(D):
    return sum(_gp_coeffs(THETA[k].coeffs, D[..., k, :]) for k in range(4))


def spin_dirac_operator(conn, frame, psi, points, step=DEFAULT_STEP) -> Multivector:
    """𝝏^{(s)}ψ = θ^a ∇^{(s)}_{e_a}ψ."""
    return Multivector(_spin_dirac(effective_covd_all(conn, frame, psi, points, step)))


# equations ----------------------------------------------------------------------------

def _free_part(conn, frame, psi, em, p, step):
    psi_v = psi(p)
    dpsi = spin_dirac_operator(conn, frame, psi, p, step)
    out = dpsi * THETA_21 - em.m * (psi_v * THETA[0])
    if em.q:
        out = out - em.q * (em.A(p) * psi_v)
    return out


def dhe_residual_lorentzian(conn, frame, psi, em, points, step=DEFAULT_STEP, torsion_tol=1e-6):
    """θ^a∇^{(s)}_{e_a}ψ θ²¹ - qAψ - mψθ⁰; the connection must be torsion free."""
    p = np.asarray(points, dtype=float)
    T = torsion_components(conn, frame, p, step)
    if np.max(np.abs(T)) > torsion_tol:
        raise TorsionPresent(f"connection has torsion {np.max(np.abs(T)):.3g}")
    return _free_part(conn, frame, _as_spinor(psi), em, p, step)


def dhe_residual_riemann_cartan(conn, frame, psi, em, points, step=DEFAULT_STEP):
    """𝝏^{(s)}ψθ²θ¹ + ½Tψθ²θ¹ - mψθ⁰ - qAψ with T the torsion covector.

    The torsion term carries θ²θ¹: right-multiplying the θ⁰θ²θ¹ form of the
    equation by θ⁰ maps θ⁰θ²θ¹ to θ²θ¹ in both the derivative and the torsion term.
    """
    p = np.asarray(points, dtype=float)
    psi = _as_spinor(psi)
    T = torsion_covector(torsion_components(conn, frame, p, step))
    return _free_part(conn, frame, psi, em, p, step) + 0.5 * (T * psi(p) * THETA_21)


def dhe_lagrangian_density(conn, frame, psi, em, points, step=DEFAULT_STEP):
    """[(𝝏^{(s)}ψθ⁰θ²θ¹)·ψ - q(Aψθ⁰)·ψ - mψ·ψ] √|g|.

    √|g| = |det h^a_μ|.  The bracket is the scalar product of ψ with the
    Lorentzian residual times θ⁰, so it vanishes on shell.
    """
    p = np.asarray(points, dtype=float)
    psi = _as_spinor(psi)
    vol = np.abs(tetrad_determinant(frame, p))
    psi_v = psi(p)
    body = scalar_product(spin_dirac_operator(conn, frame, psi, p, step) * THETA_021, psi_v)
    body = body - em.m * scalar_product(psi_v, psi_v)
    if em.q:
        body = body - em.q * scalar_product(em.A(p) * psi_v * THETA[0], psi_v)
    return body * vol


# passive gauge ------------------------------------------------------------------------------

@dataclass(frozen=True)
class PassiveGauge:
    """A spin-coframe change Ξ' = Ξu with everything stored in θ'-components."""

    frame: Coframe
    conn: Connection
    psi: SpinorRepresentative
    em: EmPotential | None
    rotor: object


def _rotor_coeffs(U, q):
    val = U(q)
    c = val.coeffs if hasattr(val, "coeffs") else np.asarray(val)
    check_rotor(Multivector(c), 1e-10)
    return c


def passive_gauge_transform(frame, conn, psi, U, em=None, step=DEFAULT_STEP) -> PassiveGauge:
    """Rewrite (θ, ω, ψ, A) relative to the coframe θ'_a = Uθ_aŨ.

    With ψ' = ψŨ and ½ω'_V = U½ω_VŨ + (∇_V U)Ũ, the θ'-components are

    * h'^a_μ = Λ^a_b h^b_μ
    * ψ'_c = Ũψ, A'_c = ŨAU
    * ω'_{e'_a} = (Λ⁻¹)^b_a Ũ(ω_{e_b} + 2 ∂_{e_b}U Ũ)U

    where the Clifford derivative ∇U = ∂U + ½[ω, U] has been expanded.
    ``U`` maps points to rotors (a RotorField or any such callable).
    """
    psi = _as_spinor(psi)

    def lam(q):
        return lorentz_matrix(Multivector(_rotor_coeffs(U, q)))

    def h2(q):
        return np.einsum("...ab,...bm->...am", lam(q), frame.h(q))

    def omega2(q):
        u = _rotor_coeffs(U, q)
        ur = reversion(Multivector(u)).coeffs
        w = conn.bivectors(q).coeffs
        du = pfaff_all(lambda x: Multivector(_rotor_coeffs(U, x)), frame, q, step)
        inner = w + 2.0 * _gp_coeffs(du, ur[..., None, :])
        rotated = _gp_coeffs(_gp_coeffs(ur[..., None, :], inner), u[..., None, :])
        L = lam(q)
        linv = ETA_MATRIX @ np.swapaxes(L, -1, -2) @ ETA_MATRIX
        relabeled = np.einsum("...ba,...bi->...ai", linv, rotated)
        return components_from_bivector(relabeled)

    def psi2(q):
        u = _rotor_coeffs(U, q)
        return Multivector(_gp_coeffs(reversion(Multivector(u)).coeffs, psi(q).coeffs))

    em2 = None
    if em is not None:
        def a2(q):
            u = _rotor_coeffs(U, q)
            ur = reversion(Multivector(u)).coeffs
            return Multivector(_gp_coeffs(_gp_coeffs(ur, em.A(q).coeffs), u))
        em2 = EmPotential(MultivectorField(a2), em.q, em.m)

    frame2 = Coframe.from_callable(h2, frame.chart)
    conn2 = Connection(omega2, f"{conn.name}_passive")
    return PassiveGauge(frame2, conn2, SpinorRepresentative(MultivectorField(psi2)), em2, U)


@dataclass(frozen=True)
class PassiveCheck:
    covariance: float  # max |U R' - R|
    norm_gap: float  # max ||R'| - |R||, Euclidean coefficient norm


def passive_gauge_check(frame, conn, psi, em, U, points, step=DEFAULT_STEP, riemann_cartan=True):
    """Compare the residual in both gauges.

    The residual of the new gauge in θ'-components satisfies R = U R'_c, so
    the covariance entry should vanish to finite-difference accuracy.
    """
    p = np.asarray(points, dtype=float)
    g = passive_gauge_transform(frame, conn, psi, U, em, step)
    residual = dhe_residual_riemann_cartan if riemann_cartan else dhe_residual_lorentzian
    r1 = residual(conn, frame, psi, em, p, step)
    r2 = residual(g.conn, g.frame, g.psi, g.em, p, step)
    u = Multivector(_rotor_coeffs(U, p))
    cov = norm_max(u * r2 - r1)
    gap = float(np.max(np.abs(norm_euclid(r2) - norm_euclid(r1))))
    return PassiveCheck(cov, gap)


# commutator of effective derivatives --------------------------------------------------------

def spinor_commutator_parts(conn, frame, psi, points, step=DEFAULT_STEP, variant="effective"):
    """(lhs, rhs) of [∇^s_a, ∇^s_b]ψ = ½ℜ(θ_a∧θ_b)ψ - (T^c_ab - ω^c_ab + ω^c_ba) D_c ψ.

    ``variant`` picks D_c: "effective" uses ∇^{(s)}, "clifford" the Clifford
    covariant derivative.  Arrays have shape (..., 4, 4, 16) indexed [a, b].
    """
    if variant not in ("effective", "clifford"):
        raise ValueError(f"unknown variant {variant!r}")
    p = np.asarray(points, dtype=float)
    psi = _as_spinor(psi)
    inner = MultivectorField(lambda q: Multivector(effective_covd_all(conn, frame, psi, q, step)))
    D2 = effective_covd_all(conn, frame, inner, p, step)  # [b, a] = ∇_a ∇_b ψ
    lhs = np.swapaxes(D2, -3, -2) - D2
    if variant == "effective":
        D1 = effective_covd_all(conn, frame, psi, p, step)
    else:
        D1 = covd_all(conn, frame, psi.psi, p, step)
    g = conn.gamma(p)
    K = torsion_components(conn, frame, p, step) - g + np.swapaxes(g, -1, -2)
    Rb = curvature_bivectors(riemann_components(conn, frame, p, step)).coeffs
    rhs = 0.5 * _gp_coeffs(Rb, psi(p).coeffs[..., None, None, :]) - np.einsum("...cab,...ci->...abi", K, D1)
    return lhs, rhs


def spinor_commutator_residual(conn, frame, psi, a, b, points, step=DEFAULT_STEP, variant="effective"):
    lhs, rhs = spinor_commutator_parts(conn, frame, psi, points, step, variant)
    return norm_max(lhs[..., a, b, :] - rhs[..., a, b, :])


# gamma-matrix oracle --------------------------------------------------------------------------

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def dirac_gammas():
    """Standard Dirac representation, γ⁰ = diag(1, 1, -1, -1)."""
    I2, Z2 = np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)
    g0 = np.block([[I2, Z2], [Z2, -I2]])
    return (g0,) + tuple(np.block([[Z2, s], [-s, Z2]]) for s in _SIGMA)


def matrix_image(coeffs, gammas=None):
    """ρ(A) = Σ_J A_J γ^{j1}⋯γ^{jk}, blade products built from the matrices."""
    gammas = gammas or dirac_gammas()
    mats = []
    for mask in range(NBLADES):
        m = np.eye(4, dtype=complex)
        for k in range(4):
            if mask >> k & 1:
                m = m @ gammas[k]
        mats.append(m)
    return np.einsum("...j,jrs->...rs", np.asarray(coeffs, dtype=complex), np.array(mats))


def ideal_idempotent(gammas=None):
    """f = ½(1 + γ⁰) ½(1 + iγ¹γ²)."""
    g = gammas or dirac_gammas()
    one = np.eye(4, dtype=complex)
    return 0.25 * (one + g[0]) @ (one + 1j * g[1] @ g[2])


def column_spinor(psi_coeffs, gammas=None):
    """|Ψ⟩ = ρ(ψ) ρ(f) e₀, a complex 4-column for each point."""
    g = gammas or dirac_gammas()
    col = ideal_idempotent(g)[:, 0]
    return matrix_image(psi_coeffs, g) @ col


def matrix_dirac_oracle(psi, em, frame, conn, points, step=DEFAULT_STEP):
    """Norm of iγ^a(∂_a + iqA_a)|Ψ⟩ - m|Ψ⟩ per point, Minkowski Cartesian only.

    Derivatives are plain coordinate central differences of the column
    spinor, independent of the Clifford-side machinery.
    """
    p = np.asarray(points, dtype=float)
    if np.max(np.abs(frame.h(p) - np.eye(4))) > 1e-12 or np.max(np.abs(conn(p))) > 1e-12:
        raise UnsupportedScenario("the matrix oracle needs a flat Cartesian coframe and zero connection")
    if not frame.chart.contains(p, margin=step):
        raise DomainError("stencil leaves the chart")
    g = dirac_gammas()
    psi = _as_spinor(psi)

    def col(q):
        return column_spinor(psi(q).coeffs, g)

    Psi = col(p)
    A = em.A(p).vector_part()  # A = A_a θ^a
    out = -em.m * Psi
    for a in range(4):
        e = np.zeros(4)
        e[a] = step
        dPsi = (col(p + e) - col(p - e)) / (2 * step)
        out = out + 1j * np.einsum("rs,...s->...r", g[a], dPsi + 1j * em.q * A[..., a, None] * Psi)
    return np.sqrt(np.sum(np.abs(out) ** 2, axis=-1))
