"""Active local Lorentz transformations and their effect on torsion.

A rotor field U = exp F acts on the fields as ψ' = Uψ, θ'^m = Uθ^mŨ and on
the connection by

    ω'_{e'_m} = U ω_{e_m} Ũ - 2 ∂_{e_m}(U) Ũ.

Two labelings of the transformed connection are used.  The *slot* form
keeps the label m of the original frame vector e_m, so the pair
(∂_{e_m}, ω'_{e'_m}) acts on Uψ exactly as U(∂_{e_m} + ½ω_{e_m}) acts on ψ.
The *frame* form is ω'_{e_n} = Λ^m_n ω'_{e'_m}, the connection read on the
original frame, and is the one whose torsion becomes nonzero.

∂U is always a finite difference of the rotor field itself.  The closed
torsion formula uses ∂U = (∂F)U instead and is offered only where F and
∂F commute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonAbelianGenerator, NotARotor, TorsionPresent
from .fields import DEFAULT_STEP, MultivectorField, ScalarField, frame_derivative, pfaff_all, structure_coefficients
from .geometry import (
    Connection, components_from_bivector, curvature_bivectors,
    dirac_operator, riemann_components, torsion_components,
)
from .sta import (
    ETA, ETA_MATRIX, GRADES, NBLADES, THETA, Multivector, _gp_coeffs, check_rotor, exp_bivector,
    lorentz_matrix, norm_max, reversion, scalar_product,
)
from .dirac import effective_covd_all


class RotorField:
    """U(p) = exp F(p) for a bivector field F."""

    def __init__(self, generator: MultivectorField, name="rotor"):
        self.generator = generator
        self.name = name

    def bivector(self, points) -> Multivector:
        return self.generator(points)

    def __call__(self, points) -> Multivector:
        U = exp_bivector(self.generator(points)).value
        check_rotor(U, 1e-10)
        return U

    @classmethod
    def from_expressions(cls, exprs, coord_names=("t", "x", "y", "z"), params=None, name="rotor"):
        """Six coefficients of F on θ^0θ^1, θ^0θ^2, θ^0θ^3, θ^1θ^2, θ^1θ^3, θ^2θ^3."""
        if len(exprs) != 6:
            raise ValueError("a rotor generator needs 6 components")
        fields = [ScalarField.from_expression(e, coord_names, params) for e in exprs]
        return cls(MultivectorField.bivector(fields), name)

    @classmethod
    def constant(cls, F, name="constant_rotor"):
        return cls(MultivectorField.constant(F), name)

    @classmethod
    def identity(cls):
        return cls(MultivectorField.constant(Multivector.zero()), "identity")

    def inverse(self) -> "RotorField":
        """exp(-F) = Ũ."""
        return RotorField(self.generator * -1.0, f"{self.name}_inverse")

    def components(self, points):
        """F^{rs} with F = ½ F^{rs} θ_r θ_s."""
        return components_from_bivector(self.generator(points))


def _rotor_values(U, points):
    val = U(points)
    c = val.coeffs if hasattr(val, "coeffs") else np.asarray(val)
    check_rotor(Multivector(c), 1e-10)
    return c


def check_lorentz(L, tol=1e-10):
    """Raise NotARotor unless L is proper orthochronous Lorentz."""
    L = np.asarray(L)
    gram = np.swapaxes(L, -1, -2) @ ETA_MATRIX @ L
    if np.max(np.abs(gram - ETA_MATRIX)) > tol * max(1.0, float(np.max(np.abs(L))) ** 2):
        raise NotARotor("matrix does not preserve the metric")
    if np.max(np.abs(np.linalg.det(L) - 1.0)) > 1e-8 or np.any(L[..., 0, 0] < 1.0 - tol):
        raise NotARotor("transformation is not proper orthochronous")


def lambda_from_rotor(U, points):
    """Λ^m_n from Uθ^mŨ = Λ^m_n θ^n, as an array [..., m, n]."""
    L = lorentz_matrix(Multivector(_rotor_values(U, points)))
    check_lorentz(L)
    return L


def lambda_inverse(L):
    """Λ⁻¹ = η Λᵀ η for a Lorentz matrix."""
    return ETA_MATRIX @ np.swapaxes(L, -1, -2) @ ETA_MATRIX


# fields ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class ActiveFields:
    theta: Multivector  # θ'^m, batch axis of 4
    e: np.ndarray  # coordinate components e'_m^μ, [..., m, μ]
    psi: Multivector | None


def transform_fields_active(U, frame, psi, points) -> ActiveFields:
    """θ'^m = Λ^m_n θ^n, e'_m = (Λ⁻¹)^n_m e_n and ψ' = Uψ at the points."""
    p = np.asarray(points, dtype=float)
    L = lambda_from_rotor(U, p)
    theta = Multivector(np.einsum("...mn,ni->...mi", L, np.stack([t.coeffs for t in THETA])))
    e = np.einsum("...nm,...nu->...mu", lambda_inverse(L), frame.h_inv(p))
    out_psi = None
    if psi is not None:
        out_psi = Multivector(_gp_coeffs(_rotor_values(U, p), psi(p).coeffs))
    return ActiveFields(theta, e, out_psi)


def frame_gram(fields: ActiveFields):
    """θ'^a·θ'^b, which must equal η^{ab}."""
    t = fields.theta.coeffs
    return np.stack([scalar_product(Multivector(t[..., a, :]), Multivector(t[..., b, :]))
                     for a in range(4) for b in range(4)], -1).reshape(t.shape[:-2] + (4, 4))


# connection ------------------------------------------------------------------------------

def _slot_bivectors(U, conn, frame, q, step):
    u = _rotor_values(U, q)
    ur = reversion(Multivector(u)).coeffs[..., None, :]
    du = pfaff_all(lambda x: Multivector(_rotor_values(U, x)), frame, q, step)
    w = conn.bivectors(q).coeffs
    u = u[..., None, :]
    return _gp_coeffs(_gp_coeffs(u, w), ur) - 2.0 * _gp_coeffs(du, ur)


def active_slot_connection(U, conn, frame, step=DEFAULT_STEP) -> Connection:
    """Connection whose a-th bivector is ω'_{e'_a} = Uω_{e_a}Ũ - 2∂_{e_a}U Ũ."""
    return Connection(lambda q: components_from_bivector(_slot_bivectors(U, conn, frame, q, step)),
                      f"{conn.name}_active_slot")


def active_connection(U, conn, frame, step=DEFAULT_STEP) -> Connection:
    """The transformed connection read on the original frame: ω'_{e_n} = Λ^m_n ω'_{e'_m}."""
    def func(q):
        slot = _slot_bivectors(U, conn, frame, q, step)
        L = lambda_from_rotor(U, q)
        return components_from_bivector(np.einsum("...mn,...mi->...ni", L, slot))

    return Connection(func, f"{conn.name}_active")


@dataclass(frozen=True)
class ActiveConnectionValues:
    slot: Multivector  # ω'_{e'_m}, batch axis of 4
    frame: Multivector  # ω'_{e_n}
    omega: np.ndarray  # ω'_n^{kl} of the frame form


def transform_connection_active(U, conn, frame, points, step=DEFAULT_STEP) -> ActiveConnectionValues:
    p = np.asarray(points, dtype=float)
    slot = _slot_bivectors(U, conn, frame, p, step)
    L = lambda_from_rotor(U, p)
    by_frame = np.einsum("...mn,...mi->...ni", L, slot)
    omega = components_from_bivector(by_frame)
    return ActiveConnectionValues(Multivector(slot), Multivector(by_frame), omega)


def generalized_connection_residual(U, conn, frame, psi, points, step=DEFAULT_STEP):
    """max over m of |∇'^{(s)}_{e'_m}(Uψ) - U∇^{(s)}_{e_m}ψ|."""
    p = np.asarray(points, dtype=float)
    slot = active_slot_connection(U, conn, frame, step)
    upsi = MultivectorField(lambda q: Multivector(_gp_coeffs(_rotor_values(U, q), psi(q).coeffs)))
    lhs = effective_covd_all(slot, frame, upsi, p, step)
    rhs = _gp_coeffs(_rotor_values(U, p)[..., None, :], effective_covd_all(conn, frame, psi, p, step))
    return norm_max(Multivector(lhs - rhs))


# torsion -----------------------------------------------------------------------------------

def transformed_torsion_direct(U, conn, frame, points, step=DEFAULT_STEP):
    """T'^r_{nk} = ω'^r_{nk} - ω'^r_{kn} - c^r_{nk} with ω' in frame form."""
    return torsion_components(active_connection(U, conn, frame, step), frame, points, step)


def _require_torsion_free(conn, frame, p, step, tol=1e-6):
    T = torsion_components(conn, frame, p, step)
    if np.max(np.abs(T)) > tol:
        raise TorsionPresent(f"starting connection has torsion {np.max(np.abs(T)):.3g}")


def _require_abelian(U, frame, p, step, tol=1e-10):
    F = U.bivector(p).coeffs
    dF = pfaff_all(U.generator, frame, p, step)
    br = _gp_coeffs(F[..., None, :], dF) - _gp_coeffs(dF, F[..., None, :])
    if np.max(np.abs(br)) > tol:
        raise NonAbelianGenerator(f"[F, ∂F] has size {np.max(np.abs(br)):.3g}")


def transformed_torsion_formula(U: RotorField, conn, frame, points, step=DEFAULT_STEP):
    """Closed form of T' for a torsion-free start and an abelian generator.

    T'^r_{nk} = (Λ⁻¹)^r_a c^a_{md} Λ^m_n Λ^d_k - c^r_{nk}
                - 2 ∂_{e_m}(F^{rs}) (Λ^m_n η_{sk} - Λ^m_k η_{sn})
    """
    p = np.asarray(points, dtype=float)
    _require_torsion_free(conn, frame, p, step)
    _require_abelian(U, frame, p, step)
    L = lambda_from_rotor(U, p)
    Li = lambda_inverse(L)
    c = structure_coefficients(frame, p, step)
    dF = frame_derivative(U.components, frame, p, step)  # [r, s, m] = e_m(F^{rs})
    rot = np.einsum("...ra,...amd,...mn,...dk->...rnk", Li, c, L, L)
    g = np.einsum("...rsm,...mn->...rsn", dF, L) * ETA[None, :, None]  # ∂_m F^{rs} Λ^m_n η_{ss}
    # η is diagonal so η_{sk} picks s = k
    term = np.swapaxes(g, -1, -2)  # [r, n, k=s]
    return rot - c - 2.0 * (term - np.swapaxes(term, -1, -2))


@dataclass(frozen=True)
class TorsionGenerationReport:
    torsion_before: float
    torsion_after: float
    formula_gap: float | None
    threshold: float
    generated: bool
    max_component: float


def torsion_generation_experiment(frame, U, points, step=DEFAULT_STEP, tol=1e-5) -> TorsionGenerationReport:
    """Start from the Levi-Civita connection, transform actively, compare torsion."""
    p = np.asarray(points, dtype=float)
    lc = Connection.levi_civita(frame, step)
    before = float(np.max(np.abs(torsion_components(lc, frame, p, step))))
    direct = transformed_torsion_direct(U, lc, frame, p, step)
    after = float(np.max(np.abs(direct)))
    gap = None
    if isinstance(U, RotorField):
        try:
            gap = float(np.max(np.abs(transformed_torsion_formula(U, lc, frame, p, step) - direct)))
        except NonAbelianGenerator:
            gap = None
    threshold = 10.0 * tol
    return TorsionGenerationReport(before, after, gap, threshold, after > threshold, after)


def curvature_gauge_covariance_residual(U, conn, frame, points, step=DEFAULT_STEP):
    """max |ℜ'(θ'_a∧θ'_b) - U ℜ(θ_a∧θ_b) Ũ| with ℜ' from the slot connection."""
    p = np.asarray(points, dtype=float)
    R = curvature_bivectors(riemann_components(conn, frame, p, step)).coeffs
    R2 = curvature_bivectors(riemann_components(active_slot_connection(U, conn, frame, step), frame, p, step)).coeffs
    u = _rotor_values(U, p)[..., None, None, :]
    ur = reversion(Multivector(u)).coeffs
    return norm_max(Multivector(R2 - _gp_coeffs(_gp_coeffs(u, R), ur)))


# Maxwell --------------------------------------------------------------------------------------

def maxwell_residual(conn, frame, F, J, points, step=DEFAULT_STEP, torsion_tol=1e-6) -> Multivector:
    """𝝏F - J.  Grade 3 is the dF part, grade 1 collects -δF - J."""
    p = np.asarray(points, dtype=float)
    T = torsion_components(conn, frame, p, step)
    if np.max(np.abs(T)) > torsion_tol:
        raise TorsionPresent("Maxwell equations need a torsion-free connection")
    return dirac_operator(conn, frame, F, p, step) - J(p)


def grade_split(mv):
    """(grade-1 max norm, grade-3 max norm, everything else)."""
    c = mv.coeffs
    g1 = float(np.max(np.abs(c[..., GRADES == 1]), initial=0.0))
    g3 = float(np.max(np.abs(c[..., GRADES == 3]), initial=0.0))
    rest = float(np.max(np.abs(c[..., (GRADES != 1) & (GRADES != 3)]), initial=0.0))
    return g1, g3, rest


def _sandwich_field(U, A, reverse=False):
    def func(q):
        u = _rotor_values(U, q)
        ur = reversion(Multivector(u)).coeffs
        if reverse:
            u, ur = ur, u
        return Multivector(_gp_coeffs(_gp_coeffs(u, A(q).coeffs), ur))
    return MultivectorField(func)


@dataclass(frozen=True)
class MaxwellGaugeReport:
    action_gap: float  # |F·F - F'·F'|
    original: float  # |𝝏F - J|
    naive: float  # |𝝏F' - J'|
    transformed_operator: float  # |U 𝝏(Ũ F' U) Ũ - J'|


def maxwell_gauge_experiment(conn, frame, F, J, U, points, step=DEFAULT_STEP) -> MaxwellGaugeReport:
    """Sandwich F and J by U and test which form of the equation survives."""
    p = np.asarray(points, dtype=float)
    F2, J2 = _sandwich_field(U, F), _sandwich_field(U, J)
    Fv, F2v = F(p), F2(p)
    action = float(np.max(np.abs(scalar_product(Fv, Fv) - scalar_product(F2v, F2v))))
    original = norm_max(maxwell_residual(conn, frame, F, J, p, step))
    naive = norm_max(maxwell_residual(conn, frame, F2, J2, p, step))
    pulled = _sandwich_field(U, F2, reverse=True)
    d = dirac_operator(conn, frame, pulled, p, step).coeffs
    u = _rotor_values(U, p)
    pushed = _gp_coeffs(_gp_coeffs(u, d), reversion(Multivector(u)).coeffs)
    transformed = norm_max(Multivector(pushed) - J2(p))
    return MaxwellGaugeReport(action, original, naive, transformed)


def plane_wave_field():
    """F = cos(t - z)(θ¹θ⁰ - θ¹θ³), a source-free null wave."""
    def func(q):
        c = np.zeros(q.shape[:-1] + (NBLADES,))
        w = np.cos(q[..., 0] - q[..., 3])
        c[..., 0b0011] = -w  # θ¹θ⁰ = -θ⁰θ¹
        c[..., 0b1010] = -w
        return Multivector(c)
    return MultivectorField(func)
