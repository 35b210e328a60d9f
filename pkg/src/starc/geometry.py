"""Riemann-Cartan connections over an orthonormal coframe.

Index conventions (all arrays carry batch axes in front):

* ``omega[a, b, c]`` = ω_a^{bc}, the stored primitive, antisymmetric in (b, c).
  The connection bivector is ω_{e_a} = ½ ω_a^{bc} θ_b θ_c.
* ``gamma[c, a, b]`` = Γ^c_{ab} = ω_a^{cd} η_{db}, so ∇_{e_a} e_b = Γ^c_{ab} e_c
  and ∇_{e_a} θ^b = -ω_a^{bc} θ_c.
* ``c[c, a, b]`` = c^c_{ab} with [e_a, e_b] = c^c_{ab} e_c.
* ``T[c, a, b]`` = T^c_{ab} = Γ^c_{ab} - Γ^c_{ba} - c^c_{ab}.
* ``R[d, c, a, b]`` = R^d_{cab}, so R(e_a, e_b) e_c = R^d_{cab} e_d.

Cartan forms are returned as coordinate components, with the wedge on
index forms taken as the antisymmetrized tensor product without a factor ½.
"""

from __future__ import annotations

import numpy as np

from .errors import NotAVector
from .fields import (
    DEFAULT_STEP, Coframe, MultivectorField, ScalarField, central_difference,
    check_stencil, frame_derivative, pfaff_all, structure_coefficients,
)
from .sta import (
    BIVECTOR_PAIRS, ETA, GRADES, NBLADES, Multivector, _gp_coeffs, exterior_product,
    hodge_star, inverse_hodge_star, left_contraction, norm_max, right_contraction,
)

_PAIR_MASKS = [(1 << a) | (1 << b) for a, b in BIVECTOR_PAIRS]


# component conversions -----------------------------------------------------------

def gamma_from_omega(omega):
    """Γ^c_{ab} = ω_a^{cd} η_{db}."""
    omega = np.asarray(omega)
    return np.swapaxes(omega, -3, -2) * ETA


def omega_from_gamma(gamma):
    """Inverse of gamma_from_omega: ω_a^{cb} = Γ^c_{ad} η^{db}."""
    gamma = np.asarray(gamma)
    return np.swapaxes(gamma * ETA, -3, -2)


def bivector_from_components(w):
    """Bivector ½ w^{bc} θ_b θ_c from antisymmetric upper components w[..., b, c]."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-2] + (NBLADES,))
    for (b, c), mask in zip(BIVECTOR_PAIRS, _PAIR_MASKS):
        # θ_b θ_c = η_b η_c θ^b θ^c; the ½ cancels against the (c, b) term
        out[..., mask] = 0.5 * (w[..., b, c] - w[..., c, b]) * ETA[b] * ETA[c]
    return Multivector(out)


def components_from_bivector(B):
    """w^{kl} = (θ^k ∧ θ^l) · B, the inverse of bivector_from_components."""
    coeffs = B.coeffs if isinstance(B, Multivector) else np.asarray(B)
    w = np.zeros(coeffs.shape[:-1] + (4, 4))
    for (k, l), mask in zip(BIVECTOR_PAIRS, _PAIR_MASKS):
        w[..., k, l] = ETA[k] * ETA[l] * coeffs[..., mask]
        w[..., l, k] = -w[..., k, l]
    return w


def frame_to_form(vec):
    """Contravariant frame components X^a to the 1-form coefficients on θ^a."""
    return np.asarray(vec) * ETA


form_to_frame = frame_to_form  # η is its own inverse


class Connection:
    """Connection coefficients ω_a^{bc} as a function of chart points."""

    def __init__(self, func, name="connection"):
        self._func = func
        self.name = name

    def __call__(self, points):
        return np.asarray(self._func(np.asarray(points, dtype=float)), dtype=float)

    @classmethod
    def zero(cls):
        return cls(lambda p: np.zeros(np.shape(p)[:-1] + (4, 4, 4)), "zero")

    @classmethod
    def constant(cls, omega, name="constant"):
        omega = np.array(omega, dtype=float)
        return cls(lambda p: np.broadcast_to(omega, np.shape(p)[:-1] + (4, 4, 4)), name)

    @classmethod
    def from_pairs(cls, fields, name="explicit"):
        """``fields[a][n]`` gives ω_a^{bc} for the n-th pair (b<c) in 01,02,03,12,13,23."""
        if len(fields) != 4 or any(len(row) != 6 for row in fields):
            raise ValueError("connection needs 4 rows of 6 pair components")

        def func(p):
            out = np.zeros(p.shape[:-1] + (4, 4, 4))
            for a in range(4):
                for (b, c), f in zip(BIVECTOR_PAIRS, fields[a]):
                    v = f(p)
                    out[..., a, b, c] = v
                    out[..., a, c, b] = -v
            return out

        return cls(func, name)

    @classmethod
    def from_expressions(cls, exprs, coord_names=("t", "x", "y", "z"), params=None):
        fields = [[ScalarField.from_expression(e, coord_names, params) for e in row] for row in exprs]
        return cls.from_pairs(fields)

    @classmethod
    def levi_civita(cls, frame: Coframe, step=DEFAULT_STEP):
        return cls(lambda p: levi_civita_from_coframe(frame, p, step), "levi_civita")

    def gamma(self, points):
        return gamma_from_omega(self(points))

    def bivectors(self, points) -> Multivector:
        """ω_{e_a} for all a as a Multivector batch with a trailing axis of 4."""
        return bivector_from_components(self(points))


def connection_bivector(conn, a, points) -> Multivector:
    """ω_{e_a} = ½ ω_a^{bc} θ_b ∧ θ_c."""
    return Multivector(conn.bivectors(points).coeffs[..., a, :])


def levi_civita_from_coframe(frame, points, step=DEFAULT_STEP):
    """Torsion-free metric connection ω_a^{bc} from structure coefficients.

    With the first index lowered by η, Γ_{cab} = ½(c_{cab} - c_{abc} + c_{bca}).
    """
    c = structure_coefficients(frame, points, step)
    low = c * ETA[:, None, None]  # c_{cab}
    g_low = 0.5 * (low - np.einsum("...abc->...cab", low) + np.einsum("...bca->...cab", low))
    return omega_from_gamma(g_low * ETA[:, None, None])


# covariant derivatives of Clifford fields ----------------------------------------

def _bracket_all(W, A, nb):
    """½[ω_{e_a}, A] for every a, where A may carry extra axes after the batch."""
    w = W.coeffs  # (*batch, 4, 16)
    a = A  # (*batch, *extra, 16)
    extra = a.ndim - 1 - nb
    w = w.reshape(w.shape[:nb] + (1,) * extra + w.shape[nb:])
    a = a[..., None, :]
    return 0.5 * (_gp_coeffs(w, a) - _gp_coeffs(a, w))


def covd_all(conn, frame, A, points, step=DEFAULT_STEP):
    """∇_{e_a}A for a = 0..3: coefficients of shape (..., *extra, 4, 16)."""
    p = np.asarray(points, dtype=float)
    d = pfaff_all(A, frame, p, step)
    return d + _bracket_all(conn.bivectors(p), A(p).coeffs, p.ndim - 1)


def covd_clifford(conn, frame, A, a, points, step=DEFAULT_STEP) -> Multivector:
    """∇_{e_a}A = ∂_{e_a}A + ½[ω_{e_a}, A]."""
    return Multivector(covd_all(conn, frame, A, points, step)[..., a, :])


def covd_field(conn, frame, A, step=DEFAULT_STEP):
    """The field q -> (∇_{e_a}A)(q), carrying a trailing axis of 4 directions."""
    return MultivectorField(lambda q: Multivector(covd_all(conn, frame, A, q, step)))


def dirac_operator(conn, frame, A, points, step=DEFAULT_STEP) -> Multivector:
    """𝝏A = θ^a ∇_{e_a}A."""
    D = covd_all(conn, frame, A, points, step)
    return Multivector(sum(_gp_coeffs(_theta(k), D[..., k, :]) for k in range(4)))


def _theta(k):
    out = np.zeros(NBLADES)
    out[1 << k] = 1.0
    return out


def dirac_exterior_part(conn, frame, A, points, step=DEFAULT_STEP) -> Multivector:
    """𝝏 ∧ A = θ^a ∧ ∇_{e_a}A."""
    D = covd_all(conn, frame, A, points, step)
    return sum((exterior_product(Multivector(_theta(k)), Multivector(D[..., k, :])) for k in range(4)),
               Multivector.zero())


def dirac_contraction_part(conn, frame, A, points, step=DEFAULT_STEP) -> Multivector:
    """𝝏 ⌟ A = θ^a ⌟ ∇_{e_a}A."""
    D = covd_all(conn, frame, A, points, step)
    return sum((left_contraction(Multivector(_theta(k)), Multivector(D[..., k, :])) for k in range(4)),
               Multivector.zero())


# vector fields -----------------------------------------------------------------------

def _require_vector(mv, what="argument"):
    if np.any(np.abs(mv.coeffs[..., GRADES != 1]) > 1e-12):
        raise NotAVector(f"{what} must be a pure grade-1 field")


def vector_components(u, points):
    """Contravariant frame components u^a = u·θ^a of a 1-vector field."""
    mv = u(points)
    _require_vector(mv)
    return form_to_frame(mv.vector_part())


def lie_bracket(frame, u, v, points, step=DEFAULT_STEP):
    """Frame components of the vector-field bracket [u, v] of two 1-vector fields.

    The bracket is taken between the vector fields g-dual to u and v, using
    their contravariant coordinate components.
    """
    def coord(field):
        def f(q):
            return np.einsum("...a,...am->...m", vector_components(field, q), frame.h_inv(q))
        return f

    p = np.asarray(points, dtype=float)
    check_stencil(frame.chart, p, step)
    U, V = coord(u)(p), coord(v)(p)
    dU, dV = central_difference(coord(u), p, step), central_difference(coord(v), p, step)
    br = np.einsum("...n,...mn->...m", U, dV) - np.einsum("...n,...mn->...m", V, dU)
    return np.einsum("...am,...m->...a", frame.h(p), br)


def directional_covd(conn, frame, u, A, points, step=DEFAULT_STEP):
    """(u·𝝏)A = Σ_a (u·θ^a) ∇_{e_a}A."""
    ua = vector_components(u, points)
    D = covd_all(conn, frame, A, points, step)
    return Multivector(np.einsum("...a,...ai->...i", ua, D))


def torsion_operator(conn, frame, u, v, points, step=DEFAULT_STEP) -> Multivector:
    """𝛕(u∧v) = (u·𝝏)v - (v·𝝏)u - [u, v]."""
    _require_vector(u(points), "u")
    _require_vector(v(points), "v")
    br = Multivector.vector(frame_to_form(lie_bracket(frame, u, v, points, step)))
    return directional_covd(conn, frame, u, v, points, step) - directional_covd(conn, frame, v, u, points, step) - br


def torsion_components(conn, frame, points, step=DEFAULT_STEP):
    """T^c_{ab} = Γ^c_{ab} - Γ^c_{ba} - c^c_{ab}."""
    g = conn.gamma(points)
    return g - np.swapaxes(g, -1, -2) - structure_coefficients(frame, points, step)


def torsion_covector(T, frame=None, points=None) -> Multivector:
    """T = T^b_{ab} θ^a."""
    return Multivector.vector(np.einsum("...bab->...a", np.asarray(T)))


# curvature ---------------------------------------------------------------------------

def curvature_biform(conn, frame, u, v, points, step=DEFAULT_STEP) -> Multivector:
    """ℜ(u∧v) = u·𝝏 ω_v - v·𝝏 ω_u - ½[ω_u, ω_v] - ω_{[u,v]}."""
    p = np.asarray(points, dtype=float)
    _require_vector(u(p), "u")
    _require_vector(v(p), "v")

    def omega_along(field):
        return MultivectorField(
            lambda q: Multivector(np.einsum("...a,...ai->...i", vector_components(field, q), conn.bivectors(q).coeffs))
        )

    wu, wv = omega_along(u), omega_along(v)
    br = lie_bracket(frame, u, v, p, step)
    w_br = np.einsum("...a,...ai->...i", br, conn.bivectors(p).coeffs)
    au, av = wu(p).coeffs, wv(p).coeffs
    out = (directional_covd(conn, frame, u, wv, p, step).coeffs
           - directional_covd(conn, frame, v, wu, p, step).coeffs
           - 0.5 * (_gp_coeffs(au, av) - _gp_coeffs(av, au))
           - w_br)
    return Multivector(out)


def riemann_components(conn, frame, points, step=DEFAULT_STEP):
    """R^d_{cab} = e_a(Γ^d_{bc}) - e_b(Γ^d_{ac}) + Γ^d_{ak}Γ^k_{bc} - Γ^d_{bk}Γ^k_{ac} - c^k_{ab}Γ^d_{kc}."""
    p = np.asarray(points, dtype=float)
    g = conn.gamma(p)
    dg = frame_derivative(conn.gamma, frame, p, step)  # [d, b, c, a] = e_a(Γ^d_bc)
    c = structure_coefficients(frame, p, step)
    return (np.einsum("...dbca->...dcab", dg) - np.einsum("...dacb->...dcab", dg)
            + np.einsum("...dak,...kbc->...dcab", g, g) - np.einsum("...dbk,...kac->...dcab", g, g)
            - np.einsum("...kab,...dkc->...dcab", c, g))


def curvature_bivectors(R):
    """ℜ_{ab} = ½ R^{de}_{ab} θ_d θ_e for all (a, b): Multivector batch (..., 4, 4)."""
    R = np.asarray(R)
    raised = R * ETA[None, :, None, None]  # R^{de}_{ab}
    return bivector_from_components(np.moveaxis(raised, (-4, -3), (-2, -1)))


def commutator_identity_parts(conn, frame, t, points, step=DEFAULT_STEP):
    """Both sides of [∇_a, ∇_b]t = ℜ(θ_a∧θ_b)⌞t - (T^c_ab - Γ^c_ab + Γ^c_ba)∇_c t.

    Returns (lhs, rhs) coefficient arrays of shape (..., 4, 4, 16) indexed [a, b].
    The left side is a nested finite-difference commutator.
    """
    p = np.asarray(points, dtype=float)
    D2 = covd_all(conn, frame, covd_field(conn, frame, t, step), p, step)  # [b, a] = ∇_a ∇_b t
    lhs = np.swapaxes(D2, -3, -2) - D2
    D1 = covd_all(conn, frame, t, p, step)
    g = conn.gamma(p)
    T = torsion_components(conn, frame, p, step)
    K = T - g + np.swapaxes(g, -1, -2)  # [c, a, b]
    Rb = curvature_bivectors(riemann_components(conn, frame, p, step))
    tv = t(p).coeffs
    bracket = right_contraction(Rb, Multivector(tv[..., None, None, :])).coeffs
    rhs = bracket - np.einsum("...cab,...ci->...abi", K, D1)
    return lhs, rhs


def commutator_identity_residual(conn, frame, t, a, b, points, step=DEFAULT_STEP):
    lhs, rhs = commutator_identity_parts(conn, frame, t, points, step)
    return norm_max(lhs[..., a, b, :] - rhs[..., a, b, :])


def curvature_commutator_residual(conn, frame, t, points, step=DEFAULT_STEP):
    """max over (a, b) of |[∇_a,∇_b]t - ∇_{[e_a,e_b]}t - ½[ℜ(e_a∧e_b), t]|.

    ℜ comes from the literal biform expression on constant frame fields, so
    this is independent from the component route used above.
    """
    p = np.asarray(points, dtype=float)
    D2 = covd_all(conn, frame, covd_field(conn, frame, t, step), p, step)
    lhs = np.swapaxes(D2, -3, -2) - D2
    D1 = covd_all(conn, frame, t, p, step)
    c = structure_coefficients(frame, p, step)
    lhs = lhs - np.einsum("...kab,...ki->...abi", c, D1)
    tv = t(p).coeffs
    worst = 0.0
    for a in range(4):
        for b in range(a + 1, 4):
            Rab = curvature_biform(conn, frame, basis_field(a), basis_field(b), p, step).coeffs
            rhs = 0.5 * (_gp_coeffs(Rab, tv) - _gp_coeffs(tv, Rab))
            worst = max(worst, norm_max(lhs[..., a, b, :] - rhs))
    return worst


def basis_field(a):
    """The constant 1-vector field θ_a = η_aa θ^a, g-dual to e_a."""
    comps = np.zeros(4)
    comps[a] = ETA[a]
    return MultivectorField.constant(Multivector.vector(comps))


# Cartan forms -------------------------------------------------------------------------

def _wedge11(a, b):
    """(α ∧ β)_{μν} = α_μ β_ν - α_ν β_μ on the last axes."""
    return a[..., :, None] * b[..., None, :] - a[..., None, :] * b[..., :, None]


def _d1(form_fn, points, step):
    """(dα)_{μν} = ∂_μ α_ν - ∂_ν α_μ; form_fn returns (..., *v, 4)."""
    d = central_difference(form_fn, points, step)  # [..., ν, μ] = ∂_μ α_ν
    return np.swapaxes(d, -1, -2) - d


def _cyclic(x):
    """x_{λμν} + x_{μνλ} + x_{νλμ} on the last three axes."""
    return x + np.einsum("...lmn->...mnl", x) + np.einsum("...lmn->...nlm", x)


def coframe_forms(frame, points):
    """θ^a_μ = h^a_μ."""
    return frame.h(points)


def connection_forms(conn, frame, points):
    """(ω^a_b)_μ = h^c_μ Γ^a_{cb}, indexed [a, b, μ]."""
    return np.einsum("...cm,...acb->...abm", frame.h(points), conn.gamma(points))


def cartan_torsion_forms(conn, frame, points, step=DEFAULT_STEP):
    """Θ^a_{μν} = (dθ^a + ω^a_b ∧ θ^b)_{μν} for all a, shape (..., 4, 4, 4)."""
    p = np.asarray(points, dtype=float)
    check_stencil(frame.chart, p, step)
    w = connection_forms(conn, frame, p)
    th = coframe_forms(frame, p)
    return _d1(frame.h, p, step) + np.einsum("...abmn->...amn", _wedge11(w, th[..., None, :, :]))


def cartan_torsion_2form(conn, frame, a, points, step=DEFAULT_STEP):
    return cartan_torsion_forms(conn, frame, points, step)[..., a, :, :]


def cartan_curvature_forms(conn, frame, points, step=DEFAULT_STEP):
    """Ω^a_b = dω^a_b + ω^a_c ∧ ω^c_b, shape (..., 4, 4, 4, 4) indexed [a, b, μ, ν]."""
    p = np.asarray(points, dtype=float)
    check_stencil(frame.chart, p, step)
    w = connection_forms(conn, frame, p)
    dw = _d1(lambda q: connection_forms(conn, frame, q), p, step)
    ww = np.einsum("...acm,...cbn->...abmn", w, w) - np.einsum("...acn,...cbm->...abmn", w, w)
    return dw + ww


def cartan_curvature_2form(conn, frame, a, b, points, step=DEFAULT_STEP):
    return cartan_curvature_forms(conn, frame, points, step)[..., a, b, :, :]


def forms_on_frame(forms, frame, points):
    """Evaluate 2-forms on frame pairs: X(e_c, e_d) = h_c^μ h_d^ν X_{μν}."""
    hi = frame.h_inv(points)
    nv = np.ndim(forms) - np.ndim(points) - 1
    hi = hi.reshape(hi.shape[:-2] + (1,) * nv + (4, 4))
    return np.einsum("...cm,...dn,...mn->...cd", hi, hi, forms)


def bianchi_residuals(conn, frame, points, step=DEFAULT_STEP):
    """(first, second) Bianchi residual max-norms.

    first:  dΘ^a + ω^a_b ∧ Θ^b - Ω^a_b ∧ θ^b
    second: cyclic sum of ∂_ρΩ_{μν} + [ω_ρ, Ω_{μν}] (matrix commutator in a, b)
    """
    p = np.asarray(points, dtype=float)
    check_stencil(frame.chart, p, step)
    w = connection_forms(conn, frame, p)  # [a, b, ρ]
    th = coframe_forms(frame, p)  # [a, ρ]
    Th = cartan_torsion_forms(conn, frame, p, step)  # [a, μ, ν]
    Om = cartan_curvature_forms(conn, frame, p, step)  # [a, b, μ, ν]

    dTh = central_difference(lambda q: cartan_torsion_forms(conn, frame, q, step), p, step)  # [a, μ, ν, λ]
    dTh = _cyclic(np.einsum("...amnl->...almn", dTh))
    wTh = _cyclic(np.einsum("...abl,...bmn->...almn", w, Th))
    Omth = _cyclic(np.einsum("...bl,...abmn->...almn", th, Om))
    first = norm_max(dTh + wTh - Omth)

    dOm = central_difference(lambda q: cartan_curvature_forms(conn, frame, q, step), p, step)
    dOm = np.einsum("...abmnl->...ablmn", dOm)  # ∂_λ Ω_{μν}
    comm = np.einsum("...acl,...cbmn->...ablmn", w, Om) - np.einsum("...acmn,...cbl->...ablmn", Om, w)
    second = norm_max(_cyclic(dOm + comm))
    return first, second


def metric_compatibility_residual(conn, frame=None, points=None, step=DEFAULT_STEP):
    """max |ω_a^{bc} + ω_a^{cb}|, the orthonormal-frame form of ∇g = 0."""
    om = conn(points)
    return float(np.max(np.abs(om + np.swapaxes(om, -1, -2))))


# exterior derivative and codifferential in coordinates ---------------------------------

def coordinate_blades(frame, points):
    """Matrix whose column J holds the θ-blade coefficients of dx^J, shape (..., 16, 16)."""
    hi = frame.h_inv(points)  # dx^μ = h_a^μ θ^a
    dx = [Multivector.vector(hi[..., :, mu]) for mu in range(4)]
    cols = []
    for mask in range(NBLADES):
        blade = Multivector.scalar(np.ones(hi.shape[:-2]))
        for mu in range(4):
            if mask >> mu & 1:
                blade = exterior_product(blade, dx[mu])
        cols.append(blade.coeffs)
    return np.stack(cols, axis=-1)


def exterior_derivative(A, frame, points, step=DEFAULT_STEP) -> Multivector:
    """dA from coordinate components: d(A_J dx^J) = ∂_ρ A_J dx^ρ ∧ dx^J."""
    p = np.asarray(points, dtype=float)
    check_stencil(frame.chart, p, step)

    def coord_comps(q):
        return np.linalg.solve(coordinate_blades(frame, q), A(q).coeffs[..., None])[..., 0]

    M = coordinate_blades(frame, p)
    dA = central_difference(coord_comps, p, step)  # [J, ρ]
    hi = frame.h_inv(p)
    out = Multivector.zero(p.shape[:-1])
    for rho in range(4):
        form = Multivector(np.einsum("...iJ,...J->...i", M, dA[..., rho]))
        out = out + exterior_product(Multivector.vector(hi[..., :, rho]), form)
    return out


def codifferential(A, frame, points, step=DEFAULT_STEP) -> Multivector:
    """δA_p = (-1)^p ⋆⁻¹ d ⋆ A_p, summed over grades."""
    out = None
    for k in range(5):
        part = MultivectorField(lambda q, k=k: hodge_star(Multivector(np.where(GRADES == k, A(q).coeffs, 0.0))))
        term = (-1) ** k * inverse_hodge_star(exterior_derivative(part, frame, points, step))
        out = term if out is None else out + term
    return out
