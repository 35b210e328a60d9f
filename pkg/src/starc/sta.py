"""Arithmetic kernel for the spacetime algebra Cl(1,3).

A multivector is stored as 16 real coefficients indexed by blade bitmask:
bit ``k`` set means the blade contains the generator theta^k, and every blade
is written in ascending index order.  The metric is eta = diag(1, -1, -1, -1).

Coefficient arrays may carry leading batch axes, shape ``(..., 16)``, so that
one ``Multivector`` can hold a field sampled at many points.  All operations
broadcast over those axes.

Only the geometric product touches the Cayley table.  Every other product is
assembled from it by grade projection, so identities between products are
consequences that the test suite can check rather than assumptions.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np

from .errors import NotABivector, NotARotor

ETA = np.array([1.0, -1.0, -1.0, -1.0])
ETA_MATRIX = np.diag(ETA)
NBLADES = 16

GRADES = np.array([bin(i).count("1") for i in range(NBLADES)])
# blades listed grade by grade, then by bitmask
BLADES_BY_GRADE = tuple(tuple(int(i) for i in np.flatnonzero(GRADES == k)) for k in range(5))
EVEN_MASK = GRADES % 2 == 0
ODD_MASK = ~EVEN_MASK

# bitmask of the bivector theta^a theta^b for a < b
BIVECTOR_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PSEUDOSCALAR = 0b1111


def blade_name(mask):
    if mask == 0:
        return "1"
    return "θ" + "".join(str(k) for k in range(4) if mask >> k & 1)


def _blade_sign(a, b):
    """Sign of the product of canonical blades ``a`` and ``b``.

    Moving each generator of ``b`` leftwards past the larger generators of
    ``a`` costs one transposition each; repeated generators then square to
    their metric signature.
    """
    swaps = 0
    for j in range(4):
        if b >> j & 1:
            swaps += bin(a >> (j + 1)).count("1")
    sign = -1.0 if swaps % 2 else 1.0
    for k in range(4):
        if (a & b) >> k & 1:
            sign *= ETA[k]
    return sign


def _build_tables():
    sign = np.empty((NBLADES, NBLADES))
    for i in range(NBLADES):
        for j in range(NBLADES):
            sign[i, j] = _blade_sign(i, j)
    idx = np.arange(NBLADES)
    xor = idx[:, None] ^ idx[None, :]
    # sign2[i, k] is the sign of blade_i * blade_(i^k), which lands on blade_k
    sign2 = sign[idx[:, None], xor]
    return sign, xor, sign2


CAYLEY_SIGN, _XOR, _SIGN2 = _build_tables()
for _t in (CAYLEY_SIGN, _XOR, _SIGN2, GRADES, ETA, ETA_MATRIX):
    _t.flags.writeable = False

_REVERSION_SIGN = np.array([(-1.0) ** (k * (k - 1) // 2) for k in GRADES])
_INVOLUTION_SIGN = np.array([(-1.0) ** k for k in GRADES])


def _as_coeffs(x):
    if isinstance(x, Multivector):
        return x.coeffs
    if isinstance(x, Rotor):
        return x.value.coeffs
    arr = np.asarray(x, dtype=float)
    out = np.zeros(arr.shape + (NBLADES,))
    out[..., 0] = arr
    return out


def _scalar_like(x):
    return isinstance(x, Number) or (isinstance(x, np.ndarray) and x.dtype != object)


class Multivector:
    """Immutable element (or batch of elements) of Cl(1,3)."""

    __slots__ = ("coeffs",)
    __array_priority__ = 1000

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.ndim == 0 or c.shape[-1] != NBLADES:
            raise ValueError(f"coefficient array must end in an axis of 16, got {c.shape}")
        c.flags.writeable = False
        self.coeffs = c

    # constructors
    @classmethod
    def zero(cls, shape=()):
        return cls(np.zeros(tuple(shape) + (NBLADES,)))

    @classmethod
    def scalar(cls, value):
        return cls(_as_coeffs(value))

    @classmethod
    def blade(cls, mask, value=1.0):
        v = np.asarray(value, dtype=float)
        c = np.zeros(v.shape + (NBLADES,))
        c[..., mask] = v
        return cls(c)

    @classmethod
    def vector(cls, comps):
        """1-vector sum_a comps[a] theta^a; ``comps`` has shape (..., 4)."""
        comps = np.asarray(comps, dtype=float)
        c = np.zeros(comps.shape[:-1] + (NBLADES,))
        for k in range(4):
            c[..., 1 << k] = comps[..., k]
        return cls(c)

    @classmethod
    def bivector(cls, comps):
        """Bivector sum over a<b of comps[pair] theta^a theta^b, pairs 01,02,03,12,13,23."""
        comps = np.asarray(comps, dtype=float)
        c = np.zeros(comps.shape[:-1] + (NBLADES,))
        for n, (a, b) in enumerate(BIVECTOR_PAIRS):
            c[..., (1 << a) | (1 << b)] = comps[..., n]
        return cls(c)

    @classmethod
    def even(cls, comps):
        """Even element from 8 components ordered 1, 01, 02, 03, 12, 13, 23, 0123."""
        comps = np.asarray(comps, dtype=float)
        c = np.zeros(comps.shape[:-1] + (NBLADES,))
        c[..., 0] = comps[..., 0]
        for n, (a, b) in enumerate(BIVECTOR_PAIRS):
            c[..., (1 << a) | (1 << b)] = comps[..., n + 1]
        c[..., PSEUDOSCALAR] = comps[..., 7]
        return cls(c)

    # inspection
    @property
    def shape(self):
        return self.coeffs.shape[:-1]

    def __getitem__(self, index):
        # indexes batch axes only; the blade axis always survives
        if not isinstance(index, tuple):
            index = (index,)
        if any(i is Ellipsis for i in index):
            raise IndexError("Ellipsis is not supported when indexing a Multivector batch")
        return Multivector(self.coeffs[index])

    def component(self, mask):
        return self.coeffs[..., mask]

    def vector_part(self):
        """Coefficients of theta^0..theta^3, shape (..., 4)."""
        return self.coeffs[..., [1, 2, 4, 8]]

    def bivector_part(self):
        return self.coeffs[..., [(1 << a) | (1 << b) for a, b in BIVECTOR_PAIRS]]

    def even_part(self):
        return self.coeffs[..., [0, 3, 5, 9, 6, 10, 12, 15]]

    def grade(self, k):
        return grade_project(self, k)

    def reverse(self):
        return reversion(self)

    def __repr__(self):
        if self.coeffs.ndim > 1:
            return f"Multivector(batch shape {self.shape})"
        terms = [f"{c:.6g}*{blade_name(m)}" for m, c in enumerate(self.coeffs) if c != 0.0]
        return "Multivector(" + (" + ".join(terms) if terms else "0") + ")"

    # arithmetic
    def __add__(self, other):
        if isinstance(other, (Multivector, Rotor)) or _scalar_like(other):
            return Multivector(self.coeffs + _as_coeffs(other))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (Multivector, Rotor)) or _scalar_like(other):
            return Multivector(self.coeffs - _as_coeffs(other))
        return NotImplemented

    def __rsub__(self, other):
        if _scalar_like(other):
            return Multivector(_as_coeffs(other) - self.coeffs)
        return NotImplemented

    def __neg__(self):
        return Multivector(-self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, (Multivector, Rotor)):
            return geometric_product(self, other)
        if _scalar_like(other):
            return Multivector(self.coeffs * np.asarray(other, dtype=float)[..., None])
        return NotImplemented

    def __rmul__(self, other):
        if _scalar_like(other):
            return Multivector(self.coeffs * np.asarray(other, dtype=float)[..., None])
        return NotImplemented

    def __truediv__(self, other):
        if _scalar_like(other):
            return Multivector(self.coeffs / np.asarray(other, dtype=float)[..., None])
        return NotImplemented

    def __xor__(self, other):
        return exterior_product(self, other)

    def __rxor__(self, other):
        return exterior_product(other, self)


ONE = Multivector.blade(0)
THETA = tuple(Multivector.blade(1 << k) for k in range(4))
THETA_LOWER = tuple(ETA[k] * THETA[k] for k in range(4))
THETA5 = Multivector.blade(PSEUDOSCALAR)


def _mv(x):
    if isinstance(x, Multivector):
        return x
    if isinstance(x, Rotor):
        return x.value
    return Multivector(_as_coeffs(x))


def _gp_coeffs(a, b):
    return np.einsum("...i,...ik,ik->...k", a, b[..., _XOR], _SIGN2)


def geometric_product(a, b) -> Multivector:
    """Clifford product via the precomputed Cayley table."""
    return Multivector(_gp_coeffs(_as_coeffs(a), _as_coeffs(b)))


def grade_project(a, k) -> Multivector:
    c = _as_coeffs(a)
    if k not in range(5):
        return Multivector(np.zeros_like(c))
    return Multivector(np.where(GRADES == k, c, 0.0))


def _grade_parts(a):
    c = _as_coeffs(a)
    return [np.where(GRADES == k, c, 0.0) for k in range(5)]


def _graded_sum(a, b, target):
    """sum over r, s of <A_r B_s>_{target(r, s)} (target None skips the pair)."""
    pa, pb = _grade_parts(a), _grade_parts(b)
    shape = np.broadcast_shapes(pa[0].shape, pb[0].shape)
    out = np.zeros(shape)
    for r in range(5):
        if not pa[r].any():
            continue
        for s in range(5):
            t = target(r, s)
            if t is None or t not in range(5) or not pb[s].any():
                continue
            prod = _gp_coeffs(pa[r], pb[s])
            out += np.where(GRADES == t, prod, 0.0)
    return Multivector(out)


def exterior_product(a, b) -> Multivector:
    """A_r ^ B_s = <A_r B_s>_{r+s}, extended bilinearly."""
    return _graded_sum(a, b, lambda r, s: r + s)


def left_contraction(a, b) -> Multivector:
    """A_r ⌟ B_s = <A_r B_s>_{s-r} for r <= s, zero otherwise."""
    return _graded_sum(a, b, lambda r, s: s - r if r <= s else None)


def right_contraction(a, b) -> Multivector:
    """A_r ⌞ B_s = <A_r B_s>_{r-s} for r >= s, zero otherwise."""
    return _graded_sum(a, b, lambda r, s: r - s if r >= s else None)


def _real(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def scalar_product(a, b):
    """A·B = sum_k <reversion(A_k) B_k>_0.

    Cross-grade pairs have no scalar part, so this equals <reversion(A) B>_0.
    Returns a float for single multivectors and an array for batches.
    """
    return _real(_gp_coeffs(reversion(a).coeffs, _as_coeffs(b))[..., 0])


def reversion(a) -> Multivector:
    return Multivector(_as_coeffs(a) * _REVERSION_SIGN)


def grade_involution(a) -> Multivector:
    return Multivector(_as_coeffs(a) * _INVOLUTION_SIGN)


def commutator(a, b) -> Multivector:
    ca, cb = _as_coeffs(a), _as_coeffs(b)
    return Multivector(_gp_coeffs(ca, cb) - _gp_coeffs(cb, ca))


def hodge_star(a) -> Multivector:
    """⋆A = reversion(A) θ^5, applied grade by grade (the map is linear)."""
    return geometric_product(reversion(a), THETA5)


def inverse_hodge_star(a) -> Multivector:
    # reversion(X) θ5 = B  gives  X = reversion(-B θ5) since θ5² = -1
    return reversion(-geometric_product(a, THETA5))


def norm_max(a):
    """Largest absolute coefficient, taken over blades and batch axes."""
    c = _as_coeffs(a)
    return float(np.max(np.abs(c))) if c.size else 0.0


def norm_euclid(a):
    """Euclidean norm of the coefficient vector, per batch element."""
    return _real(np.sqrt(np.sum(_as_coeffs(a) ** 2, axis=-1)))


def is_even(a, tol=1e-14):
    return bool(np.all(np.abs(_as_coeffs(a)[..., ODD_MASK]) <= tol))


@dataclass(frozen=True)
class Rotor:
    """Even unit multivector U with U reversion(U) = 1.

    The normalization tolerance is relative to |U|², because a boost with a
    large rapidity has large coefficients whose squares cancel.
    """

    value: Multivector

    def __post_init__(self):
        object.__setattr__(self, "value", _mv(self.value))
        check_rotor(self.value)

    @property
    def shape(self):
        return self.value.shape

    @property
    def coeffs(self):
        return self.value.coeffs

    def reverse(self) -> Multivector:
        return reversion(self.value)

    inverse = reverse

    def __mul__(self, other):
        return geometric_product(self.value, other)

    def __rmul__(self, other):
        return geometric_product(other, self.value)


def check_rotor(u, tol=1e-12):
    c = _as_coeffs(u)
    scale = np.maximum(1.0, np.sum(c**2, axis=-1))
    odd = np.max(np.abs(c[..., ODD_MASK]), axis=-1) if c.size else 0.0
    if np.any(odd > tol * np.sqrt(scale)):
        raise NotARotor(f"rotor has odd-grade part of size {np.max(odd):.3g}")
    unit = _gp_coeffs(c, c * _REVERSION_SIGN)
    unit[..., 0] -= 1.0
    err = np.max(np.abs(unit), axis=-1)
    if np.any(err > tol * scale):
        raise NotARotor(f"U reversion(U) deviates from 1 by {np.max(err):.3g}")


def exp_bivector(F, max_terms=64, tol=1e-12) -> Rotor:
    """exp F for a bivector F by plain power series.

    Summation stops once every term has max-norm below 1e-16, or after
    ``max_terms`` terms.  Where F² is a scalar the result is compared with
    the closed form built from cos/sin or cosh/sinh.
    """
    f = _as_coeffs(F)
    if np.any(np.abs(f[..., GRADES != 2]) > tol):
        raise NotABivector("exp_bivector needs a pure grade-2 argument")
    f = np.where(GRADES == 2, f, 0.0)
    term = np.zeros_like(f)
    term[..., 0] = 1.0
    total = term.copy()
    for n in range(1, max_terms):
        term = _gp_coeffs(term, f) / n
        total += term
        if np.max(np.abs(term)) < 1e-16:
            break
    _closed_form_check(f, total)
    return Rotor(Multivector(total))


def _closed_form_check(f, total):
    sq = _gp_coeffs(f, f)
    s = sq[..., 0]
    rest = np.max(np.abs(sq[..., 1:]), axis=-1)
    simple = rest <= 1e-12 * (1.0 + np.abs(s))
    if not np.any(simple):
        return
    root = np.sqrt(np.abs(s))
    with np.errstate(divide="ignore", invalid="ignore"):
        even = np.where(s < 0, np.cos(root), np.cosh(root))
        odd = np.where(root > 0, np.where(s < 0, np.sin(root), np.sinh(root)) / root, 1.0)
    closed = f * odd[..., None]
    closed[..., 0] += even
    diff = np.max(np.abs(closed - total), axis=-1)
    scale = 1.0 + np.max(np.abs(total), axis=-1)
    if np.any(diff[simple] > 1e-10 * scale[simple]):
        raise ArithmeticError("rotor series disagrees with the closed form")


def sandwich(U, a) -> Multivector:
    """U a reversion(U)."""
    u = _as_coeffs(U)
    return Multivector(_gp_coeffs(_gp_coeffs(u, _as_coeffs(a)), u * _REVERSION_SIGN))


def lorentz_matrix(U):
    """Λ[..., m, n] = Λ^m_n with U θ^m Ũ = Λ^m_n θ^n, for a Multivector or Rotor U."""
    u = _as_coeffs(U)
    rows = [sandwich(Multivector(u), THETA[m]).vector_part() for m in range(4)]
    return np.stack(rows, axis=-2)
