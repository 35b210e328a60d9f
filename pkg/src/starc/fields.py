"""Charts, fields over a chart, tetrads and frame derivatives.

Fields are vectorized callables.  A point array has shape ``(..., 4)``;
a ScalarField returns ``(...)``; a MultivectorField returns a Multivector
batch of shape ``(...)``.  Derivatives are second-order central differences
whose derivative axis is appended last, so stencils nest: differentiating a
function that itself differentiates simply adds axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import DomainError, SingularTetrad
from .expr import Node, differentiate, evaluate, parse_expression, to_string
from .sta import BIVECTOR_PAIRS, ETA_MATRIX, NBLADES, PSEUDOSCALAR, THETA5, Multivector

DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class Chart:
    """Coordinate patch: names, closed box domain and sampling policy."""

    coord_names: tuple = ("t", "x", "y", "z")
    domain: tuple = ((-1.0, 1.0),) * 4
    samples: int = 64
    seed: int = 0

    def __post_init__(self):
        names = tuple(self.coord_names)
        dom = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        if len(names) != 4 or len(set(names)) != 4:
            raise ValueError("a chart needs 4 distinct coordinate names")
        if len(dom) != 4 or any(not lo < hi for lo, hi in dom):
            raise ValueError("each coordinate interval must satisfy lo < hi")
        if int(self.samples) < 1:
            raise ValueError("sample count must be at least 1")
        object.__setattr__(self, "coord_names", names)
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "samples", int(self.samples))

    @property
    def lower(self):
        return np.array([lo for lo, _ in self.domain])

    @property
    def upper(self):
        return np.array([hi for _, hi in self.domain])

    def contains(self, points, margin=0.0):
        pts = np.asarray(points, dtype=float)
        return bool(np.all(pts >= self.lower + margin) and np.all(pts <= self.upper - margin))

    def sample_points(self, step=DEFAULT_STEP, n=None, seed=None, margin_steps=5):
        """Scrambled Halton points in the interior, ``margin_steps*step`` from the boundary."""
        n = self.samples if n is None else int(n)
        seed = self.seed if seed is None else seed
        margin = margin_steps * step
        lo, hi = self.lower + margin, self.upper - margin
        if np.any(lo >= hi):
            raise DomainError("finite-difference margin leaves no interior to sample")
        unit = qmc.Halton(d=4, scramble=True, seed=seed).random(n)
        return lo + unit * (hi - lo)


def check_stencil(chart, points, step):
    if chart is not None and not chart.contains(points, margin=step * (1 - 1e-9)):
        raise DomainError("finite-difference stencil leaves the chart domain")


def central_difference(fn, points, step=DEFAULT_STEP):
    """d fn / d x^mu at ``points``, with the mu axis appended last.

    ``fn`` maps (..., 4) points to arrays (..., *vshape); the result has shape
    (..., *vshape, 4).
    """
    p = np.asarray(points, dtype=float)
    nb = p.ndim - 1
    offsets = np.zeros((2, 4, 4))
    offsets[0] = step * np.eye(4)
    offsets[1] = -step * np.eye(4)
    vals = np.asarray(fn(p[..., None, None, :] + offsets))
    lead = (slice(None),) * nb
    d = (vals[lead + (0,)] - vals[lead + (1,)]) / (2.0 * step)
    return np.moveaxis(d, nb, -1)


class ScalarField:
    """Real function on a chart, optionally backed by an expression tree."""

    def __init__(self, func: Callable, ast: Node | None = None, coord_names=("t", "x", "y", "z"), params=None):
        self._func = func
        self.ast = ast
        self.coord_names = tuple(coord_names)
        self.params = dict(params or {})

    @classmethod
    def from_expression(cls, text, coord_names=("t", "x", "y", "z"), params: Mapping[str, float] | None = None):
        params = dict(params or {})
        names = tuple(coord_names)
        ast = parse_expression(text, names=names + tuple(params)) if isinstance(text, str) else text

        def func(points):
            pts = np.asarray(points, dtype=float)
            env = {n: pts[..., i] for i, n in enumerate(names)}
            env.update(params)
            return np.broadcast_to(evaluate(ast, env), pts.shape[:-1])

        return cls(func, ast, names, params)

    @classmethod
    def constant(cls, value):
        value = float(value)
        return cls(lambda points: np.full(np.shape(points)[:-1], value))

    def __call__(self, points):
        return self._func(points)

    def derivative(self, mu):
        """Exact partial derivative along coordinate ``mu`` (needs an expression)."""
        if self.ast is None:
            raise TypeError("analytic derivative needs an expression-backed field")
        d = differentiate(self.ast, self.coord_names[mu])
        return ScalarField.from_expression(d, self.coord_names, self.params)

    def __repr__(self):
        if self.ast is not None:
            return f"ScalarField({to_string(self.ast)!r})"
        return "ScalarField(<callable>)"


def evaluate_field(f, p):
    """Value of a scalar field at a point (or batch); DomainError if non-finite."""
    out = np.asarray(f(np.asarray(p, dtype=float)), dtype=float)
    if not np.all(np.isfinite(out)):
        raise DomainError("field is not finite at the requested point")
    return float(out) if out.ndim == 0 else out


def _stack_scalars(fields, points):
    return np.stack([np.asarray(f(points), dtype=float) for f in fields], axis=-1)


class MultivectorField:
    """Multivector-valued function on a chart."""

    def __init__(self, func: Callable):
        self._func = func

    def __call__(self, points) -> Multivector:
        out = self._func(np.asarray(points, dtype=float))
        return out if isinstance(out, Multivector) else Multivector(out)

    @classmethod
    def constant(cls, mv):
        c = Multivector(mv.coeffs if isinstance(mv, Multivector) else mv).coeffs
        return cls(lambda p: Multivector(np.broadcast_to(c, np.shape(p)[:-1] + (NBLADES,))))

    @classmethod
    def from_blades(cls, comps: Mapping[int, ScalarField]):
        """Field sum_mask comps[mask] * blade(mask)."""
        items = list(comps.items())

        def func(p):
            c = np.zeros(p.shape[:-1] + (NBLADES,))
            for mask, f in items:
                c[..., mask] = f(p)
            return Multivector(c)

        return cls(func)

    @classmethod
    def from_scalars(cls, fields: Sequence[ScalarField]):
        if len(fields) != NBLADES:
            raise ValueError("need 16 scalar fields")
        return cls.from_blades(dict(enumerate(fields)))

    @classmethod
    def vector(cls, fields: Sequence[ScalarField]):
        return cls.from_blades({1 << k: f for k, f in enumerate(fields)})

    @classmethod
    def bivector(cls, fields: Sequence[ScalarField]):
        return cls.from_blades({(1 << a) | (1 << b): f for (a, b), f in zip(BIVECTOR_PAIRS, fields)})

    @classmethod
    def even(cls, fields: Sequence[ScalarField]):
        masks = [0] + [(1 << a) | (1 << b) for a, b in BIVECTOR_PAIRS] + [PSEUDOSCALAR]
        return cls.from_blades(dict(zip(masks, fields)))

    def __add__(self, other):
        return MultivectorField(lambda p: self(p) + other(p))

    def __sub__(self, other):
        return MultivectorField(lambda p: self(p) - other(p))

    def __mul__(self, other):
        if isinstance(other, MultivectorField):
            return MultivectorField(lambda p: self(p) * other(p))
        return MultivectorField(lambda p: self(p) * other)

    def __rmul__(self, other):
        return MultivectorField(lambda p: other * self(p))

    def map(self, fn):
        return MultivectorField(lambda p: fn(self(p)))


@dataclass
class Coframe:
    """Orthonormal coframe θ^a = h^a_mu dx^mu.

    ``h`` maps points to (..., 4, 4) arrays indexed [a, mu]; ``h_inv`` to the
    inverse tetrad indexed [a, mu] = h_a^mu (components of e_a).  When no
    inverse is supplied it is obtained by numerical matrix inversion.
    """

    h: Callable
    h_inv_func: Callable | None = None
    chart: Chart | None = None
    exprs: tuple | None = field(default=None, repr=False)

    def h_inv(self, points):
        if self.h_inv_func is not None:
            return self.h_inv_func(points)
        # h^a_mu h_b^mu = delta^a_b means h_inv = (h^{-1})^T
        return np.swapaxes(np.linalg.inv(self.h(points)), -1, -2)

    @classmethod
    def identity(cls, chart=None):
        def h(p):
            return np.broadcast_to(np.eye(4), np.shape(p)[:-1] + (4, 4))

        return cls(h, h, chart)

    @classmethod
    def from_expressions(cls, exprs, chart: Chart | None = None, params=None):
        chart = chart or Chart()
        if len(exprs) != 4 or any(len(row) != 4 for row in exprs):
            raise ValueError("coframe needs a 4x4 array of expressions")
        fields = [[ScalarField.from_expression(e, chart.coord_names, params) for e in row] for row in exprs]

        def h(p):
            p = np.asarray(p, dtype=float)
            return np.stack([np.stack([f(p) for f in row], axis=-1) for row in fields], axis=-2)

        return cls(h, None, chart, tuple(tuple(r) for r in fields))

    @classmethod
    def from_callable(cls, func, chart=None, inverse=None):
        return cls(func, inverse, chart)

    def metric(self, points):
        hm = self.h(points)
        return np.einsum("...am,ab,...bn->...mn", hm, ETA_MATRIX, hm)

    def duality_residual(self, points):
        prod = np.einsum("...am,...bm->...ab", self.h(points), self.h_inv(points))
        return float(np.max(np.abs(prod - np.eye(4))))

    def frame_metric_residual(self, points):
        hi = self.h_inv(points)
        g = np.einsum("...am,...mn,...bn->...ab", hi, self.metric(points), hi)
        return float(np.max(np.abs(g - ETA_MATRIX)))


def frame_derivative(fn, frame: Coframe, points, step=DEFAULT_STEP):
    """Pfaff derivatives e_a(fn) for every frame index, a-axis appended last."""
    p = np.asarray(points, dtype=float)
    check_stencil(frame.chart, p, step)
    d = central_difference(fn, p, step)
    hi = frame.h_inv(p)
    nv = d.ndim - p.ndim
    hi = hi.reshape(hi.shape[:-2] + (1,) * nv + (4, 4))
    return np.einsum("...m,...am->...a", d, hi)


def pfaff_all(A, frame, points, step=DEFAULT_STEP):
    """Coefficients of ∂_{e_a}A for a = 0..3, shape (..., 4, 16)."""
    d = frame_derivative(lambda q: A(q).coeffs, frame, points, step)
    return np.moveaxis(d, -1, -2)


def pfaff_derivative(A, frame, a, points, step=DEFAULT_STEP) -> Multivector:
    """∂_{e_a}A: frame derivative of the θ-blade components of A."""
    return Multivector(pfaff_all(A, frame, points, step)[..., a, :])


def frame_vector_apply(frame, a, f, points, step=DEFAULT_STEP):
    """e_a(f) = h_a^mu ∂_mu f."""
    out = frame_derivative(f, frame, points, step)[..., a]
    return float(out) if np.ndim(out) == 0 else out


def structure_coefficients(frame, points, step=DEFAULT_STEP):
    """c[c, a, b] = c^c_ab with [e_a, e_b] = c^c_ab e_c.

    Computed as h^c_nu (e_a(h_b^nu) - e_b(h_a^nu)), i.e. the commutator of the
    frame derivations applied to the coordinate functions.
    """
    p = np.asarray(points, dtype=float)
    d = frame_derivative(frame.h_inv, frame, p, step)  # [b, nu, a] = e_a(h_b^nu)
    hm = frame.h(p)
    return np.einsum("...cn,...bna->...cab", hm, d) - np.einsum("...cn,...anb->...cab", hm, d)


def volume_element(frame=None, points=None) -> Multivector:
    """τ_g = θ^0θ^1θ^2θ^3 (a constant of the algebra in the frame basis)."""
    return THETA5


def tetrad_determinant(frame, points):
    det = np.linalg.det(frame.h(np.asarray(points, dtype=float)))
    if np.any(np.abs(det) < 1e-14):
        raise SingularTetrad("tetrad determinant vanishes")
    return float(det) if np.ndim(det) == 0 else det
