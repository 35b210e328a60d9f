"""Randomized identity suite for the algebra kernel (``starc verify-algebra``).

Every identity is evaluated on a whole batch of random inputs at once; the
residual reported is the largest absolute coefficient error in the batch.
"""

from __future__ import annotations

import time

import numpy as np

from .report import CheckRecord, Report
from .sta import (
    ETA_MATRIX, GRADES, NBLADES, ONE, THETA, THETA5, Multivector, exterior_product, geometric_product,
    hodge_star, left_contraction, norm_max, reversion, right_contraction, scalar_product,
)

TOLERANCE = 1e-12


def _homogeneous(rng, n, k):
    c = rng.uniform(-1, 1, size=(n, NBLADES))
    return Multivector(np.where(GRADES == k, c, 0.0))


def _vectors(rng, n):
    return rng.uniform(-1, 1, size=(n, 4))


def _contraction_expansion(rng, n):
    """a⌟B_s and a∧B_s as half (anti)commutators, and aB_s = a⌟B_s + a∧B_s."""
    worst = 0.0
    for s in range(5):
        a = Multivector.vector(_vectors(rng, n))
        B = _homogeneous(rng, n, s)
        aB, Ba = a * B, B * a
        sign = (-1) ** s
        worst = max(worst, norm_max(left_contraction(a, B) - 0.5 * (aB - sign * Ba)))
        worst = max(worst, norm_max(exterior_product(a, B) - 0.5 * (aB + sign * Ba)))
        worst = max(worst, norm_max(aB - left_contraction(a, B) - exterior_product(a, B)))
    return worst


def _contraction_duality(rng, n):
    """A_r⌟B_s = (-1)^{r(s-1)} B_s⌞A_r."""
    worst = 0.0
    for r in range(5):
        for s in range(5):
            A, B = _homogeneous(rng, n, r), _homogeneous(rng, n, s)
            sign = (-1) ** (r * (s - 1))
            worst = max(worst, norm_max(left_contraction(A, B) - sign * right_contraction(B, A)))
    return worst


def _blade_of(vecs):
    out = Multivector.vector(vecs[0])
    for v in vecs[1:]:
        out = exterior_product(out, Multivector.vector(v))
    return out


def _scalar_product_gram(rng, n):
    """(a_1∧…∧a_r)·(b_1∧…∧b_r) = det[a_i·b_j] for simple blades."""
    worst = 0.0
    for r in range(1, 5):
        a = [_vectors(rng, n) for _ in range(r)]
        b = [_vectors(rng, n) for _ in range(r)]
        gram = np.stack([np.stack([np.einsum("ni,ij,nj->n", ai, ETA_MATRIX, bj) for bj in b], -1) for ai in a], -2)
        lhs = scalar_product(_blade_of(a), _blade_of(b))
        worst = max(worst, float(np.max(np.abs(lhs - np.linalg.det(gram)))))
    return worst


def _generators(rng, n):
    """θ^aθ^b + θ^bθ^a = 2η^{ab}, exactly on the basis and for random vectors."""
    worst = 0.0
    for a in range(4):
        for b in range(4):
            anti = THETA[a] * THETA[b] + THETA[b] * THETA[a]
            worst = max(worst, norm_max(anti - 2 * ETA_MATRIX[a, b] * ONE))
    u, v = _vectors(rng, n), _vectors(rng, n)
    U, V = Multivector.vector(u), Multivector.vector(v)
    dot = np.einsum("ni,ij,nj->n", u, ETA_MATRIX, v)
    worst = max(worst, norm_max(U * V + V * U - Multivector.scalar(2 * dot)))
    return worst


def _hodge_pairing(rng, n):
    """[B_k·A_k]θ⁵ = B_k∧⋆A_k, on all basis blade pairs and random homogeneous pairs."""
    worst = 0.0
    for k in range(5):
        masks = [m for m in range(NBLADES) if GRADES[m] == k]
        A = Multivector(np.eye(NBLADES)[masks][:, None, :])
        B = Multivector(np.eye(NBLADES)[masks][None, :, :])
        lhs = Multivector(scalar_product(B, A)[..., None] * THETA5.coeffs)
        worst = max(worst, norm_max(lhs - exterior_product(B, hodge_star(A))))
        A, B = _homogeneous(rng, n, k), _homogeneous(rng, n, k)
        lhs = Multivector(scalar_product(B, A)[..., None] * THETA5.coeffs)
        worst = max(worst, norm_max(lhs - exterior_product(B, hodge_star(A))))
    return worst


def _hodge_reversion(rng, n):
    """⋆A = Ãθ⁵ for general multivectors."""
    A = Multivector(rng.uniform(-1, 1, size=(n, NBLADES)))
    return norm_max(hodge_star(A) - geometric_product(reversion(A), THETA5))


def _idempotent(rng, n):
    """e = ½(1 + θ⁰) squares to itself."""
    e = 0.5 * (ONE + THETA[0])
    return norm_max(e * e - e)


SUITE = (
    ("contraction_expansion", _contraction_expansion),
    ("contraction_duality", _contraction_duality),
    ("scalar_product_gram", _scalar_product_gram),
    ("generator_relations", _generators),
    ("hodge_pairing", _hodge_pairing),
    ("hodge_reversion", _hodge_reversion),
    ("idempotent", _idempotent),
)


def verify_algebra(samples=10_000, seed=0, tolerance=TOLERANCE) -> Report:
    rng = np.random.default_rng(seed)
    report = Report({"name": "verify-algebra", "samples": int(samples), "seed": int(seed)})
    for name, fn in SUITE:
        start = time.perf_counter()
        try:
            res, err = float(fn(rng, samples)), None
        except Exception as exc:  # recorded, never fatal
            res, err = None, f"{type(exc).__name__}: {exc}"
        report.checks.append(CheckRecord(name, res, tolerance, int(samples), time.perf_counter() - start, error=err))
    return report
