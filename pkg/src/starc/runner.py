"""Check catalog and scenario orchestration."""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .dirac import (
    SpinorRepresentative, dhe_lagrangian_density, dhe_residual_lorentzian, dhe_residual_riemann_cartan,
    matrix_dirac_oracle, passive_gauge_check, spinor_commutator_parts,
)
from .fields import MultivectorField, tetrad_determinant
from .gauge import (
    curvature_gauge_covariance_residual, generalized_connection_residual, maxwell_gauge_experiment,
    maxwell_residual, torsion_generation_experiment,
)
from .geometry import (
    basis_field, bianchi_residuals, cartan_curvature_forms, cartan_torsion_forms, commutator_identity_parts,
    curvature_biform, forms_on_frame, metric_compatibility_residual, riemann_components, torsion_components,
    torsion_operator,
)
from .errors import SchemaError
from .report import CheckRecord, Report
from .scenarios import Scenario, ScenarioConfig
from .sta import ETA, GRADES, NBLADES, THETA, Multivector, norm_euclid, norm_max, scalar_product


class Context:
    """Sample points plus lazily computed quantities shared between checks."""

    def __init__(self, scenario: Scenario):
        self.s = scenario
        self.cfg = scenario.config
        self.step = self.cfg.numerics.fd_step
        self.points = scenario.chart.sample_points(self.step, n=self.cfg.numerics.samples, seed=self.cfg.numerics.seed)

    @cached_property
    def probe(self) -> MultivectorField:
        """A smooth mixed-grade field, fixed by the seed, for identity checks."""
        rng = np.random.default_rng(self.cfg.numerics.seed + 7919)
        amp = rng.uniform(-0.5, 0.5, NBLADES)
        k = rng.uniform(-1, 1, (NBLADES, 4))
        phase = rng.uniform(0, 2 * np.pi, NBLADES)
        return MultivectorField(lambda p: Multivector(amp * np.sin(np.asarray(p) @ k.T + phase)))

    @cached_property
    def spinor(self) -> SpinorRepresentative:
        if self.s.psi is not None:
            return self.s.psi
        even = self.probe.map(lambda m: Multivector(np.where(GRADES % 2 == 0, m.coeffs, 0.0)))
        return SpinorRepresentative(even)

    @cached_property
    def torsion(self):
        return torsion_components(self.s.conn, self.s.frame, self.points, self.step)

    @cached_property
    def riemann(self):
        return riemann_components(self.s.conn, self.s.frame, self.points, self.step)

    @cached_property
    def torsion_experiment(self):
        return torsion_generation_experiment(self.s.frame, self.s.rotor, self.points, self.step)

    @cached_property
    def maxwell_experiment(self):
        return maxwell_gauge_experiment(self.s.conn, self.s.frame, self.s.F, self.s.J, self.s.rotor,
                                        self.points, self.step)

    @cached_property
    def passive(self):
        return passive_gauge_check(self.s.frame, self.s.conn, self.s.psi, self.s.em, self.s.rotor,
                                   self.points, self.step)


@dataclass(frozen=True)
class Check:
    name: str
    func: Callable  # Context -> value or (value, detail)
    needs: tuple = ()
    lower_bound: float | None = None  # default bound for lower-bound checks
    doc: str = ""


def _geometry_pairs():
    return [(a, b) for a in range(4) for b in range(a + 1, 4)]


def _torsion_two_path(ctx):
    worst = 0.0
    for a, b in _geometry_pairs():
        tau = torsion_operator(ctx.s.conn, ctx.s.frame, basis_field(a), basis_field(b), ctx.points, ctx.step)
        for d in range(4):
            worst = max(worst, float(np.max(np.abs(scalar_product(THETA[d], tau) - ctx.torsion[..., d, a, b]))))
    return worst


def _curvature_two_path(ctx):
    worst = 0.0
    for a, b in _geometry_pairs():
        Rb = curvature_biform(ctx.s.conn, ctx.s.frame, basis_field(a), basis_field(b), ctx.points, ctx.step)
        for f, g in _geometry_pairs():
            lhs = scalar_product(THETA[f] ^ THETA[g], Rb)
            worst = max(worst, float(np.max(np.abs(lhs - ctx.riemann[..., f, g, a, b] * ETA[g]))))
    return worst


def _cartan_torsion(ctx):
    Th = forms_on_frame(cartan_torsion_forms(ctx.s.conn, ctx.s.frame, ctx.points, ctx.step), ctx.s.frame, ctx.points)
    return float(np.max(np.abs(Th - ctx.torsion)))


def _cartan_curvature(ctx):
    Om = forms_on_frame(cartan_curvature_forms(ctx.s.conn, ctx.s.frame, ctx.points, ctx.step), ctx.s.frame, ctx.points)
    return float(np.max(np.abs(Om - ctx.riemann)))


def _commutator_identity(ctx):
    # the curvature term is ℜ⌞t, which is the derivation ½[ℜ, t] only on vectors
    t = ctx.probe.map(lambda m: Multivector(np.where(GRADES == 1, m.coeffs, 0.0)))
    lhs, rhs = commutator_identity_parts(ctx.s.conn, ctx.s.frame, t, ctx.points, ctx.step)
    return norm_max(Multivector(lhs - rhs))


def _bianchi(ctx):
    first, second = bianchi_residuals(ctx.s.conn, ctx.s.frame, ctx.points, ctx.step)
    return max(first, second), {"first": first, "second": second}


def _dhe_residual(ctx):
    r = dhe_residual_riemann_cartan(ctx.s.conn, ctx.s.frame, ctx.s.psi, ctx.s.em, ctx.points, ctx.step)
    return norm_max(r)


def _dhe_collapse(ctx):
    rc = dhe_residual_riemann_cartan(ctx.s.conn, ctx.s.frame, ctx.s.psi, ctx.s.em, ctx.points, ctx.step)
    lo = dhe_residual_lorentzian(ctx.s.conn, ctx.s.frame, ctx.s.psi, ctx.s.em, ctx.points, ctx.step)
    return norm_max(rc - lo)


def _matrix_oracle(ctx):
    oracle = matrix_dirac_oracle(ctx.s.psi, ctx.s.em, ctx.s.frame, ctx.s.conn, ctx.points, ctx.step)
    r = dhe_residual_lorentzian(ctx.s.conn, ctx.s.frame, ctx.s.psi, ctx.s.em, ctx.points, ctx.step)
    gap = float(np.max(np.abs(norm_euclid(r) - oracle)))
    return gap, {"oracle_max": float(np.max(oracle))}


def _lagrangian_pairing(ctx):
    """L = ((Rθ⁰)·ψ)|det h| with R the torsion-free part of the residual."""
    s, p = ctx.s, ctx.points
    dens = dhe_lagrangian_density(s.conn, s.frame, s.psi, s.em, p, ctx.step)
    r = dhe_residual_lorentzian(s.conn, s.frame, s.psi, s.em, p, ctx.step, torsion_tol=np.inf)
    pair = scalar_product(r * THETA[0], s.psi(p)) * np.abs(tetrad_determinant(s.frame, p))
    return float(np.max(np.abs(dens - pair)))


def _spinor_commutator(ctx):
    lhs, rhs = spinor_commutator_parts(ctx.s.conn, ctx.s.frame, ctx.spinor, ctx.points, ctx.step)
    return norm_max(Multivector(lhs - rhs))


def _torsion_generated(ctx):
    rep = ctx.torsion_experiment
    return rep.torsion_after, {"torsion_after": rep.torsion_after, "max_component": rep.max_component,
                               "generated": rep.generated}


def _torsion_paths(ctx):
    gap = ctx.torsion_experiment.formula_gap
    if gap is None:
        raise ValueError("closed torsion formula needs an abelian generator")
    return gap


def _maxwell_detail(ctx, value):
    rep = ctx.maxwell_experiment
    return value, {"action_gap": rep.action_gap, "original": rep.original, "naive": rep.naive,
                   "transformed_operator": rep.transformed_operator}


def _flat_curvature(ctx):
    return float(np.max(np.abs(ctx.riemann)))


CATALOG = {c.name: c for c in (
    Check("coframe_duality", lambda c: c.s.frame.duality_residual(c.points), doc="h^a_mu h_b^mu = δ"),
    Check("metric_compatibility", lambda c: metric_compatibility_residual(c.s.conn, c.s.frame, c.points, c.step),
          doc="ω_a^{bc} antisymmetric in (b, c)"),
    Check("torsion_free", lambda c: float(np.max(np.abs(c.torsion))), doc="max |T^c_ab|"),
    Check("torsion_two_path", _torsion_two_path, doc="torsion operator vs components"),
    Check("curvature_two_path", _curvature_two_path, doc="curvature biform vs components"),
    Check("cartan_torsion", _cartan_torsion, doc="Cartan torsion 2-forms vs components"),
    Check("cartan_curvature", _cartan_curvature, doc="Cartan curvature 2-forms vs components"),
    Check("commutator_identity", _commutator_identity, doc="[∇_a, ∇_b] on a probe field"),
    Check("bianchi", _bianchi, doc="first and second Bianchi identities"),
    Check("curvature_vanishes", _flat_curvature, doc="max |R^d_cab|"),
    Check("dhe_residual", _dhe_residual, ("spinor", "em"), doc="Dirac-Hestenes residual (Riemann-Cartan form)"),
    Check("dhe_collapse", _dhe_collapse, ("spinor", "em", "torsion_free"),
          doc="Riemann-Cartan minus Lorentzian residual"),
    Check("matrix_oracle", _matrix_oracle, ("spinor", "em", "flat"), doc="γ-matrix residual norm vs Clifford"),
    Check("lagrangian_pairing", _lagrangian_pairing, ("spinor", "em"), doc="Lagrangian density vs residual pairing"),
    Check("spinor_commutator", _spinor_commutator, doc="[∇^s_a, ∇^s_b]ψ identity"),
    Check("passive_gauge", lambda c: c.passive.covariance, ("spinor", "em", "rotor"), doc="max |U R' - R|"),
    Check("passive_norm", lambda c: c.passive.norm_gap, ("spinor", "em", "rotor"),
          doc="residual norm gap between gauges"),
    Check("generalized_connection", lambda c: generalized_connection_residual(
        c.s.rotor, c.s.conn, c.s.frame, c.spinor, c.points, c.step), ("rotor",), doc="∇'(Uψ) - U∇ψ"),
    Check("curvature_covariance", lambda c: curvature_gauge_covariance_residual(
        c.s.rotor, c.s.conn, c.s.frame, c.points, c.step), ("rotor",), doc="ℜ' - UℜŨ"),
    Check("torsion_initial", lambda c: c.torsion_experiment.torsion_before, ("rotor",),
          doc="torsion of the starting Levi-Civita connection"),
    Check("torsion_generated", _torsion_generated, ("rotor",), lower_bound=0.5,
          doc="transformed torsion reaches the bound"),
    Check("torsion_absent", lambda c: _torsion_generated(c), ("rotor",), doc="transformed torsion stays small"),
    Check("torsion_paths", _torsion_paths, ("rotor",), doc="direct vs closed-formula transformed torsion"),
    Check("maxwell_action", lambda c: _maxwell_detail(c, c.maxwell_experiment.action_gap), ("rotor", "F"),
          doc="|F·F - F'·F'|"),
    Check("maxwell_original", lambda c: norm_max(maxwell_residual(
        c.s.conn, c.s.frame, c.s.F, c.s.J, c.points, c.step)), ("F",), doc="|𝝏F - J|"),
    Check("maxwell_naive", lambda c: _maxwell_detail(c, c.maxwell_experiment.naive), ("rotor", "F"),
          lower_bound=1e-2, doc="naive transformed equation fails by at least the bound"),
    Check("maxwell_transformed", lambda c: _maxwell_detail(c, c.maxwell_experiment.transformed_operator),
          ("rotor", "F"), doc="|U𝝏(ŨF'U)Ũ - J'|"),
)}


def _available(check: Check, scenario: Scenario) -> bool:
    have = {
        "spinor": scenario.psi is not None,
        "em": scenario.em is not None,
        "rotor": scenario.rotor is not None,
        "F": scenario.F is not None,
        "flat": scenario.is_flat_cartesian,
        "torsion_free": scenario.is_levi_civita or scenario.config.connection == "zero",
    }
    return all(have[n] for n in check.needs)


def default_checks(scenario: Scenario):
    if scenario.config.checks is not None:
        return list(scenario.config.checks)
    skip = {"curvature_vanishes", "torsion_absent", "torsion_generated"}
    if not (scenario.is_levi_civita or scenario.config.connection == "zero"):
        skip.add("torsion_free")
    return [n for n, c in CATALOG.items() if n not in skip and _available(c, scenario)]


def resolve_checks(names):
    unknown = [n for n in names if n not in CATALOG]
    if unknown:
        raise SchemaError("checks", f"unknown check {unknown[0]!r}")
    return list(names)


def _run_one(check: Check, ctx: Context, cfg: ScenarioConfig) -> CheckRecord:
    start = time.perf_counter()
    detail, error, value = {}, None, None
    try:
        out = check.func(ctx)
        value, detail = out if isinstance(out, tuple) else (out, {})
        value = float(value)
    except Exception as exc:  # recorded as a failed check, the sweep goes on
        error = f"{type(exc).__name__}: {exc}"
        value = None
    n = int(ctx.points.shape[0])
    if check.lower_bound is not None:
        bound = cfg.bound_for(check.name, check.lower_bound)
        detail = dict(detail, bound=bound, value=value)
        residual = None if value is None else max(0.0, bound - value)
        return CheckRecord(check.name, residual, 0.0, n, time.perf_counter() - start, detail, error)
    return CheckRecord(check.name, value, cfg.tolerance_for(check.name), n, time.perf_counter() - start, detail, error)


def run_scenario(config: ScenarioConfig, which=None) -> Report:
    """Run the selected checks (default: the scenario's own list) and collect a report."""
    scenario = config.build()
    names = resolve_checks(which if which is not None else default_checks(scenario))
    report = Report(config.to_dict())
    if not names:
        return report
    ctx = Context(scenario)
    for name in names:
        check = CATALOG[name]
        if not _available(check, scenario):
            missing = ", ".join(check.needs)
            report.checks.append(CheckRecord(name, None, config.tolerance_for(name), 0, 0.0,
                                             error=f"scenario lacks what the check needs ({missing})"))
            continue
        report.checks.append(_run_one(check, ctx, config))
    return report
