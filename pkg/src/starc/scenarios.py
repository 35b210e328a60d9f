"""Scenario configuration: JSON schema, validation and the built-in registry.

A scenario document is a JSON object::

    {
      "name": "my_scenario",
      "chart": {"coord_names": ["t", "x", "y", "z"], "domain": [[-1, 1], ...]},
      "coframe": [["1", "0", "0", "0"], ...],          # h^a_mu, 4x4 expressions
      "connection": "levi_civita",                     # or "zero", or 4x4x4 ω_a^{bc}
      "rotor_generator": ["0", "0", "0", "x", "0", "0"],   # on θ^0θ^1 ... θ^2θ^3
      "spinor": ["cos(t)", "0", "0", "0", "sin(t)", "0", "0", "0"],
      "em": {"A": [...4], "F": [...6], "J": [...4], "q": 0, "m": 1},
      "numerics": {"fd_step": 1e-3, "tolerance": 1e-5, "samples": 64, "seed": 0},
      "checks": ["dhe_residual", ...],
      "tolerances": {"dhe_residual": 1e-8},
      "bounds": {"torsion_generated": 0.5}
    }

Only ``name``, ``chart`` and ``coframe`` are required.  Bivector lists use the
pair order 01, 02, 03, 12, 13, 23 and spinors the even blades 1, 01, 02, 03,
12, 13, 23, 0123.  Vectors (A, J) are components on θ^a.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .dirac import EmPotential, SpinorRepresentative
from .errors import ArityError, ExpressionSyntaxError, SchemaError, StarcError, UnknownIdentifier
from .fields import Chart, Coframe, MultivectorField, ScalarField
from .gauge import RotorField
from .geometry import Connection
from .sta import BIVECTOR_PAIRS

_TOP_KEYS = {"name", "chart", "coframe", "connection", "rotor_generator", "spinor", "em",
             "numerics", "checks", "tolerances", "bounds", "description"}
_NUMERIC_KEYS = {"fd_step", "tolerance", "samples", "seed"}


@dataclass(frozen=True)
class Numerics:
    fd_step: float = 1e-3
    tolerance: float = 1e-5
    samples: int = 64
    seed: int = 0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    chart: dict
    coframe: tuple
    connection: object = "levi_civita"
    rotor_generator: tuple | None = None
    spinor: tuple | None = None
    em: dict | None = None
    numerics: Numerics = field(default_factory=Numerics)
    checks: tuple | None = None
    tolerances: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    description: str = ""

    def to_dict(self):
        out = {
            "name": self.name,
            "chart": copy.deepcopy(self.chart),
            "coframe": [list(r) for r in self.coframe],
            "connection": self.connection if isinstance(self.connection, str)
            else [[list(c) for c in r] for r in self.connection],
            "numerics": {"fd_step": float(self.numerics.fd_step), "tolerance": float(self.numerics.tolerance),
                         "samples": int(self.numerics.samples), "seed": int(self.numerics.seed)},
            "tolerances": {k: float(v) for k, v in self.tolerances.items()},
            "bounds": {k: float(v) for k, v in self.bounds.items()},
        }
        if self.rotor_generator is not None:
            out["rotor_generator"] = list(self.rotor_generator)
        if self.spinor is not None:
            out["spinor"] = list(self.spinor)
        if self.em is not None:
            out["em"] = copy.deepcopy(self.em)
        if self.checks is not None:
            out["checks"] = list(self.checks)
        if self.description:
            out["description"] = self.description
        return out

    def with_numerics(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, numerics=replace(self.numerics, **changes))

    def tolerance_for(self, check):
        return float(self.tolerances.get(check, self.numerics.tolerance))

    def bound_for(self, check, default):
        return float(self.bounds.get(check, default))

    def build(self) -> "Scenario":
        return _build(self)


@dataclass
class Scenario:
    """Compiled objects of a config, ready for the checks."""

    config: ScenarioConfig
    chart: Chart
    frame: Coframe
    conn: Connection
    rotor: RotorField | None
    psi: SpinorRepresentative | None
    em: EmPotential | None
    F: MultivectorField | None
    J: MultivectorField | None

    @property
    def is_levi_civita(self):
        return self.config.connection == "levi_civita"

    @property
    def is_flat_cartesian(self):
        ident = tuple(tuple("1" if a == m else "0" for m in range(4)) for a in range(4))
        same = tuple(tuple(e.strip() for e in r) for r in self.config.coframe) == ident
        return same and self.config.connection in ("levi_civita", "zero")


# validation --------------------------------------------------------------------------------

def _require(doc, key, path):
    if key not in doc:
        raise SchemaError(path + key if not path else f"{path}.{key}", "missing required field")
    return doc[key]


def _strings(value, n, path):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise SchemaError(path, f"expected a list of {n} expression strings")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (str, int, float)):
            raise SchemaError(f"{path}[{i}]", "expected an expression string")
        out.append(v if isinstance(v, str) else repr(float(v)))
    return tuple(out)


def _number(value, path, kind=float, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, "expected a number")
    if kind is int and int(value) != value:
        raise SchemaError(path, "expected an integer")
    v = kind(value)
    if positive and not v > 0:
        raise SchemaError(path, "must be positive")
    if not np.isfinite(v):
        raise SchemaError(path, "must be finite")
    return v


def _chart(doc):
    if not isinstance(doc, dict):
        raise SchemaError("chart", "expected an object")
    unknown = set(doc) - {"coord_names", "domain"}
    if unknown:
        raise SchemaError(f"chart.{sorted(unknown)[0]}", "unknown field")
    names = doc.get("coord_names", ["t", "x", "y", "z"])
    if not isinstance(names, list) or len(names) != 4 or not all(isinstance(n, str) for n in names):
        raise SchemaError("chart.coord_names", "expected 4 names")
    if len(set(names)) != 4:
        raise SchemaError("chart.coord_names", "names must be distinct")
    dom = doc.get("domain", [[-1, 1]] * 4)
    if not isinstance(dom, list) or len(dom) != 4:
        raise SchemaError("chart.domain", "expected 4 intervals")
    intervals = []
    for i, iv in enumerate(dom):
        if not isinstance(iv, list) or len(iv) != 2:
            raise SchemaError(f"chart.domain[{i}]", "expected [lo, hi]")
        lo, hi = (_number(v, f"chart.domain[{i}]") for v in iv)
        if not lo < hi:
            raise SchemaError(f"chart.domain[{i}]", "need lo < hi")
        intervals.append([lo, hi])
    return {"coord_names": list(names), "domain": intervals}


def _numerics(doc):
    if not isinstance(doc, dict):
        raise SchemaError("numerics", "expected an object")
    unknown = set(doc) - _NUMERIC_KEYS
    if unknown:
        raise SchemaError(f"numerics.{sorted(unknown)[0]}", "unknown field")
    base = Numerics()
    return Numerics(
        fd_step=_number(doc.get("fd_step", base.fd_step), "numerics.fd_step", positive=True),
        tolerance=_number(doc.get("tolerance", base.tolerance), "numerics.tolerance"),
        samples=_number(doc.get("samples", base.samples), "numerics.samples", int, positive=True),
        seed=_number(doc.get("seed", base.seed), "numerics.seed", int),
    )


def _connection(value):
    if isinstance(value, str):
        if value not in ("levi_civita", "zero"):
            raise SchemaError("connection", "expected 'levi_civita', 'zero' or a 4x4x4 array")
        return value
    if not isinstance(value, list) or len(value) != 4:
        raise SchemaError("connection", "expected 4 rows")
    rows = []
    for a, row in enumerate(value):
        if not isinstance(row, list) or len(row) != 4:
            raise SchemaError(f"connection[{a}]", "expected a 4x4 block")
        rows.append(tuple(_strings(r, 4, f"connection[{a}][{b}]") for b, r in enumerate(row)))
    return tuple(rows)


def _named_map(doc, path):
    if not isinstance(doc, dict):
        raise SchemaError(path, "expected an object")
    return {str(k): _number(v, f"{path}.{k}") for k, v in doc.items()}


def parse_config(doc) -> ScenarioConfig:
    """Validate a decoded JSON document and compile every expression in it."""
    if not isinstance(doc, dict):
        raise SchemaError("$", "a scenario must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown field")
    name = _require(doc, "name", "")
    if not isinstance(name, str) or not name:
        raise SchemaError("name", "expected a non-empty string")
    chart = _chart(_require(doc, "chart", ""))
    cf = _require(doc, "coframe", "")
    if not isinstance(cf, list) or len(cf) != 4:
        raise SchemaError("coframe", "expected 4 rows of 4 expressions")
    coframe = tuple(_strings(row, 4, f"coframe[{a}]") for a, row in enumerate(cf))
    conn = _connection(doc.get("connection", "levi_civita"))
    rotor = doc.get("rotor_generator")
    rotor = None if rotor is None else _strings(rotor, 6, "rotor_generator")
    spinor = doc.get("spinor")
    spinor = None if spinor is None else _strings(spinor, 8, "spinor")
    em = doc.get("em")
    if em is not None:
        if not isinstance(em, dict):
            raise SchemaError("em", "expected an object")
        unknown = set(em) - {"A", "F", "J", "q", "m"}
        if unknown:
            raise SchemaError(f"em.{sorted(unknown)[0]}", "unknown field")
        em_out = {"q": _number(em.get("q", 0.0), "em.q"), "m": _number(em.get("m", 0.0), "em.m")}
        for key, n in (("A", 4), ("F", 6), ("J", 4)):
            if key in em:
                em_out[key] = list(_strings(em[key], n, f"em.{key}"))
        em = em_out
    checks = doc.get("checks")
    if checks is not None:
        if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
            raise SchemaError("checks", "expected a list of check names")
        checks = tuple(checks)
    desc = doc.get("description", "")
    if not isinstance(desc, str):
        raise SchemaError("description", "expected a string")
    config = ScenarioConfig(
        name=name, chart=chart, coframe=coframe, connection=conn, rotor_generator=rotor, spinor=spinor,
        em=em, numerics=_numerics(doc.get("numerics", {})), checks=checks,
        tolerances=_named_map(doc.get("tolerances", {}), "tolerances"),
        bounds=_named_map(doc.get("bounds", {}), "bounds"), description=desc,
    )
    config.build()
    return config


def load_config(path) -> ScenarioConfig:
    """Read and validate a scenario file.

    OSError propagates for unreadable files, malformed JSON becomes a
    SchemaError at ``$`` and expression syntax errors are forwarded.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return parse_config(doc)


# compilation ------------------------------------------------------------------------------

def _compile(text, names, path):
    try:
        return ScalarField.from_expression(text, names)
    except ExpressionSyntaxError as exc:
        exc.path = path
        raise
    except (UnknownIdentifier, ArityError) as exc:
        raise SchemaError(path, str(exc)) from exc


def _compile_list(texts, names, path):
    return [_compile(t, names, f"{path}[{i}]") for i, t in enumerate(texts)]


def _connection_object(config, frame, chart, names):
    kind = config.connection
    if kind == "levi_civita":
        return Connection.levi_civita(frame, config.numerics.fd_step)
    if kind == "zero":
        return Connection.zero()
    fields = [[_compile_list(kind[a][b], names, f"connection[{a}][{b}]") for b in range(4)] for a in range(4)]
    probe = chart.sample_points(config.numerics.fd_step, n=16, seed=config.numerics.seed)
    for a in range(4):
        for b in range(4):
            for c in range(b, 4):
                s = fields[a][b][c](probe) + fields[a][c][b](probe)
                if np.max(np.abs(s)) > 1e-12:
                    raise SchemaError(f"connection[{a}][{b}][{c}]", "ω_a^{bc} must be antisymmetric in (b, c)")
    pairs = [[fields[a][b][c] for b, c in BIVECTOR_PAIRS] for a in range(4)]
    return Connection.from_pairs(pairs)


def _build(config: ScenarioConfig) -> Scenario:
    c = config.chart
    chart = Chart(coord_names=tuple(c["coord_names"]), domain=tuple(tuple(iv) for iv in c["domain"]),
                  samples=config.numerics.samples, seed=config.numerics.seed)
    names = chart.coord_names
    rows = [_compile_list(r, names, f"coframe[{a}]") for a, r in enumerate(config.coframe)]

    def h(p):
        p = np.asarray(p, dtype=float)
        return np.stack([np.stack([f(p) for f in row], axis=-1) for row in rows], axis=-2)

    frame = Coframe(h, None, chart)
    try:
        probe = chart.sample_points(config.numerics.fd_step, n=16, seed=config.numerics.seed)
    except StarcError as exc:
        raise SchemaError("numerics.fd_step", str(exc)) from exc
    det = np.linalg.det(h(probe))
    if not np.all(np.isfinite(det)) or np.min(np.abs(det)) < 1e-12:
        raise SchemaError("coframe", "tetrad is singular or non-finite on the chart")
    conn = _connection_object(config, frame, chart, names)
    rotor = None
    if config.rotor_generator is not None:
        rotor = RotorField(MultivectorField.bivector(_compile_list(config.rotor_generator, names, "rotor_generator")),
                           f"{config.name}_rotor")
    psi = None
    if config.spinor is not None:
        psi = SpinorRepresentative(MultivectorField.even(_compile_list(config.spinor, names, "spinor")))
    em = F = J = None
    if config.em is not None:
        e = config.em
        A = MultivectorField.vector(_compile_list(e["A"], names, "em.A")) if "A" in e \
            else MultivectorField.constant(np.zeros(16))
        em = EmPotential(A, e["q"], e["m"])
        if "F" in e:
            F = MultivectorField.bivector(_compile_list(e["F"], names, "em.F"))
        J = MultivectorField.vector(_compile_list(e["J"], names, "em.J")) if "J" in e \
            else MultivectorField.constant(np.zeros(16))
    return Scenario(config, chart, frame, conn, rotor, psi, em, F, J)


# built-in scenarios ---------------------------------------------------------------------------

def _diag(entries):
    return [[entries[a] if a == m else "0" for m in range(4)] for a in range(4)]


_FLAT = _diag(["1", "1", "1", "1"])
_ZERO6 = ["0"] * 6
_GEOMETRY = ["coframe_duality", "metric_compatibility", "torsion_free", "torsion_two_path",
             "curvature_two_path", "cartan_torsion", "cartan_curvature", "commutator_identity", "bianchi"]

BUILTINS = {
    "flat_minkowski": {
        "description": "Minkowski space in Cartesian coordinates with its Levi-Civita connection.",
        "chart": {"domain": [[-1, 1]] * 4},
        "coframe": _FLAT,
        "connection": "levi_civita",
        "checks": _GEOMETRY + ["curvature_vanishes"],
        "tolerances": {"curvature_vanishes": 1e-5},
    },
    "rindler_lc": {
        "description": "Rindler coframe θ^0 = x dt; flat, so the Levi-Civita curvature vanishes.",
        "chart": {"domain": [[-1, 1], [1, 2], [-1, 1], [-1, 1]]},
        "coframe": _diag(["x", "1", "1", "1"]),
        "connection": "levi_civita",
        "checks": _GEOMETRY + ["curvature_vanishes"],
        "tolerances": {"curvature_vanishes": 1e-5},
    },
    "sphere_block": {
        "description": "R x R x S^2 with the unit-sphere block dθ, sin θ dφ.",
        "chart": {"coord_names": ["t", "r", "th", "ph"], "domain": [[-1, 1], [-1, 1], [0.5, 2.5], [-1, 1]]},
        "coframe": _diag(["1", "1", "1", "sin(th)"]),
        "connection": "levi_civita",
        "checks": _GEOMETRY,
    },
    "torsion_gen_abelian": {
        "description": "Active rotor exp(x θ^1θ^2) applied to the flat Levi-Civita connection on the unit chart.",
        "chart": {"domain": [[0, 1]] * 4},
        "coframe": _FLAT,
        "connection": "levi_civita",
        "rotor_generator": ["0", "0", "0", "x", "0", "0"],
        "checks": ["torsion_initial", "torsion_generated", "torsion_paths", "generalized_connection",
                   "curvature_covariance"],
        "tolerances": {"torsion_initial": 1e-7},
        "bounds": {"torsion_generated": 0.5},
    },
    "torsion_gen_constant_rotor": {
        "description": "A constant rotor on flat Cartesian space: no torsion is generated.",
        "chart": {"domain": [[-1, 1]] * 4},
        "coframe": _FLAT,
        "connection": "levi_civita",
        "rotor_generator": ["0.3", "0", "0", "0.4", "0", "0.2"],
        "checks": ["torsion_initial", "torsion_absent", "torsion_paths", "generalized_connection",
                   "curvature_covariance"],
        "tolerances": {"torsion_initial": 1e-7, "torsion_absent": 1e-6},
    },
    "maxwell_planewave_gauge": {
        "description": "Null plane wave F = cos(t-z)(θ^1θ^0 - θ^1θ^3) under the rotor exp(x θ^1θ^2).",
        "chart": {"domain": [[-1, 1]] * 4},
        "coframe": _FLAT,
        "connection": "levi_civita",
        "rotor_generator": ["0", "0", "0", "x", "0", "0"],
        "em": {"F": ["-cos(t-z)", "0", "0", "0", "-cos(t-z)", "0"], "J": ["0"] * 4},
        "checks": ["maxwell_action", "maxwell_original", "maxwell_naive", "maxwell_transformed",
                   "generalized_connection"],
        "tolerances": {"maxwell_action": 1e-10, "maxwell_original": 1e-6, "maxwell_transformed": 1e-5},
        "bounds": {"maxwell_naive": 1e-2},
    },
    "dhe_restwave": {
        "description": "Rest-frame plane wave ψ = exp(m t θ^1θ^2) with m = 1 on Minkowski space.",
        "chart": {"domain": [[-1, 1]] * 4},
        "coframe": _FLAT,
        "connection": "levi_civita",
        "spinor": ["cos(t)", "0", "0", "0", "sin(t)", "0", "0", "0"],
        "em": {"m": 1.0, "q": 0.0},
        "numerics": {"fd_step": 1e-4},
        "checks": ["dhe_residual", "dhe_collapse", "matrix_oracle", "lagrangian_pairing", "spinor_commutator"],
        "tolerances": {"dhe_residual": 1e-8, "dhe_collapse": 0.0, "matrix_oracle": 1e-6},
    },
    "dhe_passive_gauge": {
        "description": "Passive change of spin coframe by a spatial rotor field on the Rindler coframe.",
        "chart": {"domain": [[-1, 1], [1, 2], [-1, 1], [-1, 1]]},
        "coframe": _diag(["x", "1", "1", "1"]),
        "connection": "levi_civita",
        "rotor_generator": ["0", "0", "0", "0.4*y", "0.2*sin(t)", "0.3*x*z"],
        "spinor": ["cos(t+x)", "0.2*y", "0", "0.1*z", "sin(x)", "0", "0.3*t", "0.1"],
        "em": {"A": ["0.2*x", "0", "0.1*t", "0"], "q": 0.5, "m": 0.8},
        "checks": ["passive_gauge", "passive_norm", "generalized_connection", "spinor_commutator",
                   "lagrangian_pairing"],
        "tolerances": {"passive_gauge": 1e-5, "passive_norm": 1e-5},
    },
}


def list_builtins():
    return sorted(BUILTINS)


def builtin(name) -> ScenarioConfig:
    if name not in BUILTINS:
        raise SchemaError("name", f"unknown built-in scenario {name!r}")
    return parse_config({"name": name, **copy.deepcopy(BUILTINS[name])})
