"""Synthesis configuration files.

Configurations are YAML documents validated against a JSON schema before
anything is computed.  Validation errors carry the line of the offending
entry.  Polynomials are coefficient lists from the constant term upwards;
exact rationals may be written as strings such as ``"1/3"``.

Example::

    plant: {num: [1], den: [1, 1]}
    poles: {complex: [[1, 2], [2, 4]]}
    reference: step
    relaxation: exp-bounds
    bounds: {upper: [1.01, 1.58, 0.38], lower: [0.99, -1.58, -0.38]}
    objective:
      steady_state: {weight: 10}
      mode_energy: [{mode: 1, weight: 2}]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema
import yaml

from .errors import ConfigError
from .poly import RatPoly, to_fraction
from .response import SIGNALS, Reference
from .transfer import PoleSpec

__all__ = ["SynthesisConfig", "load_config", "parse_config", "SCHEMA"]

_NUMBER = {"oneOf": [{"type": "number"},
                     {"type": "string",
                      "pattern": r"^\s*[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?(\s*/\s*\d+)?\s*$"}]}
_POLY = {"type": "array", "items": _NUMBER, "minItems": 1}
_BOUND = {"oneOf": [_NUMBER, _POLY]}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["plant", "poles"],
    "properties": {
        "name": {"type": "string"},
        "plant": {
            "type": "object", "additionalProperties": False,
            "required": ["num", "den"],
            "properties": {"num": _POLY, "den": _POLY},
        },
        "poles": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "real": {"type": "array", "items": _NUMBER},
                "complex": {"type": "array",
                            "items": {"type": "array", "items": _NUMBER,
                                      "minItems": 2, "maxItems": 2}},
            },
        },
        "reference": {
            "oneOf": [
                {"enum": ["step"]},
                {"type": "object", "additionalProperties": False,
                 "required": ["num"],
                 "properties": {
                     "num": _POLY,
                     "real": {"type": "array", "items": _NUMBER},
                     "complex": {"type": "array",
                                 "items": {"type": "array", "items": _NUMBER,
                                           "minItems": 2, "maxItems": 2}},
                 }},
            ],
        },
        "signal": {"enum": list(SIGNALS)},
        "relaxation": {"enum": ["exp-bounds", "multivariate"]},
        "bounds": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "upper": _BOUND,
                "lower": _BOUND,
                "encoding": {"enum": ["lift", "signs"]},
            },
        },
        "objective": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "steady_state": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"weight": {"type": "number", "minimum": 0},
                                   "target": {"type": "number"},
                                   "hard": {"type": "boolean"}},
                },
                "mode_energy": {
                    "type": "array",
                    "items": {"type": "object", "additionalProperties": False,
                              "required": ["mode"],
                              "properties": {"mode": {"type": "integer"},
                                             "weight": {"type": "number", "minimum": 0}}},
                },
                "overshoot": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"weight": {"type": "number", "minimum": 0}},
                },
            },
        },
        "theta": _NUMBER,
        "overapprox": {
            "oneOf": [
                {"enum": ["precomputed"]},
                {"type": "object", "additionalProperties": False,
                 "required": ["eps", "T"],
                 "properties": {"eps": _POSITIVE, "T": _POSITIVE,
                                "max_degree": {"type": "integer", "minimum": 1}}},
            ],
        },
        "orders": {"type": "array", "items": {"type": "integer", "minimum": 1},
                   "minItems": 1},
        "convention": {"enum": ["multiplier", "lasserre"]},
        "solver": {
            "type": "object", "additionalProperties": False,
            "properties": {"tol": _POSITIVE,
                           "max_iters": {"type": "integer", "minimum": 1}},
        },
        "simulation": {
            "type": "object", "additionalProperties": False,
            "properties": {"horizon": _POSITIVE, "dt": _POSITIVE},
        },
        "expected": {"type": "object"},
        "output": {"type": "string"},
    },
}


@dataclass
class SynthesisConfig:
    """Validated configuration with parsed polynomial data."""

    plant_num: RatPoly
    plant_den: RatPoly
    poles: PoleSpec
    reference: Reference
    signal: str = "output"
    relaxation: str = "exp-bounds"
    upper: object = None
    lower: object = None
    encoding: str = "lift"
    steady_state_weight: float = 0.0
    steady_state_target: float = 1.0
    steady_state_hard: bool = False
    mode_energy: list = field(default_factory=list)
    overshoot_weight: float = None
    theta: Fraction = None
    overapprox: object = "precomputed"
    orders: list = field(default_factory=lambda: [1])
    convention: str = "multiplier"
    tol: float = 1e-8
    max_iters: int = 200
    horizon: float = None
    dt: float = None
    expected: dict = field(default_factory=dict)
    output: str = None
    name: str = ""
    source: str = ""


def _mark_lines(node, path=(), out=None, keys=None):
    """Record the 1-based line of every value node (and mapping key)."""
    out = {} if out is None else out
    keys = {} if keys is None else keys
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = path + (k.value,)
            keys[p] = k.start_mark.line + 1
            _mark_lines(v, p, out, keys)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _mark_lines(v, path + (i,), out, keys)
    return out, keys


def _fractions(values) -> list:
    return [to_fraction(x if not isinstance(x, str) else x.replace(" ", "")) for x in values]


def _bound(x):
    if x is None:
        return None
    if isinstance(x, list):
        return [float(v) for v in _fractions(x)]
    return [float(_fractions([x])[0])]


def _pairs(items) -> tuple:
    return tuple(tuple(_fractions(p)) for p in (items or ()))


def parse_config(text: str, source: str = "<config>") -> SynthesisConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        Malformed YAML, schema violation or inconsistent settings; the
        message names the line when it is known.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          None if mark is None else mark.line + 1) from None
    if node is None or not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping", 1)
    lines, key_lines = _mark_lines(node)

    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = tuple(err.absolute_path)
        line = lines.get(path)
        if err.validator == "additionalProperties":
            extra = [k for k in err.instance if k not in err.schema.get("properties", {})]
            if extra:
                line = key_lines.get(path + (extra[0],), line)
                raise ConfigError(f"unknown key {extra[0]!r} in "
                                  f"{'/'.join(map(str, path)) or 'top level'}", line)
        where = "/".join(map(str, path)) or "top level"
        raise ConfigError(f"{where}: {err.message}", line)

    def line_of(*path):
        return lines.get(tuple(path))

    try:
        plant_num = RatPoly(_fractions(data["plant"]["num"]))
        plant_den = RatPoly(_fractions(data["plant"]["den"]))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"plant: {exc}", line_of("plant")) from None
    try:
        poles = PoleSpec(tuple(_fractions(data["poles"].get("real", []))),
                         _pairs(data["poles"].get("complex")))
    except ValueError as exc:
        raise ConfigError(f"poles: {exc}", line_of("poles")) from None

    ref = data.get("reference", "step")
    try:
        if ref == "step":
            reference = Reference.step()
        else:
            reference = Reference(
                RatPoly(_fractions(ref["num"])),
                PoleSpec(tuple(_fractions(ref.get("real", []))), _pairs(ref.get("complex")),
                         allow_marginal=True))
    except ValueError as exc:
        raise ConfigError(f"reference: {exc}", line_of("reference")) from None

    relaxation = data.get("relaxation", "exp-bounds")
    obj = data.get("objective", {}) or {}
    ss = obj.get("steady_state")
    over = obj.get("overshoot")
    if over is not None and relaxation != "multivariate":
        raise ConfigError("the overshoot objective needs relaxation: multivariate",
                          key_lines.get(("objective", "overshoot")))
    bounds = data.get("bounds", {}) or {}
    if bounds.get("encoding") == "signs" and relaxation != "exp-bounds":
        raise ConfigError("bounds/encoding applies to exp-bounds only",
                          line_of("bounds", "encoding"))
    theta = data.get("theta")
    overapprox = data.get("overapprox", "precomputed")
    if relaxation == "multivariate" and overapprox == "precomputed":
        if theta is not None and to_fraction(theta) != 1:
            raise ConfigError("the precomputed overapproximation needs theta = 1",
                              line_of("theta"))
        theta = 1
    solver = data.get("solver", {}) or {}
    sim = data.get("simulation", {}) or {}
    return SynthesisConfig(
        plant_num=plant_num,
        plant_den=plant_den,
        poles=poles,
        reference=reference,
        signal=data.get("signal", "output"),
        relaxation=relaxation,
        upper=_bound(bounds.get("upper")),
        lower=_bound(bounds.get("lower")),
        encoding=bounds.get("encoding", "lift"),
        steady_state_weight=float(ss.get("weight", 1.0)) if ss is not None else 0.0,
        steady_state_target=float(ss.get("target", 1.0)) if ss is not None else 1.0,
        steady_state_hard=bool(ss.get("hard", False)) if ss is not None else False,
        mode_energy=[(int(m["mode"]), float(m.get("weight", 1.0)))
                     for m in obj.get("mode_energy", [])],
        overshoot_weight=None if over is None else float(over.get("weight", 1.0)),
        theta=None if theta is None else to_fraction(theta),
        overapprox=overapprox,
        orders=list(data.get("orders", [1])),
        convention=data.get("convention", "multiplier"),
        tol=float(solver.get("tol", 1e-8)),
        max_iters=int(solver.get("max_iters", 200)),
        horizon=sim.get("horizon"),
        dt=sim.get("dt"),
        expected=dict(data.get("expected", {}) or {}),
        output=data.get("output"),
        name=data.get("name", ""),
        source=source,
    )


def load_config(path) -> SynthesisConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, str(path))
