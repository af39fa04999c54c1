"""Experiment configuration: a line-based ``key = value`` file with ``[section]`` headers.

Every key belongs to exactly one section and has a parser and a range check; keys are
globally unique, so each also has a long command-line flag ``--key-name`` that overrides
the file.  Lists are written comma- or space-separated.  ``#`` starts a comment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Unreadable file, unknown key, malformed value or violated range."""


def _float(s):
    return float(s)


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def _bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _floats(s):
    parts = [x for x in s.replace(",", " ").split() if x]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(x) for x in parts)


def _choice(*options):
    def parse(s):
        s = s.strip()
        if s not in options:
            raise ValueError(f"{s!r} is not one of {', '.join(options)}")
        return s

    return parse


def _str(s):
    return s.strip()


def positive(v):
    return all(x > 0 for x in (v if isinstance(v, tuple) else (v,)))


def nonneg(v):
    return all(x >= 0 for x in (v if isinstance(v, tuple) else (v,)))


def finite(v):
    return all(math.isfinite(x) for x in (v if isinstance(v, tuple) else (v,)))


EXPERIMENTS = ("verify-f", "eig", "solve", "branch", "lambda-sweep", "kappa-sweep", "large", "stability")


@dataclass(frozen=True)
class Key:
    section: str
    parse: object
    default: object
    help: str
    check: object = None
    rule: str = ""


SCHEMA = {
    # run
    "experiment": Key("run", _choice(*EXPERIMENTS), None, "experiment to run"),
    "out": Key("run", _str, "out", "output directory"),
    "seed": Key("run", _int, 0, "seed for random starts", nonneg, ">= 0"),
    "mode": Key("run", _choice("warm", "cold"), "warm", "sweep mode: warm (sequential) or cold (parallel)"),
    # domain
    "dim": Key("domain", _int, 1, "spatial dimension (1 or 2)", lambda v: v in (1, 2), "1 or 2"),
    "extents": Key("domain", _floats, None, "box bounds: a b (1D) or x0 x1 y0 y1 (2D); default unit box", finite),
    "n": Key("domain", _int, 99, "interior points per axis", positive, ">= 1"),
    # weight
    "weight": Key("weight", _choice("zero", "constant", "disk-bump"), "constant", "weight b: zero, constant, disk-bump"),
    "b0": Key("weight", _float, 1.0, "weight amplitude", positive, "> 0"),
    "center": Key("weight", _floats, (0.5, 0.5), "bump centre", finite),
    "radius": Key("weight", _float, 0.25, "bump radius", positive, "> 0"),
    # transform
    "kappa": Key("transform", _float, 1.0, "quasilinear coupling kappa", lambda v: v >= 0 and math.isfinite(v), ">= 0"),
    "p": Key("transform", _float, 3.0, "logistic exponent", lambda v: v > 1, "> 1"),
    # solver
    "newton_tol": Key("solver", _float, 1e-10, "Newton residual tolerance", positive, "> 0"),
    "max_newton": Key("solver", _int, 200, "Newton iteration cap", positive, ">= 1"),
    "damping": Key("solver", _float, 0.5, "line-search reduction factor", lambda v: 0 < v < 1, "in (0, 1)"),
    "step_tol": Key("solver", _float, 1e-10, "Newton step tolerance", positive, "> 0"),
    "continuation_steps": Key("solver", _int, 16, "initial steps of fallback continuation", positive, ">= 1"),
    "monotone_fallback": Key("solver", _bool, True, "allow monotone-iteration fallback"),
    "eig_tol": Key("solver", _float, 1e-10, "eigen-residual tolerance", positive, "> 0"),
    # lambda
    "lambda": Key("lambda", _float, None, "absolute lambda (overrides lambda_scale)", finite),
    "lambda_ref": Key("lambda", _choice("lambda1", "lambda_b0", "midpoint"), "lambda1",
                      "reference for relative lambdas: lambda1, lambda_b0 or their midpoint"),
    "lambda_scale": Key("lambda", _float, 2.0, "lambda as a multiple of lambda_ref", positive, "> 0"),
    "lambda_grid": Key("lambda", _floats, (1.5, 1.25, 1.1, 1.01, 1.001), "lambda sweep, multiples of lambda_ref",
                       positive, "> 0"),
    "lambda_from": Key("lambda", _float, 1.001, "branch start, multiple of lambda_ref", positive, "> 0"),
    "lambda_to": Key("lambda", _float, 3.0, "branch end, multiple of lambda_ref", positive, "> 0"),
    "steps": Key("lambda", _int, 40, "branch points", lambda v: v >= 2, ">= 2"),
    "starts": Key("lambda", _int, 5, "random starts for the uniqueness probe", positive, ">= 1"),
    # kappa
    "kappa_grid": Key("kappa", _floats, (1e-1, 3e-2, 1e-2, 3e-3, 1e-3), "kappa sweep (strictly decreasing)",
                      positive, "> 0"),
    "regime": Key("kappa", _choice("auto", "a", "b", "c"), "auto", "kappa-sweep regime"),
    "ratio_gate": Key("kappa", _float, 0.2, "regime (a): final/initial distance gate", positive, "> 0"),
    "growth_gate": Key("kappa", _float, 5.0, "regime (b) / lambda-sweep: growth factor gate", positive, "> 0"),
    "decay_gate": Key("kappa", _float, 0.1, "lambda-sweep toward lambda1: final/initial sup gate", positive, "> 0"),
    "boundary_gap": Key("kappa", _float, 0.1, "refuge compact: distance to the box", positive, "> 0"),
    "support_gap": Key("kappa", _float, 0.05, "refuge compact: distance to supp b", positive, "> 0"),
    "support_fraction": Key("kappa", _float, 0.5, "support compact radius / bump radius",
                            lambda v: 0 < v < 1, "in (0, 1)"),
    # large
    "ball_dim": Key("large", _int, 2, "ball dimension N", positive, ">= 1"),
    "ball_radius": Key("large", _float, 0.3, "ball radius R", positive, "> 0"),
    "ball_b0": Key("large", _float, 1.0, "absorption coefficient on the ball", positive, "> 0"),
    "ball_lambda": Key("large", _float, 100.0, "lambda on the ball", finite),
    "mesh_n": Key("large", _int, 400, "radial mesh cells", lambda v: v >= 4, ">= 4"),
    "absorption": Key("large", _choice("g", "power"), "g", "absorption term: g or power"),
    "stabilize_tol": Key("large", _float, 1e-6, "interior stabilization tolerance", positive, "> 0"),
    "ko_T": Key("large", _floats, (1e3, 1e4), "Keller-Osserman truncation points", lambda v: all(x > 1 for x in v),
                "> 1"),
    "ko_increment": Key("large", _float, 1e-3, "gate on partial-integral increments", positive, "> 0"),
    "exploratory": Key("large", _bool, False, "allow runs outside the proven hypotheses"),
    # verify
    "verify_kappas": Key("verify", _floats, (1e-3, 1e-1, 1.0, 10.0), "kappas for verify-f", positive, "> 0"),
    "samples": Key("verify", _int, 200, "log-uniform sample count", lambda v: v >= 2, ">= 2"),
    "t_min": Key("verify", _float, 1e-6, "smallest sample", positive, "> 0"),
    "t_max": Key("verify", _float, 1e3, "largest sample", positive, "> 0"),
    "slack": Key("verify", _float, 1e-10, "slack for the inequality checks", nonneg, ">= 0"),
}

SECTIONS = tuple(dict.fromkeys(k.section for k in SCHEMA.values()))


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)
    source: str = "<defaults>"

    def __getitem__(self, key):
        return self.values[key]

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError as exc:
            raise AttributeError(key) from exc

    @property
    def extents(self):
        ext = self.values["extents"]
        if ext is None:
            return ((0.0, 1.0),) * self.values["dim"]
        return tuple(zip(ext[0::2], ext[1::2]))


def parse_value(key, raw, where):
    key_spec = SCHEMA.get(key)
    if key_spec is None:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        val = key_spec.parse(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: key {key!r}: {exc}") from None
    if key_spec.check is not None and not key_spec.check(val):
        rule = f" (must be {key_spec.rule})" if key_spec.rule else ""
        raise ConfigError(f"{where}: key {key!r}: value {raw.strip()!r} out of range{rule}")
    return val


def read_config_file(path):
    """Parse a config file into {key: value}; errors name the line and key."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{path}:{lineno}"
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed section header")
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in SCHEMA and section is not None and SCHEMA[key].section != section:
            raise ConfigError(f"{where}: key {key!r} belongs in [{SCHEMA[key].section}], not [{section}]")
        if key in out:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        out[key] = parse_value(key, raw, where)
    return out


def build_config(file_values=None, overrides=None, source="<flags>"):
    """Merge defaults < file < flag overrides and run cross-field validation."""
    values = {k: s.default for k, s in SCHEMA.items()}
    values.update(file_values or {})
    values.update(overrides or {})
    cfg = ExperimentConfig(values, source)
    validate(cfg)
    return cfg


def validate(cfg):
    v = cfg.values
    if v["experiment"] is None:
        raise ConfigError(f"{cfg.source}: key 'experiment' is required")
    if v["extents"] is not None:
        ext = v["extents"]
        if len(ext) != 2 * v["dim"]:
            raise ConfigError(f"{cfg.source}: key 'extents' needs {2 * v['dim']} numbers for dim={v['dim']}")
        if any(b <= a for a, b in zip(ext[0::2], ext[1::2])):
            raise ConfigError(f"{cfg.source}: key 'extents' has an empty interval")
    if len(v["center"]) != 2:
        raise ConfigError(f"{cfg.source}: key 'center' needs two coordinates")
    if v["weight"] == "disk-bump" and v["dim"] != 2:
        raise ConfigError(f"{cfg.source}: key 'weight': disk-bump needs dim = 2")
    kg = v["kappa_grid"]
    if any(b >= a for a, b in zip(kg, kg[1:])):
        raise ConfigError(f"{cfg.source}: key 'kappa_grid' must be strictly decreasing")
    if v["t_max"] <= v["t_min"]:
        raise ConfigError(f"{cfg.source}: key 't_max' must exceed t_min")
    if v["lambda_to"] <= v["lambda_from"]:
        raise ConfigError(f"{cfg.source}: key 'lambda_to' must exceed lambda_from")


def flag_name(key):
    return "--" + key.replace("_", "-")


def parse_config(path=None, flags=None):
    """Config from an optional file plus ``{key: raw string}`` flag overrides."""
    file_values = read_config_file(path) if path is not None else {}
    overrides = {k: parse_value(k, raw, f"flag {flag_name(k)}") for k, raw in (flags or {}).items()}
    return build_config(file_values, overrides, str(path) if path else "<flags>")
