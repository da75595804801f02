"""Experiment configuration: JSON loading, validation, defaults and hashing.

A config is a JSON object.  Keys and defaults::

    experiment   one of EXPERIMENTS                      (required)
    spec         {"drift": d, "family": {...}}            (required)
    alpha        index in (0, 1)                          (required except simulate, potter)
    ell          slowly varying descriptor                {"kind": "constant"}
    c_fn         threshold descriptor                     {"kind": "power", "beta": 0.5}
    s_list       levels                                   [1.0]
    range        "long" or "short"                        "long"
    n            replicas per level                       100000
    seed         master seed (0 <= seed < 2**128)         0
    policy       {"eps_rel": 1e-5, "compensate": true}
    thresholds   see DEFAULT_THRESHOLDS
    scaled       {"t": 1.0, "x": 1.0}  (verify-lde only)
    q_list, lambda_list      verify-dlt grid            [0.5, 1, 2] each
    x_list                   karamata evaluation points [1.0]
    epsilon_list             potter exponents           [0.1]
    save_samples             also dump verify-dl samples    false
    output       CSV path                                 "<experiment>.csv"
"""
from __future__ import annotations

import difflib
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError, RangeError, SpecError, SubLabError, UnknownFamilyError
from ..limits import CFunction, c_fn_from_dict, check_index_hypothesis, check_threshold_hypotheses
from ..model import SubordinatorSpec, spec_from_dict, spec_to_dict
from ..regvar import SlowVaryingFn, ell_from_dict
from ..sampler import TruncationPolicy

EXPERIMENTS = ("simulate", "verify-dl", "verify-lde", "verify-dlt", "karamata", "potter")

# Pass/fail bands.  The asymptotic statements carry no convergence rate, so
# these are engineering choices; every one can be overridden per config.
DEFAULT_THRESHOLDS = {
    "ks": 0.015,            # verify-dl: KS distance to the Beta law
    "ratio_low": 0.9,       # verify-lde: band for the ratio at the level closest to the limit
    "ratio_high": 1.1,      #   (also the band for karamata ratios)
    "monotone": True,       # verify-lde: |ratio - 1| must shrink towards the limit
    "two_eps": False,       # verify-lde: rerun the last level at 10 x eps_rel
    "sigmas": 3.0,          # verify-dlt: allowed |empirical - theoretical| / stderr
    "expect_holds": True,   # potter: expected outcome
}

_KNOWN_KEYS = {
    "experiment", "spec", "alpha", "ell", "c_fn", "s_list", "range", "n", "seed", "policy",
    "thresholds", "scaled", "q_list", "lambda_list", "x_list", "epsilon_list", "save_samples",
    "output",
}
_NEEDS_ALPHA = {"verify-dl", "verify-lde", "karamata"}


def _suggest(name, valid):
    near = difflib.get_close_matches(str(name), list(valid), n=1)
    return f"; did you mean {near[0]!r}?" if near else ""


@dataclass
class ExperimentConfig:
    experiment: str
    spec: SubordinatorSpec | None
    alpha: float | None = None
    ell: SlowVaryingFn = field(default_factory=SlowVaryingFn)
    c_fn: CFunction = field(default_factory=lambda: CFunction("power", beta=0.5))
    s_list: list = field(default_factory=lambda: [1.0])
    range: str = "long"
    n: int = 100_000
    seed: int = 0
    eps_rel: float = 1e-5
    compensate: bool = True
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    t: float = 1.0
    x: float = 1.0
    q_list: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    lambda_list: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    x_list: list = field(default_factory=lambda: [1.0])
    epsilon_list: list = field(default_factory=lambda: [0.1])
    save_samples: bool = False
    output: str | None = None

    @property
    def policy(self):
        return TruncationPolicy(eps_rel=self.eps_rel, compensate=self.compensate)

    @property
    def output_path(self):
        return Path(self.output or f"{self.experiment}.csv")

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "spec": None if self.spec is None else spec_to_dict(self.spec),
            "alpha": self.alpha,
            "ell": self.ell.to_dict(),
            "c_fn": self.c_fn.to_dict(),
            "s_list": list(self.s_list),
            "range": self.range,
            "n": self.n,
            "seed": self.seed,
            "policy": {"eps_rel": self.eps_rel, "compensate": self.compensate},
            "thresholds": dict(self.thresholds),
            "scaled": {"t": self.t, "x": self.x},
            "q_list": list(self.q_list),
            "lambda_list": list(self.lambda_list),
            "x_list": list(self.x_list),
            "epsilon_list": list(self.epsilon_list),
            "save_samples": self.save_samples,
            "output": self.output,
        }

    def canonical_json(self):
        """Key-sorted compact JSON; the output path does not affect results and is left out."""
        data = self.to_dict()
        data.pop("output")
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def with_overrides(self, **kwargs):
        data = self.to_dict()
        for key, value in kwargs.items():
            if value is None:
                continue
            if key == "eps_rel":
                data["policy"]["eps_rel"] = value
            else:
                data[key] = value
        return config_from_dict(data)


def _number(data, key, default, kind=float):
    value = data.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{key!r} must be an integer, got {value!r}")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise RangeError(f"{key!r} must be finite")
    return value


def _positive_list(data, key, default):
    values = data.get(key, default)
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{key!r} must be a non-empty list of numbers")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
            raise RangeError(f"{key!r} entries must be positive finite numbers, got {v!r}")
        out.append(float(v))
    return out


def config_from_dict(data):
    """Validate a parsed config mapping and fill in defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown config key {key!r}{_suggest(key, _KNOWN_KEYS)}")
    experiment = data.get("experiment")
    if experiment not in EXPERIMENTS:
        raise UnknownFamilyError(
            f"unknown experiment {experiment!r} (valid: {', '.join(EXPERIMENTS)}){_suggest(experiment, EXPERIMENTS)}"
        )
    try:
        spec = spec_from_dict(data["spec"]) if data.get("spec") is not None else None
        ell = ell_from_dict(data.get("ell", {"kind": "constant"}))
        c_fn = c_fn_from_dict(data.get("c_fn", {"kind": "power", "beta": 0.5}))
    except (UnknownFamilyError, ConfigError):
        raise
    except SpecError as exc:
        raise ConfigError(str(exc)) from exc
    except SubLabError as exc:
        raise RangeError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if spec is None and experiment != "potter":
        raise ConfigError(f"experiment {experiment!r} needs a 'spec'")

    alpha = _number(data, "alpha", None)
    if alpha is None and experiment in _NEEDS_ALPHA:
        raise ConfigError(f"experiment {experiment!r} needs 'alpha'")
    if alpha is not None and not 0.0 < alpha < 1.0:
        raise RangeError(f"alpha must lie in (0, 1), got {alpha!r}")

    range_ = data.get("range", "long")
    if range_ not in ("long", "short"):
        raise RangeError(f"range must be 'long' or 'short', got {range_!r}")
    n = _number(data, "n", 100_000, int)
    if n < 1:
        raise RangeError(f"n must be at least 1, got {n}")
    seed = _number(data, "seed", 0, int)
    if not 0 <= seed < 2 ** 128:
        raise RangeError(f"seed must lie in [0, 2**128), got {seed}")

    policy = data.get("policy", {})
    if not isinstance(policy, dict) or set(policy) - {"eps_rel", "compensate"}:
        raise ConfigError("policy must be an object with keys 'eps_rel' and 'compensate'")
    eps_rel = _number(policy, "eps_rel", 1e-5)
    if not 0.0 < eps_rel < 1.0:
        raise RangeError(f"eps_rel must lie in (0, 1), got {eps_rel!r}")
    compensate = policy.get("compensate", True)
    if not isinstance(compensate, bool):
        raise ConfigError("policy.compensate must be true or false")

    thresholds = dict(DEFAULT_THRESHOLDS)
    given = data.get("thresholds", {})
    if not isinstance(given, dict):
        raise ConfigError("thresholds must be an object")
    for key, value in given.items():
        if key not in DEFAULT_THRESHOLDS:
            raise ConfigError(f"unknown threshold {key!r}{_suggest(key, DEFAULT_THRESHOLDS)}")
        if isinstance(DEFAULT_THRESHOLDS[key], bool) != isinstance(value, bool):
            raise ConfigError(f"threshold {key!r} has the wrong type: {value!r}")
        thresholds[key] = value if isinstance(value, bool) else float(value)
    if thresholds["ratio_low"] > thresholds["ratio_high"]:
        raise RangeError("thresholds.ratio_low exceeds thresholds.ratio_high")

    scaled = data.get("scaled", {"t": 1.0, "x": 1.0})
    if not isinstance(scaled, dict) or set(scaled) - {"t", "x"}:
        raise ConfigError("scaled must be an object with keys 't' and 'x'")
    t = _number(scaled, "t", 1.0)
    x = _number(scaled, "x", 1.0)
    if not (t > 0.0 and x > 0.0):
        raise RangeError("scaled.t and scaled.x must be positive")

    save_samples = data.get("save_samples", False)
    if not isinstance(save_samples, bool):
        raise ConfigError("save_samples must be true or false")
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output must be a path string")

    cfg = ExperimentConfig(
        experiment=experiment,
        spec=spec,
        alpha=alpha,
        ell=ell,
        c_fn=c_fn,
        s_list=_positive_list(data, "s_list", [1.0]),
        range=range_,
        n=n,
        seed=seed,
        eps_rel=eps_rel,
        compensate=compensate,
        thresholds=thresholds,
        t=t,
        x=x,
        q_list=_positive_list(data, "q_list", [0.5, 1.0, 2.0]),
        lambda_list=_positive_list(data, "lambda_list", [0.5, 1.0, 2.0]),
        x_list=_positive_list(data, "x_list", [1.0]),
        epsilon_list=_positive_list(data, "epsilon_list", [0.1]),
        save_samples=save_samples,
        output=output,
    )
    _precheck(cfg)
    return cfg


def _precheck(cfg):
    """Run the hypothesis gates that need no simulation."""
    if cfg.experiment in ("verify-dl", "verify-lde"):
        check_index_hypothesis(cfg.spec, cfg.alpha, cfg.range)
    if cfg.experiment == "verify-lde":
        check_threshold_hypotheses(cfg.c_fn, cfg.s_list, cfg.range)


def parse_config(text, source="<string>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))


def dump_config(cfg):
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


__all__ = [
    "EXPERIMENTS", "DEFAULT_THRESHOLDS", "ExperimentConfig", "config_from_dict", "parse_config",
    "load_config", "dump_config",
]
