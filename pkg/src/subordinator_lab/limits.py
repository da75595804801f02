"""Limit laws for the undershoot ratio and their statistical verifiers.

The undershoot ratio ``X_{T(s)-}/s`` of a subordinator whose Laplace
exponent varies regularly with index ``alpha`` converges to the
Beta(alpha, 1 - alpha) law (as ``s -> inf`` for variation at 0+, as
``s -> 0+`` for variation at infinity).  For a level-dependent threshold
``c(s) -> 0`` the small-ball probability satisfies

    P(X_{T(s)-}/s <= c(s)) ~ sin(pi alpha)/(pi alpha) * ell(s)/ell(c(s) s) * c(s)**alpha.
"""
from __future__ import annotations

import difflib
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, HypothesisError, ResourceError, UnknownFamilyError
from .model import laplace_exponent_index
from .regvar import SlowVaryingFn, ell_eval
from .sampler import PassageBatch, TruncationPolicy, batch_passages
from .special import betainc_cf

WILSON_Z = 1.959963984540054  # two-sided 95 %
MIN_EXPECTED_HITS = 400.0
INDEX_TOL = 1e-6

RANGES = ("long", "short")
C_FN_KINDS = ("power", "exp_sqrt_log", "constant")


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def _check_range(range_):
    if range_ not in RANGES:
        raise ValueError(f"range must be 'long' or 'short', got {range_!r}")
    return range_


def beta_cdf(alpha, t):
    """CDF of Beta(alpha, 1 - alpha) at ``t`` in [0, 1]."""
    alpha = _check_alpha(alpha)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"beta_cdf requires 0 <= t <= 1, got {t!r}")
    return betainc_cf(alpha, 1.0 - alpha, t)


def small_t_constant(alpha):
    """``sin(pi alpha) / (pi alpha)``."""
    return math.sin(math.pi * alpha) / (math.pi * alpha)


def beta_cdf_small_t_asymptote(alpha, t):
    """Leading behaviour ``sin(pi alpha)/(pi alpha) * t**alpha`` of ``beta_cdf`` at 0+."""
    return small_t_constant(alpha) * float(t) ** alpha


@dataclass(frozen=True)
class EmpiricalCdf:
    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=np.float64))
        if v.size == 0:
            raise DomainError("empirical CDF needs at least one sample")
        if v[0] < 0.0 or v[-1] > 1.0:
            raise DomainError("undershoot ratios must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_batch(cls, batch):
        return cls(batch.ratios)

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.values.size


def ks_distance(ecdf, cdf):
    """Kolmogorov-Smirnov distance ``sup |F_n - F|`` for a continuous ``cdf``.

    Both one-sided gaps are taken at every sample point; with ties the
    formula still sees the full jump of the step function.
    """
    x = ecdf.values if isinstance(ecdf, EmpiricalCdf) else np.sort(np.asarray(ecdf, dtype=np.float64))
    n = x.size
    if n == 0:
        raise DomainError("ks_distance needs a non-empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def vectorized_beta_cdf(alpha):
    """``beta_cdf(alpha, .)`` as an array function (used by the KS verifier)."""
    return np.vectorize(lambda v: beta_cdf(alpha, min(max(v, 0.0), 1.0)), otypes=[np.float64])


@dataclass(frozen=True)
class LdeTarget:
    alpha: float
    ell: SlowVaryingFn
    s: float
    c: float

    @property
    def value(self):
        return lde_target(self.alpha, self.ell, self.s, self.c)


def lde_target(alpha, ell, s, c):
    """``sin(pi alpha)/(pi alpha) * ell(s)/ell(c s) * c**alpha``."""
    alpha = _check_alpha(alpha)
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    if not s > 0.0:
        raise DomainError(f"s must be positive, got {s!r}")
    return small_t_constant(alpha) * ell_eval(ell, s) / ell_eval(ell, c * s) * c ** alpha


@dataclass(frozen=True)
class ProportionEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    hits: int
    n: int


def wilson_interval(hits, n, z=WILSON_Z):
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    return max(center - half, 0.0), min(center + half, 1.0)


def _threshold_hits(batch, threshold):
    return int(np.count_nonzero(batch.ratios <= threshold))


def lde_estimate(samples, c):
    """Fraction of undershoot ratios at or below ``c`` with a 95 % Wilson interval."""
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c!r}")
    if isinstance(samples, PassageBatch):
        n = len(samples)
        hits = _threshold_hits(samples, c) if n else 0
    else:
        samples = list(samples)
        n = len(samples)
        if n and len({smp.level for smp in samples}) != 1:
            raise DomainError("all samples must share one level")
        hits = sum(1 for smp in samples if smp.undershoot / smp.level <= c)
    if n == 0:
        raise DomainError("lde_estimate needs at least one sample")
    lo, hi = wilson_interval(hits, n)
    return ProportionEstimate(hits / n, lo, hi, hits, n)


# ----------------------------------------------------------------------------
# level-dependent thresholds


@dataclass(frozen=True)
class CFunction:
    """Named threshold function ``c(s)``.

    * ``power``: ``coef * s**-beta``; tends to 0 with ``c s -> inf`` as
      ``s -> inf`` iff ``0 < beta < 1``; tends to 0 as ``s -> 0+`` iff ``beta < 0``.
    * ``exp_sqrt_log``: ``exp(-sqrt(|log s|))``; tends to 0 in both regimes,
      ``c s -> inf`` as ``s -> inf``, and ``ell(s)/ell(c s) -> 1`` for
      logarithmic ``ell``.
    * ``constant``: ``value``; never tends to 0 (negative tests).
    """

    kind: str
    beta: float = 0.5
    coef: float = 1.0
    value: float = 0.5

    def __post_init__(self):
        if self.kind not in C_FN_KINDS:
            near = difflib.get_close_matches(str(self.kind), C_FN_KINDS, n=1)
            hint = f"; did you mean {near[0]!r}?" if near else ""
            raise UnknownFamilyError(f"unknown c_fn kind {self.kind!r}{hint}")

    def __call__(self, s):
        s = float(s)
        if self.kind == "power":
            return self.coef * s ** (-self.beta)
        if self.kind == "exp_sqrt_log":
            return math.exp(-math.sqrt(abs(math.log(s))))
        return self.value

    def tends_to_zero(self, range_):
        if self.kind == "power":
            return self.beta > 0.0 if range_ == "long" else self.beta < 0.0
        return self.kind == "exp_sqrt_log"

    def level_product_diverges(self):
        """Whether ``c(s) s -> inf`` as ``s -> inf``."""
        if self.kind == "power":
            return self.beta < 1.0
        return self.kind == "exp_sqrt_log"

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "beta": self.beta, "coef": self.coef}
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {"kind": self.kind}


def c_fn_from_dict(data):
    if isinstance(data, str):
        data = {"kind": data}
    if not isinstance(data, dict) or "kind" not in data:
        raise UnknownFamilyError("c_fn descriptor must be a mapping with a 'kind' field")
    return CFunction(
        kind=data["kind"],
        beta=float(data.get("beta", 0.5)),
        coef=float(data.get("coef", 1.0)),
        value=float(data.get("value", 0.5)),
    )


def check_threshold_hypotheses(c_fn, s_list, range_):
    """Validate the threshold conditions of the small-ball estimate.

    Long range: ``c(s) -> 0`` and ``c(s) s -> inf`` as ``s -> inf``.
    Short range: ``c(s) -> 0`` as ``s -> 0+``.  Named forms are checked
    analytically; every form is also checked along ``s_list`` (values in
    (0, 1), ``c`` shrinking and, for long range, ``c s`` growing in the
    direction of the limit).  Returns the list of ``c`` values.
    """
    _check_range(range_)
    s = [float(v) for v in s_list]
    if not s:
        raise DomainError("s_list must be non-empty")
    if any(v <= 0.0 for v in s):
        raise DomainError("levels must be positive")
    if isinstance(c_fn, CFunction):
        if not c_fn.tends_to_zero(range_):
            raise HypothesisError(f"c(s) does not tend to 0 ({c_fn.to_dict()}, range={range_})")
        if range_ == "long" and not c_fn.level_product_diverges():
            raise HypothesisError(f"c(s) s does not tend to infinity ({c_fn.to_dict()})")
    cs = [float(c_fn(v)) for v in s]
    for v, c in zip(s, cs):
        if not 0.0 < c < 1.0:
            raise HypothesisError(f"c({v:g}) = {c:g} is outside (0, 1)")
    order = sorted(range(len(s)), key=lambda k: s[k], reverse=(range_ == "short"))
    for a, b in zip(order, order[1:]):
        if not cs[b] < cs[a]:
            raise HypothesisError("c(s) does not decrease towards the limit along s_list")
        if range_ == "long" and not cs[b] * s[b] > cs[a] * s[a]:
            raise HypothesisError("c(s) s does not increase along s_list")
    return cs


def check_index_hypothesis(spec, alpha, range_):
    """Require ``Phi`` regularly varying with index ``alpha`` at the right end."""
    at = "zero" if range_ == "long" else "infinity"
    index = laplace_exponent_index(spec, at)
    where = "0+" if at == "zero" else "infinity"
    if index is None or abs(index - alpha) > INDEX_TOL:
        raise HypothesisError(
            f"Laplace exponent of {spec.kind} is regularly varying at {where} with index "
            f"{index!r}, not alpha={alpha:g}; the {range_}-range limit law does not apply"
        )


# ----------------------------------------------------------------------------
# verifiers


@dataclass(frozen=True)
class DLCheck:
    ks: float
    passed: bool
    s: float
    n: int
    artificial_creeps: int
    batch: PassageBatch


def dl_theorem_check(spec, alpha, s, n, policy, seed, range="long", *, ks_threshold, tag=0):
    """KS distance between simulated undershoot ratios at level ``s`` and Beta(alpha, 1-alpha)."""
    alpha = _check_alpha(alpha)
    _check_range(range)
    check_index_hypothesis(spec, alpha, range)
    batch = batch_passages(spec, s, policy, n, seed, tag=tag)
    ks = ks_distance(EmpiricalCdf.from_batch(batch), vectorized_beta_cdf(alpha))
    return DLCheck(ks, ks <= ks_threshold, float(s), int(n), batch.artificial_creeps, batch)


@dataclass(frozen=True)
class LdeRow:
    s: float
    c: float
    p_hat: float
    ci_low: float
    ci_high: float
    target: float
    ratio: float
    ratio_ci: tuple
    n: int
    artificial_creeps: int


def _require_budget(target, n):
    if target * n < MIN_EXPECTED_HITS:
        raise ResourceError(
            f"rare-event budget: target * n = {target * n:.3g} < {MIN_EXPECTED_HITS:g}; increase n"
        )


def _small_ball_rows(spec, alpha, ell, c_fn, s_list, n, policy, seed, range_, t, x):
    alpha = _check_alpha(alpha)
    check_index_hypothesis(spec, alpha, range_)
    cs = check_threshold_hypotheses(c_fn, s_list, range_)
    scale = t ** (-alpha) * x ** alpha
    rows = []
    for k, (s, c) in enumerate(zip(s_list, cs)):
        s = float(s)
        target = lde_target(alpha, ell, s, c) * scale
        _require_budget(target, n)
        batch = batch_passages(spec, s * t, policy, n, seed, tag=k)
        est = lde_estimate(batch, x * c / t)
        rows.append(LdeRow(
            s, c, est.p_hat, est.ci_low, est.ci_high, target, est.p_hat / target,
            (est.ci_low / target, est.ci_high / target), int(n), batch.artificial_creeps,
        ))
    return rows


def lde_theorem_check(spec, alpha, ell, c_fn: Callable, s_list, n, policy, seed, range="long"):
    """Ratio of the simulated small-ball probability to its asymptotic target at each level.

    Level ``s_list[k]`` uses stream tag ``k``.  Convergence of the ratio
    towards 1 along ``s_list`` is what the asymptotic statement predicts.
    """
    _check_range(range)
    return _small_ball_rows(spec, alpha, ell, c_fn, s_list, n, policy, seed, range, 1.0, 1.0)


@dataclass(frozen=True)
class ScaledProbabilityRow:
    s: float
    c: float
    p_hat: float
    normalized: float
    limit: float
    ratio: float
    ci_low: float
    ci_high: float
    target: float


def scaled_probability_check(spec, alpha, ell, c_fn, t, x, s_list, n, policy, seed, range="long"):
    """Two-parameter version of the small-ball check.

    For each level ``s`` (``c = c_fn(s)``), simulates passages over ``s t``
    and returns::

        normalized = ell(c s) / (c**alpha ell(s)) * P(X_{T(st)-}/(c s) <= x)

    with its limit ``sin(pi alpha)/(pi alpha) * t**-alpha * x**alpha``.  At
    ``t = x = 1`` it draws the same samples as :func:`lde_theorem_check` and
    its ``ratio`` column is identical.
    """
    t = float(t)
    x = float(x)
    if not (t > 0.0 and x > 0.0):
        raise DomainError("t and x must be positive")
    _check_range(range)
    alpha = _check_alpha(alpha)
    rows = _small_ball_rows(spec, alpha, ell, c_fn, s_list, n, policy, seed, range, t, x)
    limit = small_t_constant(alpha) * t ** (-alpha) * x ** alpha
    return [
        ScaledProbabilityRow(r.s, r.c, r.p_hat, r.ratio * limit, limit, r.ratio,
                             r.ci_low, r.ci_high, r.target)
        for r in rows
    ]


__all__ = [
    "beta_cdf", "beta_cdf_small_t_asymptote", "small_t_constant", "EmpiricalCdf", "ks_distance",
    "LdeTarget", "lde_target", "lde_estimate", "wilson_interval", "CFunction", "c_fn_from_dict",
    "check_threshold_hypotheses", "check_index_hypothesis", "dl_theorem_check", "DLCheck",
    "lde_theorem_check", "LdeRow", "scaled_probability_check", "ScaledProbabilityRow",
    "TruncationPolicy",
]
