"""Parametric subordinator specifications.

A subordinator is described by its drift ``d >= 0`` and Lévy measure ``Pi``.
Every family exposes the tail ``Pi(x, inf)``; the Laplace exponent

    Phi(lam) = lam * (d + int_0^inf exp(-lam x) Pi(x, inf) dx)

is available in closed form for the parametric families and by quadrature of
the tail for all of them.

Serialized form (JSON-compatible)::

    {"drift": 0.0, "family": {"kind": "stable", "alpha": 0.5, "scale": 1.0}}

Family kinds: ``none``, ``stable`` (alpha, scale), ``tempered_stable``
(alpha, theta, scale), ``compound_poisson`` (rate, jumps={"law":
"exponential", "mean"} or {"law": "pareto", "alpha", "xmin"}) and
``tabulated`` (either explicit ``x``/``tail`` arrays or ``alpha``/``ell``
with optional ``scale``, ``x_min``, ``x_max``, ``points``).
"""
from __future__ import annotations

import bisect
import difflib
import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate
from scipy import special as sp

from .errors import DomainError, NumericError, SpecError, UnknownFamilyError
from .special import gamma_fn, upper_gamma

QUAD_RTOL = 1e-9
QUAD_ATOL = 1e-300


def _positive(name, value):
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise SpecError(f"{name} must be a positive finite number, got {value!r}")
    return value


def _unit_open(name, value):
    value = float(value)
    if not 0.0 < value < 1.0:
        raise SpecError(f"{name} must lie in (0, 1), got {value!r}")
    return value


@dataclass(frozen=True)
class NoJumps:
    """Empty Lévy measure; the process is pure drift."""


@dataclass(frozen=True)
class Stable:
    """Stable subordinator, ``E exp(-lam X_t) = exp(-scale * lam**alpha * t)``."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _unit_open("alpha", self.alpha))
        object.__setattr__(self, "scale", _positive("scale", self.scale))


@dataclass(frozen=True)
class TemperedStable:
    """Stable Lévy density exponentially tilted by ``exp(-theta x)``."""

    alpha: float
    theta: float
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _unit_open("alpha", self.alpha))
        object.__setattr__(self, "theta", _positive("theta", self.theta))
        object.__setattr__(self, "scale", _positive("scale", self.scale))


@dataclass(frozen=True)
class ExponentialJumps:
    mean: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _positive("mean", self.mean))


@dataclass(frozen=True)
class ParetoJumps:
    """Jump law with ``P(J > x) = (xmin / x)**alpha`` for ``x >= xmin``."""

    alpha: float
    xmin: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "xmin", _positive("xmin", self.xmin))


@dataclass(frozen=True)
class CompoundPoisson:
    rate: float
    jumps: Union[ExponentialJumps, ParetoJumps]

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))
        if not isinstance(self.jumps, (ExponentialJumps, ParetoJumps)):
            raise SpecError(f"unsupported jump law {self.jumps!r}")


@dataclass(frozen=True, eq=False)
class TabulatedTail:
    """Lévy tail given by nodes ``(x_i, Pi(x_i, inf))``.

    Between nodes the tail is interpolated linearly in log-log coordinates,
    which keeps it monotone and makes every segment a pure power; outside the
    table the end segments are extended as powers.  ``index_at_infinity`` and
    ``index_at_zero`` record the regular-variation index of the tail
    (``Pi(x, inf) ~ x**-index * slowly varying``) when known.
    """

    x: np.ndarray
    tail: np.ndarray
    index_at_infinity: float | None = None
    index_at_zero: float | None = None
    label: str = ""
    source: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        tail = np.array(self.tail, dtype=np.float64)
        if x.ndim != 1 or x.shape != tail.shape or x.size < 2:
            raise SpecError("tabulated tail needs matching 1-d x/tail arrays with at least 2 nodes")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(tail))):
            raise SpecError("tabulated tail contains non-finite values")
        if x[0] <= 0.0 or np.any(np.diff(x) <= 0.0):
            raise SpecError("tabulated x must be positive and strictly increasing")
        if np.any(tail <= 0.0):
            raise SpecError("tabulated tail values must be strictly positive")
        if np.any(np.diff(tail) > 0.0):
            raise SpecError("tabulated tail must be non-increasing")
        lx = np.log(x)
        lp = np.log(tail)
        slopes = np.diff(lp) / np.diff(lx)
        if slopes[-1] >= 0.0:
            raise SpecError("tabulated tail must decay beyond the last node (last segment is flat)")
        if slopes[0] <= -1.0:
            raise SpecError(
                "tabulated tail is not integrable at 0+: int_0^1 Pi(x, inf) dx diverges "
                f"(leading power {slopes[0]:.4g} <= -1)"
            )
        for arr in (x, tail, lx, lp, slopes):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "_lx", lx)
        object.__setattr__(self, "_lp", lp)
        object.__setattr__(self, "_slopes", slopes)
        object.__setattr__(self, "_lx_list", lx.tolist())
        object.__setattr__(self, "_lp_list", lp.tolist())
        object.__setattr__(self, "_sl_list", slopes.tolist())
        near_one = self.integral(1.0)
        if not (math.isfinite(near_one) and near_one >= 0.0):
            raise SpecError(f"int_0^1 Pi(x, inf) dx is not finite ({near_one!r})")

    @classmethod
    def from_function(cls, fn, x_min=1e-12, x_max=1e12, points=2401, **kwargs):
        """Tabulate ``fn`` on a log-spaced grid."""
        x = np.logspace(math.log10(x_min), math.log10(x_max), int(points))
        tail = np.array([float(fn(v)) for v in x])
        return cls(x, tail, **kwargs)

    @classmethod
    def regularly_varying(cls, alpha, ell, scale=1.0, x_min=1e-12, x_max=1e12, points=2401):
        """Tail ``scale * x**-alpha * ell(x) / Gamma(1 - alpha)``.

        By Karamata's Tauberian theorem the resulting Laplace exponent satisfies
        ``Phi(lam) ~ scale * lam**alpha * ell(1/lam)`` as ``lam -> 0+``.
        """
        from .regvar import ell_eval

        alpha = _unit_open("alpha", alpha)
        scale = _positive("scale", scale)
        g = gamma_fn(1.0 - alpha)
        index = alpha - ell.power_index
        return cls.from_function(
            lambda v: scale * v ** (-alpha) * ell_eval(ell, v) / g,
            x_min=x_min,
            x_max=x_max,
            points=points,
            index_at_infinity=index,
            index_at_zero=index,
            label=f"x^-{alpha:g} {ell.describe()} / Gamma(1-{alpha:g})",
            source={"alpha": alpha, "ell": ell.to_dict(), "scale": scale,
                    "x_min": x_min, "x_max": x_max, "points": int(points)},
        )

    @property
    def finite_activity(self):
        return self._slopes[0] == 0.0

    @property
    def kernel_arrays(self):
        return self._lx, self._lp, self._slopes

    def evaluate_scalar(self, x):
        lx = math.log(x)
        nodes = self._lx_list
        if lx <= nodes[0]:
            return math.exp(self._lp[0] + self._slopes[0] * (lx - nodes[0]))
        i = bisect.bisect_right(nodes, lx) - 1
        if i >= len(nodes) - 1:
            i = len(nodes) - 2
        return math.exp(self._lp_list[i] + self._sl_list[i] * (lx - nodes[i]))

    def evaluate(self, x):
        lx = np.log(np.asarray(x, dtype=np.float64))
        out = np.interp(lx, self._lx, self._lp)
        lo = lx < self._lx[0]
        hi = lx > self._lx[-1]
        out = np.where(lo, self._lp[0] + self._slopes[0] * (lx - self._lx[0]), out)
        out = np.where(hi, self._lp[-1] + self._slopes[-1] * (lx - self._lx[-1]), out)
        return np.exp(out)

    def integral(self, upper):
        """``int_0^upper Pi(x, inf) dx`` exactly for the piecewise-power tail."""
        upper = float(upper)
        if upper <= 0.0:
            return 0.0
        x, p, b = self.x, self.tail, self._slopes

        def seg(x0, p0, slope, x1):
            # int_{x0}^{x1} p0 (x/x0)^slope dx
            if slope == -1.0:
                return p0 * x0 * math.log(x1 / x0)
            return p0 * x0 * ((x1 / x0) ** (slope + 1.0) - 1.0) / (slope + 1.0)

        total = 0.0
        first = min(upper, x[0])
        total += p[0] * x[0] * (first / x[0]) ** (b[0] + 1.0) / (b[0] + 1.0)
        if upper <= x[0]:
            return total
        k = int(np.searchsorted(x, upper, side="right")) - 1
        k_full = min(k, x.size - 1)
        if k_full >= 1:
            x0, x1, p0 = x[:k_full], x[1:k_full + 1], p[:k_full]
            bb = b[:k_full]
            with np.errstate(divide="ignore", invalid="ignore"):
                pieces = np.where(
                    bb == -1.0,
                    p0 * x0 * np.log(x1 / x0),
                    p0 * x0 * ((x1 / x0) ** (bb + 1.0) - 1.0) / (bb + 1.0),
                )
            total += float(np.sum(pieces))
        if upper > x[k_full]:
            slope = b[min(k_full, b.size - 1)]
            total += seg(x[k_full], p[k_full], slope, upper)
        return total


Family = Union[NoJumps, Stable, TemperedStable, CompoundPoisson, TabulatedTail]


@dataclass(frozen=True, eq=False)
class SubordinatorSpec:
    """Drift coefficient plus a Lévy-measure family."""

    drift: float = 0.0
    family: Family = field(default_factory=NoJumps)

    def __post_init__(self):
        d = float(self.drift)
        if not (d >= 0.0 and math.isfinite(d)):
            raise SpecError(f"drift must be a finite nonnegative number, got {self.drift!r}")
        object.__setattr__(self, "drift", d)
        if not isinstance(self.family, (NoJumps, Stable, TemperedStable, CompoundPoisson, TabulatedTail)):
            raise SpecError(f"unknown family object {self.family!r}")
        if d == 0.0 and isinstance(self.family, NoJumps):
            raise SpecError("the process is identically zero (no drift and no jumps)")

    def __eq__(self, other):
        if not isinstance(other, SubordinatorSpec):
            return NotImplemented
        return spec_to_dict(self) == spec_to_dict(other)

    def __hash__(self):
        return hash(repr(sorted(spec_to_dict(self).items(), key=str)))

    @property
    def kind(self):
        return family_kind(self.family)

    @property
    def finite_activity(self):
        f = self.family
        if isinstance(f, (NoJumps, CompoundPoisson)):
            return True
        if isinstance(f, TabulatedTail):
            return f.finite_activity
        return False


def family_kind(family):
    return {
        NoJumps: "none",
        Stable: "stable",
        TemperedStable: "tempered_stable",
        CompoundPoisson: "compound_poisson",
        TabulatedTail: "tabulated",
    }[type(family)]


# ----------------------------------------------------------------------------
# Lévy tail


def levy_tail(spec, x):
    """``Pi(x, inf)`` for ``x > 0`` (scalars or arrays)."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"levy_tail requires x > 0, got {x!r}")
    f = spec.family
    if isinstance(f, NoJumps):
        out = np.zeros_like(arr)
    elif isinstance(f, Stable):
        out = f.scale * arr ** (-f.alpha) / gamma_fn(1.0 - f.alpha)
    elif isinstance(f, TemperedStable):
        a, th = f.alpha, f.theta
        z = th * arr
        out = f.scale * (
            arr ** (-a) * np.exp(-z) / gamma_fn(1.0 - a) - th ** a * sp.gammaincc(1.0 - a, z)
        )
        out = np.maximum(out, 0.0)
    elif isinstance(f, CompoundPoisson):
        j = f.jumps
        if isinstance(j, ExponentialJumps):
            out = f.rate * np.exp(-arr / j.mean)
        else:
            out = f.rate * np.where(arr < j.xmin, 1.0, (j.xmin / np.maximum(arr, j.xmin)) ** j.alpha)
    else:
        out = f.evaluate(arr)
    return float(out) if np.ndim(out) == 0 else out


def _scalar_tail(spec):
    if isinstance(spec.family, TabulatedTail):
        return spec.family.evaluate_scalar
    return lambda x: levy_tail(spec, x)


def total_mass(spec):
    """``Pi((0, inf))``; infinite for infinite-activity families."""
    f = spec.family
    if isinstance(f, NoJumps):
        return 0.0
    if isinstance(f, CompoundPoisson):
        return f.rate
    if isinstance(f, TabulatedTail) and f.finite_activity:
        return float(f.tail[0])
    return math.inf


def tail_integral(spec, upper):
    """``int_0^upper Pi(x, inf) dx`` in closed form."""
    upper = float(upper)
    if upper <= 0.0:
        return 0.0
    f = spec.family
    if isinstance(f, NoJumps):
        return 0.0
    if isinstance(f, Stable):
        return f.scale * upper ** (1.0 - f.alpha) / gamma_fn(2.0 - f.alpha)
    if isinstance(f, TemperedStable):
        a, th = f.alpha, f.theta
        mean_part = f.scale * a * th ** (a - 1.0) * float(sp.gammainc(1.0 - a, th * upper))
        return upper * levy_tail(spec, upper) + mean_part
    if isinstance(f, CompoundPoisson):
        j = f.jumps
        if isinstance(j, ExponentialJumps):
            return f.rate * j.mean * -math.expm1(-upper / j.mean)
        if upper <= j.xmin:
            return f.rate * upper
        a = j.alpha
        rest = math.log(upper / j.xmin) if a == 1.0 else ((upper / j.xmin) ** (1.0 - a) - 1.0) / (1.0 - a)
        return f.rate * j.xmin * (1.0 + rest)
    return f.integral(upper)


# ----------------------------------------------------------------------------
# Laplace exponent


def _phi_closed(spec, lam):
    f = spec.family
    d = spec.drift * lam
    if isinstance(f, NoJumps):
        return d
    if isinstance(f, Stable):
        return d + f.scale * lam ** f.alpha
    if isinstance(f, TemperedStable):
        # (lam + theta)^alpha - theta^alpha without cancellation at small lam
        return d + f.scale * f.theta ** f.alpha * math.expm1(f.alpha * math.log1p(lam / f.theta))
    if isinstance(f, CompoundPoisson):
        j = f.jumps
        if isinstance(j, ExponentialJumps):
            return d + f.rate * lam * j.mean / (1.0 + lam * j.mean)
        z = lam * j.xmin
        return d + f.rate * (-math.expm1(-z) + z ** j.alpha * upper_gamma(1.0 - j.alpha, z))
    return None


def _tail_breakpoints(spec):
    f = spec.family
    if isinstance(f, CompoundPoisson) and isinstance(f.jumps, ParetoJumps):
        return [math.log(f.jumps.xmin)]
    if isinstance(f, TabulatedTail):
        # chunks of nodes keep each quadrature piece nearly smooth
        return [float(v) for v in f._lx[::24]] + [float(f._lx[-1])]
    return []


def _quad_piece(fn, lo, hi):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, lo, hi, epsabs=QUAD_ATOL, epsrel=QUAD_RTOL, limit=500)
    bad = [w for w in caught if issubclass(w.category, integrate.IntegrationWarning)]
    return val, err, (str(bad[-1].message) if bad else None)


def _quad_log(fn, breaks, fine=None):
    """Integrate ``fn(u)`` over the real line split at ``breaks``.

    A piece whose quadrature warns is integrated again between the ``fine``
    breakpoints inside it (e.g. every table node); what still warns is
    tolerated only if negligible next to the total.
    """
    edges = [-math.inf] + sorted(set(breaks)) + [math.inf]
    fine = np.asarray(fine if fine is not None else [], dtype=np.float64)
    total = 0.0
    abserr = 0.0
    flagged = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, msg = _quad_piece(fn, lo, hi)
        if msg is not None:
            inner = fine[(fine > lo) & (fine < hi)]
            if inner.size:
                sub = [lo, *inner.tolist(), hi]
                val = err = 0.0
                msg = None
                for a, b in zip(sub[:-1], sub[1:]):
                    v, e, m = _quad_piece(fn, a, b)
                    val += v
                    err += e
                    msg = m or msg
        total += val
        abserr += err
        if msg is not None:
            flagged.append((lo, hi, abs(val) + err, msg))
    for lo, hi, size, msg in flagged:
        if size > QUAD_RTOL * abs(total):
            raise NumericError(f"tail quadrature failed on [{lo}, {hi}]: {msg}")
    return total, abserr


def phi_quadrature(spec, lam):
    """Laplace exponent from the tail representation, by adaptive quadrature.

    The integral is taken in ``u = log x``; the range is split at
    ``x = 1/lam`` where the integrand turns from tail-dominated to
    exponentially damped, and at any kinks of the family.
    """
    lam = float(lam)
    if lam == 0.0:
        return 0.0
    if isinstance(spec.family, NoJumps):
        return spec.drift * lam

    tail = _scalar_tail(spec)

    def integrand(u):
        if u < -700.0 or u > 700.0:
            return 0.0
        x = math.exp(u)
        if lam * x > 745.0:
            return 0.0
        return math.exp(-lam * x) * tail(x) * x

    fine = spec.family._lx if isinstance(spec.family, TabulatedTail) else None
    val, _ = _quad_log(integrand, [-math.log(lam)] + _tail_breakpoints(spec), fine)
    return lam * (spec.drift + val)


def phi(spec, lam, method="auto"):
    """Laplace exponent ``Phi(lam)``.

    ``method`` is ``"closed"``, ``"quadrature"`` or ``"auto"`` (closed form
    when the family has one, otherwise quadrature of the tail at relative
    tolerance ``QUAD_RTOL``).
    """
    lam = float(lam)
    if not (lam >= 0.0):
        raise DomainError(f"phi requires lambda >= 0, got {lam!r}")
    if not isinstance(spec, SubordinatorSpec):
        raise SpecError(f"expected a SubordinatorSpec, got {type(spec).__name__}")
    if lam == 0.0:
        return 0.0
    if method == "quadrature":
        return phi_quadrature(spec, lam)
    value = _phi_closed(spec, lam)
    if value is None:
        if method == "closed":
            raise SpecError(f"family {spec.kind!r} has no closed-form Laplace exponent")
        return phi_quadrature(spec, lam)
    return value


def laplace_exponent_index(spec, at):
    """Regular-variation index of ``Phi`` at ``"zero"`` (lam -> 0+) or ``"infinity"``.

    Returns ``None`` when the family carries no index information.
    """
    if at not in ("zero", "infinity"):
        raise ValueError(f"at must be 'zero' or 'infinity', got {at!r}")
    f = spec.family
    d = spec.drift
    if at == "infinity" and d > 0.0:
        return 1.0
    if isinstance(f, NoJumps):
        return 1.0
    if isinstance(f, Stable):
        return f.alpha
    if isinstance(f, TemperedStable):
        return 1.0 if at == "zero" else f.alpha
    if isinstance(f, CompoundPoisson):
        if at == "infinity":
            return 0.0
        if isinstance(f.jumps, ExponentialJumps):
            return 1.0
        return min(f.jumps.alpha, 1.0)
    idx = f.index_at_infinity if at == "zero" else f.index_at_zero
    if idx is None:
        slope = f._slopes[-1] if at == "zero" else f._slopes[0]
        idx = -float(slope)
    if at == "zero" and d > 0.0 and idx >= 1.0:
        return 1.0
    return min(max(idx, 0.0), 1.0)


# ----------------------------------------------------------------------------
# serialization

FAMILY_KINDS = ("none", "stable", "tempered_stable", "compound_poisson", "tabulated")
JUMP_LAWS = ("exponential", "pareto")


def _unknown(kind, valid, what):
    near = difflib.get_close_matches(str(kind), valid, n=1)
    hint = f"; did you mean {near[0]!r}?" if near else ""
    return UnknownFamilyError(f"unknown {what} {kind!r} (valid: {', '.join(valid)}){hint}")


def spec_to_dict(spec):
    f = spec.family
    kind = family_kind(f)
    fam = {"kind": kind}
    if isinstance(f, Stable):
        fam.update(alpha=f.alpha, scale=f.scale)
    elif isinstance(f, TemperedStable):
        fam.update(alpha=f.alpha, theta=f.theta, scale=f.scale)
    elif isinstance(f, CompoundPoisson):
        if isinstance(f.jumps, ExponentialJumps):
            jumps = {"law": "exponential", "mean": f.jumps.mean}
        else:
            jumps = {"law": "pareto", "alpha": f.jumps.alpha, "xmin": f.jumps.xmin}
        fam.update(rate=f.rate, jumps=jumps)
    elif isinstance(f, TabulatedTail):
        if f.source is not None:
            fam.update(f.source)
        else:
            fam.update(x=[float(v) for v in f.x], tail=[float(v) for v in f.tail])
            if f.index_at_infinity is not None:
                fam["index_at_infinity"] = f.index_at_infinity
            if f.index_at_zero is not None:
                fam["index_at_zero"] = f.index_at_zero
    return {"drift": spec.drift, "family": fam}


def _take(params, key, default=None, required=True):
    if key in params:
        return params[key]
    if required and default is None:
        raise SpecError(f"missing family parameter {key!r}")
    return default


def spec_from_dict(data):
    """Build a :class:`SubordinatorSpec` from its serialized form."""
    if not isinstance(data, dict):
        raise SpecError("spec must be a mapping with 'drift' and 'family'")
    fam = data.get("family", {"kind": "none"})
    if not isinstance(fam, dict) or "kind" not in fam:
        raise SpecError("family must be a mapping with a 'kind' field")
    kind = fam["kind"]
    if kind not in FAMILY_KINDS:
        raise _unknown(kind, FAMILY_KINDS, "family kind")
    if kind == "none":
        family = NoJumps()
    elif kind == "stable":
        family = Stable(_take(fam, "alpha"), _take(fam, "scale", 1.0))
    elif kind == "tempered_stable":
        family = TemperedStable(_take(fam, "alpha"), _take(fam, "theta"), _take(fam, "scale", 1.0))
    elif kind == "compound_poisson":
        jumps = _take(fam, "jumps")
        law = jumps.get("law") if isinstance(jumps, dict) else None
        if law not in JUMP_LAWS:
            raise _unknown(law, JUMP_LAWS, "jump law")
        if law == "exponential":
            jl = ExponentialJumps(_take(jumps, "mean"))
        else:
            jl = ParetoJumps(_take(jumps, "alpha"), _take(jumps, "xmin"))
        family = CompoundPoisson(_take(fam, "rate"), jl)
    else:
        if "x" in fam or "tail" in fam:
            family = TabulatedTail(
                _take(fam, "x"),
                _take(fam, "tail"),
                index_at_infinity=fam.get("index_at_infinity"),
                index_at_zero=fam.get("index_at_zero"),
            )
        else:
            from .regvar import ell_from_dict

            family = TabulatedTail.regularly_varying(
                _take(fam, "alpha"),
                ell_from_dict(_take(fam, "ell")),
                scale=fam.get("scale", 1.0),
                x_min=fam.get("x_min", 1e-12),
                x_max=fam.get("x_max", 1e12),
                points=fam.get("points", 2401),
            )
    return SubordinatorSpec(drift=data.get("drift", 0.0), family=family)


__all__ = [
    "NoJumps", "Stable", "TemperedStable", "ExponentialJumps", "ParetoJumps",
    "CompoundPoisson", "TabulatedTail", "SubordinatorSpec", "levy_tail", "phi",
    "phi_quadrature", "gamma_fn", "tail_integral", "total_mass",
    "laplace_exponent_index", "spec_to_dict", "spec_from_dict", "FAMILY_KINDS",
]
