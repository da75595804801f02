"""Slowly varying functions and numerical regular-variation checks."""
from __future__ import annotations

import difflib
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnknownFamilyError
from .model import levy_tail
from .special import gamma_fn

ELL_KINDS = ("constant", "log_shift", "iter_log", "power_probe")
POTTER_A_MAX = 1e6

# Default Potter grids: c reaches 1e-80 so that a power-type departure from
# slow variation (ratio ~ c**-rho with rho > epsilon) needs A > POTTER_A_MAX.
POTTER_S_GRID = tuple(10.0 ** k for k in range(0, 9))
POTTER_C_GRID = tuple(10.0 ** (-k) for k in range(1, 81))


@dataclass(frozen=True)
class SlowVaryingFn:
    """A named positive function ``ell`` on (0, inf).

    ``kind`` is one of ``constant`` (``value``), ``log_shift``
    (``1 + log(1 + x)``), ``iter_log`` (``1 + log(1 + log(1 + x))``) or
    ``power_probe`` (``x**rho``; not slowly varying, used in negative tests).
    ``reciprocal=True`` evaluates the base kind at ``1/x``, which turns the
    kinds that vary slowly at infinity into ones that vary slowly at 0+.
    """

    kind: str = "constant"
    value: float = 1.0
    rho: float = 0.0
    varying_at: str = "infinity"
    reciprocal: bool = False

    def __post_init__(self):
        if self.kind not in ELL_KINDS:
            near = difflib.get_close_matches(str(self.kind), ELL_KINDS, n=1)
            hint = f"; did you mean {near[0]!r}?" if near else ""
            raise UnknownFamilyError(f"unknown slowly varying kind {self.kind!r}{hint}")
        if self.varying_at not in ("infinity", "zero"):
            raise ValueError(f"varying_at must be 'infinity' or 'zero', got {self.varying_at!r}")
        if self.kind == "constant" and not self.value > 0.0:
            raise DomainError("constant slowly varying function needs value > 0")
        if self.kind == "power_probe" and self.rho == 0.0:
            raise DomainError("power_probe needs rho != 0")

    @property
    def power_index(self):
        """Index of regular variation at ``varying_at`` (0 unless a power probe)."""
        if self.kind != "power_probe":
            return 0.0
        return -self.rho if self.reciprocal else self.rho

    def describe(self):
        base = {
            "constant": f"{self.value:g}",
            "log_shift": "(1+log(1+x))",
            "iter_log": "(1+log(1+log(1+x)))",
            "power_probe": f"x^{self.rho:g}",
        }[self.kind]
        return base.replace("x", "(1/x)") if self.reciprocal else base

    def to_dict(self):
        out = {"kind": self.kind, "varying_at": self.varying_at}
        if self.kind == "constant":
            out["value"] = self.value
        if self.kind == "power_probe":
            out["rho"] = self.rho
        if self.reciprocal:
            out["reciprocal"] = True
        return out

    def __call__(self, x):
        return ell_eval(self, x)


def ell_from_dict(data):
    if isinstance(data, str):
        data = {"kind": data}
    if not isinstance(data, dict) or "kind" not in data:
        raise UnknownFamilyError("ell descriptor must be a mapping with a 'kind' field")
    return SlowVaryingFn(
        kind=data["kind"],
        value=float(data.get("value", 1.0)),
        rho=float(data.get("rho", 0.0)),
        varying_at=data.get("varying_at", "infinity"),
        reciprocal=bool(data.get("reciprocal", False)),
    )


def ell_eval(ell, x):
    """Evaluate ``ell(x)`` for ``x > 0``."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"ell_eval requires x > 0, got {x!r}")
    if ell.reciprocal:
        arr = 1.0 / arr
    if ell.kind == "constant":
        out = np.full_like(arr, ell.value)
    elif ell.kind == "log_shift":
        out = 1.0 + np.log1p(arr)
    elif ell.kind == "iter_log":
        out = 1.0 + np.log1p(np.log1p(arr))
    else:
        out = arr ** ell.rho
    return float(out) if np.ndim(out) == 0 else out


def karamata_ratio(spec, alpha, ell, x):
    """``Pi(x, inf) * Gamma(1 - alpha) / (x**-alpha * ell(x))``.

    Tends to 1 (as x -> inf, resp. 0+) exactly when ``Phi`` is regularly
    varying at 0+ (resp. inf) with index ``alpha`` and the same ``ell``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"karamata_ratio requires x > 0, got {x!r}")
    tail = levy_tail(spec, x)
    return tail * gamma_fn(1.0 - alpha) / (x ** (-alpha) * ell_eval(ell, x))


@dataclass(frozen=True)
class PotterResult:
    holds: bool
    A: float
    R: float


def potter_constant(ell, epsilon, s_values, c_values):
    """Smallest ``A >= 1`` with ``A**-1 c**eps <= ell(s)/ell(cs) <= A c**-eps`` on the points."""
    s = np.asarray(s_values, dtype=np.float64)[:, None]
    c = np.asarray(c_values, dtype=np.float64)[None, :]
    ratio = ell_eval(ell, s) / ell_eval(ell, c * s)
    ce = c ** epsilon
    need = np.maximum(ratio * ce, ce / ratio)
    return max(1.0, float(np.max(need)))


def potter_check(ell, epsilon, s_grid=POTTER_S_GRID, c_grid=POTTER_C_GRID, a_max=POTTER_A_MAX):
    """Bounded grid search for Potter constants ``(A, R)``.

    Thresholds are tried from the bottom of ``s_grid`` upward (``R = 0``
    keeps every grid level, ``R = s_k`` keeps levels above ``s_k``); the
    first one whose constant ``A`` does not exceed ``a_max`` is returned.  The
    largest level always remains in play, so the check cannot pass vacuously.
    """
    if not epsilon > 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    s = np.sort(np.asarray(s_grid, dtype=np.float64))
    c = np.asarray(c_grid, dtype=np.float64)
    if s.size == 0 or c.size == 0:
        raise DomainError("potter_check needs non-empty grids")
    if np.any(s <= 0.0) or np.any((c <= 0.0) | (c >= 1.0)):
        raise DomainError("s_grid must be positive and c_grid must lie in (0, 1)")
    thresholds = [0.0] + [float(v) for v in s[:-1]]
    best = math.inf
    for R in thresholds:
        A = potter_constant(ell, epsilon, s[s > R], c)
        best = min(best, A)
        if A <= a_max:
            return PotterResult(True, A, R)
    return PotterResult(False, best, float(s[-2]) if s.size > 1 else 0.0)
