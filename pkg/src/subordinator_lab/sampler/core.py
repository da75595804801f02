"""First-passage sampling over a level ``s``.

Jumps larger than ``eps = eps_rel * s`` are simulated exactly; the smaller
ones are replaced by their mean, the drift ``delta(eps)``, when the policy
asks for compensation.  Finite-activity families are simulated without any
cutoff.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, NeverCrossesError, NumericError, ResourceError
from ..model import (
    CompoundPoisson, ExponentialJumps, NoJumps, Stable, TabulatedTail, TemperedStable,
    _quad_log, levy_tail, phi, tail_integral,
)
from ..rng import Substream, seed_key
from . import kernels

SAMPLE_CSV_HEADER = ("replica", "level", "crossing_time", "undershoot", "overshoot", "crept")
_EMPTY = np.zeros(2)


@dataclass(frozen=True)
class TruncationPolicy:
    """Small-jump cutoff ``eps = eps_rel * level`` and compensation switch.

    ``max_expected_events`` caps the a-priori bound on events per replica
    (``rate * e / Phi(1/s)``, from ``E T(s) = U(s) <= e / Phi(1/s)``);
    ``max_events`` is the hard per-replica stop.
    """

    eps_rel: float = 1e-5
    compensate: bool = True
    max_expected_events: float = 1e6
    max_events: int = 100_000_000

    def __post_init__(self):
        if not 0.0 < float(self.eps_rel) < 1.0:
            raise DomainError(f"eps_rel must lie in (0, 1), got {self.eps_rel!r}")


@dataclass(frozen=True)
class PassageSample:
    level: float
    crossing_time: float
    undershoot: float
    overshoot: float
    crept: bool

    def check(self):
        """Raise ``AssertionError`` if the record violates its invariants."""
        assert self.level > 0.0
        assert 0.0 <= self.undershoot <= self.level, self
        assert self.overshoot >= 0.0, self
        assert self.crossing_time >= 0.0, self
        if self.crept:
            assert self.overshoot == 0.0 and self.undershoot == self.level, self
        else:
            # crossing jump = overshoot + level - undershoot, strictly above the gap
            assert self.overshoot + self.level - self.undershoot > self.level - self.undershoot, self
        return self


@dataclass(frozen=True, eq=False)
class PassageBatch:
    """Struct-of-arrays batch of passage records, ordered by replica index."""

    level: float
    crossing_time: np.ndarray
    undershoot: np.ndarray
    overshoot: np.ndarray
    crept: np.ndarray
    first_replica: int = 0
    artificial_creeps: int = 0

    def __len__(self):
        return self.undershoot.size

    def __getitem__(self, i):
        return PassageSample(
            self.level, float(self.crossing_time[i]), float(self.undershoot[i]),
            float(self.overshoot[i]), bool(self.crept[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, PassageBatch):
            return NotImplemented
        return (
            self.level == other.level
            and np.array_equal(self.crossing_time, other.crossing_time)
            and np.array_equal(self.undershoot, other.undershoot)
            and np.array_equal(self.overshoot, other.overshoot)
            and np.array_equal(self.crept, other.crept)
        )

    @property
    def ratios(self):
        """Undershoot over level, ``X_{T(s)-} / s``."""
        return self.undershoot / self.level

    @property
    def artificial_creep_fraction(self):
        return self.artificial_creeps / max(len(self), 1)

    def check(self):
        """Vectorised invariant check over the whole batch."""
        s = self.level
        u, o, c = self.undershoot, self.overshoot, self.crept
        assert np.all((u >= 0.0) & (u <= s))
        assert np.all(o >= 0.0)
        assert np.all(self.crossing_time >= 0.0)
        assert np.all(~c | ((o == 0.0) & (u == s)))
        assert np.all(c | (o + s - u > s - u))
        return self

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            write_samples_csv(fh, self)


def write_samples_csv(fh, batch):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SAMPLE_CSV_HEADER)
    for i in range(len(batch)):
        w.writerow((
            batch.first_replica + i, repr(batch.level), repr(float(batch.crossing_time[i])),
            repr(float(batch.undershoot[i])), repr(float(batch.overshoot[i])), int(bool(batch.crept[i])),
        ))


def small_jump_drift(spec, eps, method="auto"):
    """Mean contribution of jumps below ``eps``: ``int_0^eps x Pi(dx)``.

    Equals ``int_0^eps Pi(x, inf) dx - eps * Pi(eps, inf)``.  The default uses
    closed forms; ``method="quadrature"`` integrates the tail numerically.
    """
    eps = float(eps)
    if not eps > 0.0:
        raise DomainError(f"small_jump_drift requires eps > 0, got {eps!r}")
    f = spec.family
    if isinstance(f, NoJumps):
        return 0.0
    if method == "quadrature":
        # int_0^eps (Pi(x, inf) - Pi(eps, inf)) dx, in log x; no cancellation at small eps
        at_eps = float(levy_tail(spec, eps))
        top = math.log(eps)

        def integrand(u):
            x = math.exp(u)
            if x == 0.0 or u >= top:
                return 0.0
            return (float(levy_tail(spec, x)) - at_eps) * x

        # tabulated tails are piecewise power laws: retry across their nodes
        fine = f._lx if isinstance(f, TabulatedTail) else None
        val, err = _quad_log(integrand, [top], fine)
        if not math.isfinite(val):
            raise NumericError(f"small-jump quadrature failed (err={err})")
        return max(val, 0.0)
    if isinstance(f, Stable):
        a = f.alpha
        return f.scale * a * eps ** (1.0 - a) / ((1.0 - a) * math.gamma(1.0 - a))
    if isinstance(f, TemperedStable):
        from scipy.special import gammainc

        a, th = f.alpha, f.theta
        return f.scale * a * th ** (a - 1.0) * float(gammainc(1.0 - a, th * eps))
    if isinstance(f, CompoundPoisson) and isinstance(f.jumps, ExponentialJumps):
        from scipy.special import gammainc

        m = f.jumps.mean
        return f.rate * m * float(gammainc(2.0, eps / m))
    return max(tail_integral(spec, eps) - eps * levy_tail(spec, eps), 0.0)


@dataclass(frozen=True)
class KernelPlan:
    """Everything a kernel needs for one (spec, level, policy)."""

    code: int
    params: np.ndarray
    tables: tuple
    eps: float
    log_tail_eps: float
    rate: float
    drift: float
    expected_events_bound: float


def plan(spec, level, policy):
    level = float(level)
    if not level > 0.0:
        raise DomainError(f"level must be positive, got {level!r}")
    f = spec.family
    tables = (_EMPTY, _EMPTY, _EMPTY)
    finite = spec.finite_activity
    eps = 0.0 if finite else policy.eps_rel * level
    params = np.zeros(4)
    if isinstance(f, NoJumps):
        code, rate = kernels.NONE, 0.0
    elif isinstance(f, Stable):
        code = kernels.STABLE
        params[:2] = f.alpha, f.scale
        rate = levy_tail(spec, eps)
    elif isinstance(f, TemperedStable):
        code = kernels.TEMPERED
        params[:3] = f.alpha, f.theta, f.scale
        # stable envelope with the same scale; thinned by exp(-theta x)
        rate = f.scale * eps ** (-f.alpha) / math.gamma(1.0 - f.alpha)
    elif isinstance(f, CompoundPoisson):
        rate = f.rate
        if isinstance(f.jumps, ExponentialJumps):
            code = kernels.CP_EXP
            params[:2] = f.rate, f.jumps.mean
        else:
            code = kernels.CP_PARETO
            params[:3] = f.rate, f.jumps.alpha, f.jumps.xmin
    else:
        assert isinstance(f, TabulatedTail)
        code = kernels.TABULATED
        tables = f.kernel_arrays
        rate = float(f.tail[0]) if finite else levy_tail(spec, eps)
    log_tail_eps = math.log(rate) if code == kernels.TABULATED else 0.0
    comp = 0.0
    if policy.compensate and not finite:
        comp = small_jump_drift(spec, eps)
    drift = spec.drift + comp
    if rate <= 0.0 and drift <= 0.0:
        raise NeverCrossesError(
            f"no jumps above eps={eps:g} and zero drift: level {level:g} is never crossed"
        )
    bound = rate * math.e / phi(spec, 1.0 / level) if rate > 0.0 else 0.0
    return KernelPlan(code, params, tables, eps, log_tail_eps, rate, drift, bound)


def _simulate(spec, level, policy, n, seed, tag, first_replica, backend):
    p = plan(spec, level, policy)
    if p.expected_events_bound > policy.max_expected_events:
        raise ResourceError(
            f"expected events per replica may reach {p.expected_events_bound:.3g} "
            f"(> budget {policy.max_expected_events:.3g}); raise eps_rel or the budget"
        )
    t, u, o, crept, status = kernels.run_passages(
        p.code, p.params, p.tables, level, p.eps, p.log_tail_eps, p.rate, p.drift,
        seed_key(seed), tag, first_replica, n, policy.max_events, backend=backend,
    )
    bad = np.flatnonzero(status != kernels.STATUS_OK)
    if bad.size:
        rep = first_replica + int(bad[0])
        raise ResourceError(
            f"replica {rep} exceeded {policy.max_events} events before crossing level {level:g}",
            replica=rep,
        )
    artificial = int(np.count_nonzero(crept)) if spec.drift == 0.0 else 0
    return PassageBatch(float(level), t, u, o, crept, first_replica, artificial)


def sample_passage(spec, s, policy, rng, backend=None):
    """One first-passage record over level ``s`` drawn from substream ``rng``."""
    if not isinstance(rng, Substream):
        raise TypeError("rng must be a Substream")
    return _simulate(spec, s, policy, 1, rng.seed, rng.tag, rng.replica, backend)[0]


def batch_passages(spec, s, policy, n, seed, tag=0, backend=None):
    """``n`` independent passage records; replica ``i`` uses substream ``(seed, i, tag)``."""
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return _simulate(spec, s, policy, n, seed, tag, 0, backend)
