"""Independent reference computations used to freeze expected values.

Nothing here imports the package under test: each oracle recomputes its
quantity by a different route (direct quadrature, numpy's own Philox,
renewal-equation integration) so that agreement is evidence, not tautology.
"""
import math
from functools import lru_cache

import numpy as np
from scipy import integrate

# ---------------------------------------------------------------- Beta law


def beta_cdf_quad(alpha, t):
    """``sin(pi a)/pi * int_0^t x**(a-1) (1-x)**-a dx`` by adaptive quadrature."""
    if t <= 0.0:
        return 0.0
    const = math.sin(math.pi * alpha) / math.pi
    f = lambda x: x ** (alpha - 1.0) * (1.0 - x) ** (-alpha)
    # split so both endpoint singularities get their own panel
    mid = min(t, 0.5)
    val = integrate.quad(f, 0.0, mid, epsabs=0, epsrel=1e-12, limit=200)[0]
    if t > mid:
        val += integrate.quad(f, mid, t, epsabs=0, epsrel=1e-12, limit=200)[0]
    return const * val


def arcsine_cdf(t):
    # reflected above 1/2: asin(sqrt(t)) loses all digits as t -> 1
    if t > 0.5:
        return 1.0 - 2.0 / math.pi * math.asin(math.sqrt(1.0 - t))
    return 2.0 / math.pi * math.asin(math.sqrt(t))


# ---------------------------------------------------------------- Laplace exponent


def phi_from_density(density, lam, breaks=(1.0,)):
    """``int_0^inf (1 - exp(-lam x)) pi(x) dx`` from a Levy density."""
    f = lambda x: -math.expm1(-lam * x) * density(x)
    pts = sorted({0.0, *breaks, 1.0 / lam})
    val = 0.0
    for a, b in zip(pts, pts[1:]):
        val += integrate.quad(f, a, b, epsabs=0, epsrel=1e-11, limit=400)[0]
    val += integrate.quad(f, pts[-1], math.inf, epsabs=0, epsrel=1e-11, limit=400)[0]
    return val


def stable_density(alpha, scale=1.0):
    return lambda x: scale * alpha / math.gamma(1.0 - alpha) * x ** (-alpha - 1.0)


def tempered_density(alpha, theta, scale=1.0):
    return lambda x: scale * alpha / math.gamma(1.0 - alpha) * x ** (-alpha - 1.0) * math.exp(-theta * x)


def gamma_integral(z):
    """``int_0^inf x**(z-1) e^-x dx``."""
    f = lambda x: x ** (z - 1.0) * math.exp(-x)
    return integrate.quad(f, 0, 1, epsrel=1e-13)[0] + integrate.quad(f, 1, math.inf, epsrel=1e-13)[0]


# ---------------------------------------------------------------- RNG


def numpy_philox_block(counter, key):
    """Philox4x64-10 output for ``counter`` using numpy's implementation.

    numpy increments the counter before producing a block, so the state is
    set to ``counter - 1`` (with borrow across the 256-bit counter).
    """
    c = sum(int(v) << (64 * i) for i, v in enumerate(counter))
    c = (c - 1) % (1 << 256)
    words = [(c >> (64 * i)) & ((1 << 64) - 1) for i in range(4)]
    bg = np.random.Philox(key=np.array(key, dtype=np.uint64))
    st = bg.state
    st["state"]["counter"] = np.array(words, dtype=np.uint64)
    st["buffer_pos"] = 4
    bg.state = st
    return [int(v) for v in bg.random_raw(4)]


# ---------------------------------------------------------------- renewal oracle


STEHFEST_N = 14


def _stehfest(n=STEHFEST_N):
    h = n // 2
    out = []
    for k in range(1, n + 1):
        s = 0.0
        for j in range((k + 1) // 2, min(k, h) + 1):
            s += j ** h * math.factorial(2 * j) / (
                math.factorial(h - j) * math.factorial(j) * math.factorial(j - 1)
                * math.factorial(k - j) * math.factorial(2 * j - k))
        out.append((-1) ** (k + h) * s)
    return out


class RenewalOracle:
    """Exact law of the undershoot for a driftless subordinator.

    ``P(X_{T(s)-} <= y) = int_0^y U(dz) Pi(s - z, inf)`` with renewal
    function ``U`` recovered from ``1 / (lam Phi(lam))`` by Gaver-Stehfest;
    integration by parts turns it into
    ``U(y) tail(s - y) - int_0^y U(z) |tail'(s - z)| dz``.
    """

    def __init__(self, tail, tail_density):
        self.tail = tail
        self.density = tail_density
        self._w = _stehfest()
        self.phi = lru_cache(maxsize=None)(self._phi)

    def _phi(self, lam):
        def f(u):
            if abs(u) > 700.0:
                return 0.0
            x = math.exp(u)
            if lam * x > 745.0:
                return 0.0
            return math.exp(-lam * x) * self.tail(x) * x

        c = math.log(1.0 / lam)
        lo = integrate.quad(f, -math.inf, c, epsrel=1e-11, limit=400)[0]
        hi = integrate.quad(f, c, math.inf, epsrel=1e-11, limit=400)[0]
        return lam * (lo + hi)

    def renewal(self, y):
        step = math.log(2.0) / y
        return step * sum(w / ((k * step) * self.phi(k * step)) for k, w in enumerate(self._w, 1))

    def undershoot_cdf(self, s, y):
        corr = integrate.quad(lambda z: self.renewal(z) * self.density(s - z), 0.0, y,
                              limit=200, epsrel=1e-8)[0]
        return self.renewal(y) * self.tail(s - y) - corr


def log_shift_tabulated_oracle(alpha=0.5):
    """Oracle for the tail ``x**-a (1 + log(1 + x)) / Gamma(1 - a)``."""
    g = math.gamma(1.0 - alpha)
    tail = lambda x: x ** -alpha * (1.0 + math.log1p(x)) / g
    dens = lambda x: (alpha * x ** (-alpha - 1.0) * (1.0 + math.log1p(x)) - x ** -alpha / (1.0 + x)) / g
    return RenewalOracle(tail, dens)
