import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subordinator_lab.errors import DomainError, UnknownFamilyError
from subordinator_lab.model import CompoundPoisson, ExponentialJumps, Stable, SubordinatorSpec, TemperedStable
from subordinator_lab.regvar import (
    POTTER_C_GRID, POTTER_S_GRID, SlowVaryingFn, ell_eval, ell_from_dict, karamata_ratio,
    potter_check, potter_constant,
)

CONST = SlowVaryingFn("constant")
LOG = SlowVaryingFn("log_shift")
ITER = SlowVaryingFn("iter_log")
PROBE = SlowVaryingFn("power_probe", rho=0.2)


def test_ell_examples():
    assert ell_eval(CONST, 123.0) == 1.0
    assert ell_eval(LOG, math.e - 1.0) == pytest.approx(2.0, rel=1e-15)
    assert ell_eval(LOG, 1e4) == pytest.approx(1.0 + math.log(10001.0), rel=1e-15)
    assert ell_eval(LOG, 1e4) == pytest.approx(10.2105, abs=1e-4)


def test_ell_rejects_bad_input():
    with pytest.raises(DomainError):
        ell_eval(LOG, 0.0)
    with pytest.raises(UnknownFamilyError, match="log_shift"):
        SlowVaryingFn("log_shfit")
    with pytest.raises(DomainError):
        SlowVaryingFn("power_probe", rho=0.0)


@pytest.mark.parametrize("ell", [CONST, LOG, ITER])
@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_slow_variation_at_extreme_grid_point(ell, lam):
    x = 1e8
    assert abs(ell_eval(ell, lam * x) / ell_eval(ell, x) - 1.0) <= 0.05
    rec = SlowVaryingFn(ell.kind, varying_at="zero", reciprocal=True)
    x = 1e-8
    assert abs(ell_eval(rec, lam * x) / ell_eval(rec, x) - 1.0) <= 0.05


@pytest.mark.parametrize("ell", [LOG, ITER])
@pytest.mark.parametrize("lam", [0.01, 0.1, 10.0, 100.0])
def test_slow_variation_ratio_shrinks(ell, lam):
    # logarithmic kinds converge slowly; far from 1 the ratio still tends to 1 monotonically
    x = np.logspace(2, 300, 60)
    dev = np.abs(ell_eval(ell, lam * x) / ell_eval(ell, x) - 1.0)
    assert np.all(np.diff(dev) < 0.0)
    assert dev[-1] < 0.01


def test_ell_round_trip():
    for ell in (CONST, LOG, ITER, PROBE, SlowVaryingFn("constant", value=2.5),
                SlowVaryingFn("log_shift", varying_at="zero", reciprocal=True)):
        assert ell_from_dict(ell.to_dict()) == ell


@pytest.mark.parametrize("x", [1e-8, 1e-3, 1.0, 7.5, 1e6])
def test_karamata_stable_is_one(x):
    spec = SubordinatorSpec(family=Stable(0.5))
    assert karamata_ratio(spec, 0.5, CONST, x) == pytest.approx(1.0, abs=4e-16)


def test_karamata_tempered_and_compound():
    tempered = SubordinatorSpec(family=TemperedStable(0.5, 1.0))
    assert abs(karamata_ratio(tempered, 0.5, CONST, 1e-4) - 1.0) <= 0.02
    cp = SubordinatorSpec(family=CompoundPoisson(1.0, ExponentialJumps(1.0)))
    r = karamata_ratio(cp, 0.5, CONST, 50.0)
    assert r == pytest.approx(math.exp(-50.0) * math.sqrt(math.pi) * math.sqrt(50.0), rel=1e-12)
    assert r < 1e-8


def test_potter_examples():
    res = potter_check(CONST, 0.1)
    assert res.holds and res.A == 1.0
    res = potter_check(LOG, 0.1, s_grid=POTTER_S_GRID, c_grid=[10.0 ** -k for k in range(1, 5)])
    assert res.holds and math.isfinite(res.A)
    assert potter_check(LOG, 0.1).holds
    assert not potter_check(PROBE, 0.1).holds


def test_potter_constant_brute_force():
    s = np.array([1.0, 1e3, 1e8])
    c = np.array([0.5, 1e-3, 1e-20])
    brute = 1.0
    for sv in s:
        for cv in c:
            r = ell_eval(LOG, sv) / ell_eval(LOG, cv * sv)
            brute = max(brute, r * cv ** 0.1, cv ** 0.1 / r)
    assert potter_constant(LOG, 0.1, s, c) == pytest.approx(brute, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([CONST, LOG, ITER, PROBE]), st.floats(0.01, 0.5), st.floats(1.0, 3.0))
def test_potter_monotone_in_epsilon(ell, eps, factor):
    res = potter_check(ell, eps)
    if res.holds:
        s = np.asarray(POTTER_S_GRID)
        wider = eps * factor
        assert potter_constant(ell, wider, s[s > res.R], POTTER_C_GRID) <= res.A
        assert potter_check(ell, wider).holds


def test_potter_rejects_bad_epsilon():
    with pytest.raises(DomainError):
        potter_check(LOG, 0.0)
