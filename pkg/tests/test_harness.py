import csv
import json

import pytest

from subordinator_lab.errors import ConfigError, FormatError, HypothesisError, RangeError, UnknownFamilyError
from subordinator_lab.harness import config_from_dict, dump_config, emit_plot, load_config, parse_config, run_experiment
from subordinator_lab.harness.cli import main
from subordinator_lab.harness.runner import DL_HEADER, KARAMATA_HEADER, POTTER_HEADER, VERIFIER_HEADER
from subordinator_lab.sampler import SAMPLE_CSV_HEADER

STABLE_SPEC = {"family": {"kind": "stable", "alpha": 0.5}}


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write_json(tmp_path / "c.json", {"experiment": "verify-dl", "spec": STABLE_SPEC, "alpha": 0.5}))
    assert cfg.eps_rel == 1e-5 and cfg.n == 100_000 and cfg.seed == 0
    assert cfg.thresholds["ratio_low"] == 0.9 and cfg.thresholds["ratio_high"] == 1.1


def test_config_errors():
    with pytest.raises(UnknownFamilyError, match="'stable'"):
        config_from_dict({"experiment": "verify-dl", "spec": {"family": {"kind": "stble", "alpha": 0.5}}, "alpha": 0.5})
    with pytest.raises(RangeError, match=r"\(0, 1\)"):
        config_from_dict({"experiment": "verify-dl", "spec": STABLE_SPEC, "alpha": 1.0})
    with pytest.raises(ConfigError, match="line 3"):
        parse_config('{\n  "experiment": "simulate",\n  "spec": ,\n}')
    with pytest.raises(ConfigError, match="seed"):
        config_from_dict({"experiment": "simulate", "spec": STABLE_SPEC, "sede": 1})
    with pytest.raises(UnknownFamilyError, match="verify-dl"):
        config_from_dict({"experiment": "verify_dl", "spec": STABLE_SPEC})
    with pytest.raises(UnknownFamilyError, match="log_shift"):
        config_from_dict({"experiment": "potter", "ell": {"kind": "logshift"}})
    with pytest.raises(RangeError):
        config_from_dict({"experiment": "simulate", "spec": STABLE_SPEC, "n": 0})


def test_static_hypothesis_gates():
    cp = {"family": {"kind": "compound_poisson", "rate": 1, "jumps": {"law": "exponential", "mean": 1}}}
    with pytest.raises(HypothesisError):
        config_from_dict({"experiment": "verify-dl", "spec": cp, "alpha": 0.5})
    with pytest.raises(HypothesisError):
        config_from_dict({"experiment": "verify-lde", "spec": STABLE_SPEC, "alpha": 0.5,
                          "c_fn": {"kind": "constant", "value": 0.5}, "s_list": [1e2, 1e4]})


def test_round_trip_and_hash_stability():
    data = {"experiment": "verify-lde", "spec": STABLE_SPEC, "alpha": 0.5, "s_list": [100.0, 10000.0],
            "ell": {"kind": "log_shift"}, "c_fn": {"kind": "power", "beta": 0.4}, "thresholds": {"two_eps": True}}
    cfg = config_from_dict(data)
    again = parse_config(dump_config(cfg))
    assert again == cfg
    shuffled = json.loads(json.dumps(dict(reversed(list(data.items())))))
    assert config_from_dict(shuffled).config_hash() == cfg.config_hash()
    assert config_from_dict({**data, "seed": 1}).config_hash() != cfg.config_hash()


def test_tabulated_config_round_trip():
    data = {"experiment": "verify-lde", "alpha": 0.5, "ell": {"kind": "log_shift"},
            "spec": {"family": {"kind": "tabulated", "alpha": 0.5, "ell": {"kind": "log_shift"}}},
            "c_fn": {"kind": "power", "beta": 0.4}, "s_list": [100.0, 1000.0]}
    cfg = config_from_dict(data)
    assert parse_config(dump_config(cfg)).config_hash() == cfg.config_hash()


def test_simulate_shape(tmp_path):
    cfg = config_from_dict({"experiment": "simulate", "spec": STABLE_SPEC, "n": 3, "output": str(tmp_path / "s.csv")})
    res = run_experiment(cfg)
    rows = read_csv(res.path)
    assert tuple(rows[0]) == SAMPLE_CSV_HEADER and len(rows) == 4
    assert res.exit_status == 0


def test_byte_identical_reruns(tmp_path, monkeypatch):
    cfg = config_from_dict({"experiment": "verify-dl", "spec": STABLE_SPEC, "alpha": 0.5, "n": 5000, "seed": 4})
    a = run_experiment(cfg, tmp_path / "a.csv").path.read_bytes()
    b = run_experiment(cfg, tmp_path / "b.csv").path.read_bytes()
    monkeypatch.setenv("SUBLAB_WORKERS", "1")
    c = run_experiment(cfg, tmp_path / "c.csv").path.read_bytes()
    assert a == b == c


def test_verify_dl_rows(tmp_path):
    cfg = config_from_dict({"experiment": "verify-dl", "spec": STABLE_SPEC, "alpha": 0.5, "n": 20_000,
                            "s_list": [1.0, 10.0], "thresholds": {"ks": 0.02}})
    res = run_experiment(cfg, tmp_path / "dl.csv")
    rows = read_csv(res.path)
    assert tuple(rows[0]) == VERIFIER_HEADER and len(rows) == 3
    assert res.exit_status == 0 and all(r[-1] == "true" for r in rows[1:])


def test_failing_rows_give_exit_one(tmp_path):
    cfg = config_from_dict({"experiment": "verify-dl", "spec": STABLE_SPEC, "alpha": 0.5, "n": 2000,
                            "thresholds": {"ks": 1e-6}})
    assert run_experiment(cfg, tmp_path / "x.csv").exit_status == 1


def test_verifier_error_row(tmp_path):
    # a rare-event budget violation surfaces as a machine-readable error row
    cfg = config_from_dict({"experiment": "verify-lde", "spec": STABLE_SPEC, "alpha": 0.5, "n": 100,
                            "s_list": [1e4]})
    res = run_experiment(cfg, tmp_path / "e.csv")
    rows = read_csv(res.path)
    assert res.exit_status == 2
    assert rows[0] == ["status", "error_type", "message"] and rows[1][:2] == ["error", "ResourceError"]


def test_karamata_and_potter(tmp_path):
    cfg = config_from_dict({"experiment": "karamata", "spec": STABLE_SPEC, "alpha": 0.5,
                            "x_list": [1e-3, 1.0, 1e3], "thresholds": {"ratio_low": 0.999999, "ratio_high": 1.000001}})
    res = run_experiment(cfg, tmp_path / "k.csv")
    rows = read_csv(res.path)
    assert tuple(rows[0]) == KARAMATA_HEADER and res.exit_status == 0
    cfg = config_from_dict({"experiment": "potter", "ell": {"kind": "power_probe", "rho": 0.2},
                            "thresholds": {"expect_holds": False}})
    res = run_experiment(cfg, tmp_path / "p.csv")
    rows = read_csv(res.path)
    assert tuple(rows[0]) == POTTER_HEADER and rows[1][1] == "false" and res.exit_status == 0


def test_verify_dlt(tmp_path):
    cp = {"family": {"kind": "compound_poisson", "rate": 1, "jumps": {"law": "exponential", "mean": 1}}}
    cfg = config_from_dict({"experiment": "verify-dlt", "spec": cp, "n": 5000, "q_list": [1.0], "lambda_list": [1.0]})
    res = run_experiment(cfg, tmp_path / "d.csv")
    rows = read_csv(res.path)
    assert tuple(rows[0]) == DL_HEADER and float(rows[1][2]) == pytest.approx(0.75)
    assert res.exit_status == 0


def test_verify_lde_two_eps_row(tmp_path):
    cfg = config_from_dict({"experiment": "verify-lde", "spec": STABLE_SPEC, "alpha": 0.5, "n": 20_000,
                            "s_list": [100.0, 400.0], "thresholds": {"two_eps": True, "monotone": False}})
    res = run_experiment(cfg, tmp_path / "l.csv")
    rows = read_csv(res.path)
    assert [r[0] for r in rows[1:]] == ["lde-long", "lde-long", "lde-long-two-eps"]
    assert res.exit_status == 0


def test_cli_overrides_and_exit_codes(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"experiment": "simulate", "spec": STABLE_SPEC, "n": 10})
    out = tmp_path / "o.csv"
    assert main(["simulate", "--config", str(cfg), "--n", "3", "--seed", "2", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 4
    assert "config" in capsys.readouterr().err
    bad = write_json(tmp_path / "b.json", {"experiment": "simulate", "spec": {"family": {"kind": "stble"}}})
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "err.csv")]) == 2
    assert read_csv(tmp_path / "err.csv")[1][1] == "UnknownFamilyError"


def test_plots(tmp_path):
    cfg = config_from_dict({"experiment": "verify-dl", "spec": STABLE_SPEC, "alpha": 0.5, "n": 2000,
                            "save_samples": True, "output": str(tmp_path / "dl.csv")})
    run_experiment(cfg)
    svg = emit_plot(tmp_path / "dl.csv", "cdf-overlay").read_text()
    assert 'id="ecdf"' in svg and 'id="beta-cdf"' in svg

    lde = tmp_path / "lde.csv"
    with open(lde, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(VERIFIER_HEADER)
        for s, r in ((1e4, 1.33), (1e2, 1.45), (1e3, 1.39)):
            w.writerow(["lde-long", "tabulated", 0.5, s, 0.1, 0.2, 0.19, 0.21, 0.15, r, "", "false"])
    svg = emit_plot(lde, "ratio-vs-s", tmp_path / "r.svg").read_text()
    assert 'id="reference"' in svg and 'id="ratio"' in svg

    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(VERIFIER_HEADER) + "\n")
    with pytest.raises(FormatError):
        emit_plot(empty, "ratio-vs-s")
    with pytest.raises(FormatError):
        emit_plot(empty, "cdf-overlay")
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError):
        emit_plot(wrong, "cdf-overlay")


def test_ratio_plot_uses_log_axis(tmp_path, monkeypatch):
    import matplotlib.axes

    seen = {}
    orig = matplotlib.axes.Axes.set_xscale

    def spy(self, value, **kw):
        seen["xscale"] = value
        return orig(self, value, **kw)

    monkeypatch.setattr(matplotlib.axes.Axes, "set_xscale", spy)
    lde = tmp_path / "lde.csv"
    with open(lde, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(VERIFIER_HEADER)
        w.writerow(["lde-long", "stable", 0.5, 100.0, 0.1, 0.2, 0.19, 0.21, 0.2, 1.0, "", "true"])
    emit_plot(lde, "ratio-vs-s")
    assert seen["xscale"] == "log"


def test_numpy_fallback_flag_gives_identical_csv(tmp_path):
    import os
    import subprocess
    import sys

    cfg = write_json(tmp_path / "c.json", {"experiment": "verify-dl", "spec": STABLE_SPEC, "alpha": 0.5, "n": 3000,
                                            "thresholds": {"ks": 0.05}})
    outs = {}
    for flag in ("0", "1"):
        out = tmp_path / f"o{flag}.csv"
        code = ("import sys; from subordinator_lab import _backend; from subordinator_lab.harness.cli import main; "
                f"assert _backend.USE_NUMBA == ({flag!r} == '0'); "
                f"sys.exit(main(['verify-dl', '--config', {str(cfg)!r}, '--out', {str(out)!r}]))")
        env = {**os.environ, "SUBLAB_DISABLE_NUMBA": flag}
        subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True)
        outs[flag] = out.read_bytes()
    assert outs["0"] == outs["1"]
