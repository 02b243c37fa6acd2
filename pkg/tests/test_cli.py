import csv
import json

import numpy as np
import pytest

from cubicwave import ConfigError
from cubicwave.cli import (CSV_VERSION, SCHEMAS, ExperimentConfig, RunManifest, emit_plotdata, main,
                           parse_config_text, resolve_config, run)
from cubicwave.evolution import EvolutionTrace


def read_csv(path):
    with open(path) as fh:
        head = fh.readline().strip()
        rows = list(csv.reader(fh))
    assert head == f"# {CSV_VERSION}"
    return rows[0], rows[1:]


def test_parse_config_text():
    raw = parse_config_text("# comment\nn_r = 32   # trailing\n\nwindow = 2, 8\n")
    assert raw == {"n_r": "32", "window": "2, 8"}
    with pytest.raises(ConfigError):
        parse_config_text("n_r 32")
    with pytest.raises(ConfigError):
        parse_config_text("= 3")


def test_resolve_config_types_and_defaults():
    cfg = resolve_config("shoot", {"n_r": "32", "window": "1 5", "check_alpha": "yes"})
    assert cfg["n_r"] == 32 and cfg["window"] == (1.0, 5.0) and cfg["check_alpha"] is True
    assert cfg["T_lo"] == 0.99
    assert set(cfg) == set(SCHEMAS["shoot"])


def test_resolve_config_errors():
    with pytest.raises(ConfigError):
        resolve_config("shoot", {"nr": "32"})
    with pytest.raises(ConfigError):
        resolve_config("shoot", {"n_r": "many"})
    with pytest.raises(ConfigError):
        resolve_config("shoot", {"check_alpha": "perhaps"})
    with pytest.raises(ConfigError):
        resolve_config("plot", {})


def test_manifest_checks():
    m = RunManifest(config={})
    assert m.check("a", 1e-9, 1e-8)
    assert not m.check("b", 1e-7, 1e-8)
    assert m.check("c", 0.5, 0.0, op=">")
    assert not m.passed
    d = m.to_dict()
    assert [c["passed"] for c in d["checks"]] == [True, False, True]
    assert d["checks"][2]["margin"] == 0.5
    with pytest.raises(ValueError):
        m.check("d", 0.0, 0.0, op="<")


def _run(tmp_path, sub, **params):
    cfg = ExperimentConfig(sub, resolve_config(sub, {k: str(v) for k, v in params.items()}), out=str(tmp_path))
    return run(sub, cfg)


GOLDEN = {
    "dissipativity": {"dissipativity.csv": ["sample", "i", "LuU", "UU", "margin"]},
    "mode-scan": {"flagged.csv": ["re", "im", "l", "abs_s"], "plot_scan.csv": ["re", "im", "l", "abs_s"]},
    "spectrum": {"spectrum.csv": ["re", "im", "l", "converged", "shift"],
                 "plot_spectrum.csv": ["re", "im", "l", "converged"]},
    "wronskian": {"closed_forms.csv": ["l", "z", "phi0_closed", "phi0_series", "rel0", "phi1_closed",
                                       "phi1_series", "rel1"],
                  "wronskian.csv": ["l", "max_rel_dev"]},
    "ode-check": {"boundary_growth.csv": ["rho", "du", "ddu", "du_over_log"],
                  "ode_blowup.csv": ["t", "u_center", "exact", "rel_err"]},
    "evolve": {"plot_decay.csv": ["tau", "log_norm_Phi"]},
    "norm-equivalence": {"norm_equivalence.csv": ["sample", "energy_norm", "sobolev_norm", "ratio"]},
}

SMALL = {
    "dissipativity": dict(n_samples=3, n_r=24),
    "mode-scan": dict(l_max=2, step=0.1),
    "spectrum": dict(n_r=16),
    "wronskian": dict(l_max=2, n_z=11, n_rho=11),
    "ode-check": dict(n_rho=21),
    "evolve": dict(n_r=16, n_theta=4, tau_max=0.5, record_every=0.1),
    "norm-equivalence": dict(n_samples=3, n_r=16, n_theta=6),
}


@pytest.mark.parametrize("sub", sorted(GOLDEN))
def test_golden_headers(tmp_path, sub):
    m = _run(tmp_path, sub, **SMALL[sub])
    for name, header in GOLDEN[sub].items():
        got, _ = read_csv(tmp_path / name)
        assert got == header
        assert name in m.artifacts
    for name in m.artifacts:
        assert (tmp_path / name).exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["format"] == "cubicwave-manifest/1"
    assert all("margin" in c for c in man["checks"])


def test_trace_header(tmp_path):
    _run(tmp_path, "evolve", **SMALL["evolve"])
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "# cubicwave-trace/1"
    assert lines[1] == "tau,energy_norm_Phi,H0,H1,H2,H3,alpha,p,q"


def test_dissipativity_rows(tmp_path):
    m = _run(tmp_path, "dissipativity", n_samples=4, n_r=24)
    _, rows = read_csv(tmp_path / "dissipativity.csv")
    assert len(rows) == 4 * 6
    assert m.passed


def test_mode_scan_default_flags(tmp_path):
    m = _run(tmp_path, "mode-scan")
    _, rows = read_csv(tmp_path / "flagged.csv")
    got = sorted((float(r[0]), float(r[1]), int(r[2])) for r in rows)
    assert got == [(0.0, 0.0, 1), (1.0, 0.0, 0)]
    assert {c.name: c.passed for c in m.checks}["flagged_set_is_{(1,0),(0,1)}"]


def test_evolve_static(tmp_path):
    m = _run(tmp_path, "evolve", **SMALL["evolve"])
    assert m.passed
    tr = EvolutionTrace.read_csv(tmp_path / "trace.csv")
    assert max(tr.energy_norm_Phi) <= 1e-10


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["dissipativity", "--set", "n_samples=3", "--set", "n_r=24", "--seed", "5", "--out", str(a)]) == 0
    assert main(["dissipativity", "--set", "n_samples=3", "--set", "n_r=24", "--seed", "5", "--out", str(b),
                 "--jobs", "2"]) == 0
    assert (a / "dissipativity.csv").read_bytes() == (b / "dissipativity.csv").read_bytes()
    c = tmp_path / "c"
    main(["dissipativity", "--set", "n_samples=3", "--set", "n_r=24", "--seed", "6", "--out", str(c)])
    assert (a / "dissipativity.csv").read_bytes() != (c / "dissipativity.csv").read_bytes()


def test_emit_plotdata(tmp_path):
    tr = EvolutionTrace()
    for t in (0.0, 1.0):
        tr.append(tau=t, energy_norm_Phi=np.exp(-t / 2))
    header, rows = read_csv(emit_plotdata("decay", tr, str(tmp_path)))
    assert header == ["tau", "log_norm_Phi"]
    assert [float(r[1]) for r in rows] == [0.0, -0.5]
    recs = [{"re": -1.0, "im": 0.5, "l": 2, "converged": True}]
    header, rows = read_csv(emit_plotdata("spectrum", recs, str(tmp_path)))
    assert rows == [["-1.0", "0.5", "2", "1"]]
    scan = {"re": np.array([0.0, 1.0]), "im": np.array([0.0]), "abs_s": np.ones((1, 2, 1))}
    header, rows = read_csv(emit_plotdata("scan", scan, str(tmp_path)))
    assert header == ["re", "im", "l", "abs_s"] and len(rows) == 2
    with pytest.raises(ValueError):
        emit_plotdata("movie", tr, str(tmp_path))
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit_plotdata("decay", tr, str(blocker))


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["wronskian", "--set", "l_max=1", "--out", out]) == 0
    assert "PASS" in capsys.readouterr().out
    # an impossible tolerance fails with the margin printed
    assert main(["wronskian", "--set", "l_max=1", "--set", "wronskian_tol=0", "--out", out]) == 1
    err = capsys.readouterr().err
    assert "wronskian_rel" in err and "margin" in err
    assert main(["wronskian", "--set", "bogus=1", "--out", out]) == 2
    assert main(["fit-rate", "--out", out]) == 2
    assert main(["wronskian", "--config", str(tmp_path / "missing.cfg"), "--out", out]) == 2


def test_config_file(tmp_path):
    cfgfile = tmp_path / "w.cfg"
    cfgfile.write_text("l_max = 1\nn_z = 5   # coarse\n")
    assert main(["wronskian", "--config", str(cfgfile), "--set", "n_rho=5", "--out", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"]["l_max"] == 1 and man["config"]["n_z"] == 5 and man["config"]["n_rho"] == 5


def test_fit_rate_round_trip(tmp_path):
    tr = EvolutionTrace()
    for t in np.linspace(0, 10, 101):
        tr.append(tau=t, energy_norm_Phi=np.exp(-t / 2))
    tr.write_csv(tmp_path / "t.csv")
    assert main(["fit-rate", "--set", f"trace={tmp_path / 't.csv'}", "--set", "max_rate=-0.45",
                 "--out", str(tmp_path)]) == 0
    rate = json.loads((tmp_path / "rate.json").read_text())["rate"]
    assert abs(rate + 0.5) <= 1e-12


def test_show_schema(capsys):
    assert main(["shoot", "--show-schema"]) == 0
    out = capsys.readouterr().out
    assert "bracket_tol = 1e-06" in out
