"""Command-line harness: verification suites, simulations and plot data.

    cubicwave SUBCOMMAND [--config PATH] [--set key=value ...] [--seed N] [--out DIR] [--jobs N]

Config files are line-oriented ``key = value`` with ``#`` comments; each
subcommand has a typed schema (``cubicwave SUBCOMMAND --show-schema``). Every
run writes CSV/JSON artifacts with a versioned header line plus manifest.json,
and exits 0 iff every assertion passes.
"""
import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import AssertionFailure, ConfigError, CubicWaveError

CSV_VERSION = "cubicwave-csv/1"
MANIFEST_VERSION = "cubicwave-manifest/1"


# ---------------------------------------------------------------- config

def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    if isinstance(s, (tuple, list)):
        return tuple(float(x) for x in s)
    return tuple(float(x) for x in str(s).replace(",", " ").split())


SCHEMAS = {
    "dissipativity": {
        "n_samples": (int, 100), "degree": (int, 5), "n_r": (int, 64), "n_theta": (int, 8),
        "tol": (float, 1e-8),
    },
    "mode-scan": {
        "l_max": (int, 8), "re_min": (float, -1.0), "re_max": (float, 3.0), "im_max": (float, 5.0),
        "step": (float, 0.02), "flag_tol": (float, 1e-8), "separation_tol": (float, 1e-3),
        "heatmap_stride": (int, 5),
    },
    "spectrum": {
        "n_r": (int, 64), "n_theta": (int, 5), "alpha": (float, 0.0), "refine": (float, 1.5),
        "converge_tol": (float, 1e-4), "gap_tol": (float, 1e-6), "re_cut": (float, -0.5),
    },
    "wronskian": {
        "l_max": (int, 6), "z_max": (float, 0.9), "n_z": (int, 91), "series_tol": (float, 1e-10),
        "rho_min": (float, 0.1), "rho_max": (float, 0.9), "n_rho": (int, 81), "wronskian_tol": (float, 1e-8),
    },
    "ode-check": {
        "rho_min": (float, 0.05), "rho_max": (float, 0.95), "n_rho": (int, 181), "ode_tol": (float, 1e-8),
        "pair_tol": (float, 1e-12), "c0": (float, 0.0), "t_max": (float, 0.9), "T_frame": (float, 1.2),
        "blowup_tol": (float, 1e-6),
    },
    "evolve": {
        "n_r": (int, 48), "n_theta": (int, 12), "kind": (str, "none"), "eps": (float, 1e-3),
        "width": (float, 0.5), "T": (float, 1.0), "tau_max": (float, 10.0), "record_every": (float, 0.05),
        "window": (_floats, (2.0, 8.0)), "cfl": (float, 0.9), "static_tol": (float, 1e-10),
    },
    "shoot": {
        "n_r": (int, 48), "n_theta": (int, 12), "kind": (str, "radial"), "eps": (float, 1e-3),
        "width": (float, 0.5), "T_lo": (float, 0.99), "T_hi": (float, 1.01), "shoot_tol": (float, 1e-14),
        "bracket_tol": (float, 1e-6), "tau_class": (float, 10.0), "tau_max": (float, 10.0),
        "record_every": (float, 0.05), "window": (_floats, (2.0, 8.0)), "max_rate": (float, -0.45),
        "check_alpha": (_bool, False), "alpha_bound": (float, 0.05), "envelope_factor": (float, 2.0),
        "cfl": (float, 0.9),
    },
    "fit-rate": {
        "trace": (str, ""), "window": (_floats, (2.0, 8.0)), "quantity": (str, "energy_norm_Phi"),
        "max_rate": (float, float("nan")),
    },
    "norm-equivalence": {
        "n_samples": (int, 20), "degree": (int, 6), "n_r": (int, 32), "n_theta": (int, 8),
        "max_spread": (float, 1e3),
    },
}


def parse_config_text(text):
    """Raw key -> string mapping from line-oriented key = value text."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"line {n}: empty key")
        out[k] = v
    return out


def resolve_config(subcommand, raw):
    """Typed config for subcommand from raw strings, filling defaults."""
    if subcommand not in SCHEMAS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    schema = SCHEMAS[subcommand]
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown keys for {subcommand}: {sorted(unknown)}")
    cfg = {}
    for k, (typ, default) in schema.items():
        if k in raw:
            try:
                cfg[k] = typ(raw[k])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{k}: {exc}") from None
        else:
            cfg[k] = default
    return cfg


@dataclass
class ExperimentConfig:
    subcommand: str
    params: dict
    seed: int = 0
    out: str = "."
    jobs: int = 1


# ---------------------------------------------------------------- manifest

@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    op: str = "<="

    @property
    def margin(self):
        """Positive when satisfied, in the units of the measured quantity."""
        d = self.threshold - self.measured
        return d if self.op == "<=" else -d


@dataclass
class RunManifest:
    config: dict
    version: str = __version__
    wall_time: float = 0.0
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name, measured, threshold, op="<="):
        measured = float(measured)
        if op not in ("<=", ">", ">="):
            raise ValueError(f"unsupported comparison {op!r}")
        ok = {"<=": measured <= threshold, ">": measured > threshold, ">=": measured >= threshold}[op]
        self.checks.append(Check(name, bool(ok), measured, float(threshold), op))
        return ok

    def to_dict(self):
        return {
            "format": MANIFEST_VERSION, "version": self.version, "config": self.config,
            "wall_time": self.wall_time, "passed": self.passed,
            "checks": [{**asdict(c), "margin": c.margin} for c in self.checks],
            "artifacts": list(self.artifacts),
        }


class Writer:
    """Creates versioned CSV/JSON artifacts under out and records them."""

    def __init__(self, out, manifest):
        self.out = out
        self.manifest = manifest
        os.makedirs(out, exist_ok=True)

    def path(self, name):
        self.manifest.artifacts.append(name)
        return os.path.join(self.out, name)

    def csv(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            fh.write(f"# {CSV_VERSION}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])

    def json(self, name, obj):
        with open(self.path(name), "w") as fh:
            json.dump({"format": "cubicwave-json/1", **obj}, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(f"not serializable: {type(v)}")


def pool_map(fn, items, jobs=1):
    """Order-preserving map, in a process pool when jobs > 1."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- plot data

def emit_plotdata(kind, data, out):
    """Tidy long-format CSV for one figure-like product; returns the file path.

    kind 'decay': data is an EvolutionTrace -> (tau, log_norm_Phi).
    kind 'spectrum': list of eigenvalue records -> (re, im, l, converged).
    kind 'scan': mode_stability_scan result -> (re, im, l, abs_s).
    """
    os.makedirs(out, exist_ok=True)
    if kind == "decay":
        path = os.path.join(out, "plot_decay.csv")
        header = ("tau", "log_norm_Phi")
        rows = [(t, float(np.log(v)) if v > 0 else float("-inf"))
                for t, v in zip(data.tau, data.energy_norm_Phi)]
    elif kind == "spectrum":
        path = os.path.join(out, "plot_spectrum.csv")
        header = ("re", "im", "l", "converged")
        rows = [(r["re"], r["im"], r["l"], r["converged"]) for r in data]
    elif kind == "scan":
        path = os.path.join(out, "plot_scan.csv")
        header = ("re", "im", "l", "abs_s")
        stride = data.get("stride", 1)
        rows = [(data["re"][i], data["im"][j], l, data["abs_s"][l, i, j])
                for l in range(data["abs_s"].shape[0])
                for i in range(0, len(data["re"]), stride)
                for j in range(0, len(data["im"]), stride)]
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(f"# {CSV_VERSION}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc
    return path


# ---------------------------------------------------------------- suites

def _dissipativity_sample(args):
    from .discretization import make_grid
    from .energy_norm import dissipativity_report, random_polynomial_pair

    seed, idx, degree, n_r, n_theta = args
    grid = make_grid(d=5, n_r=n_r, n_theta=n_theta)
    rng = np.random.default_rng([seed, idx])
    return dissipativity_report(random_polynomial_pair(grid, degree, rng))


def run_dissipativity(cfg, p, w, m):
    reps = pool_map(_dissipativity_sample,
                    [(cfg.seed, k, p["degree"], p["n_r"], p["n_theta"]) for k in range(p["n_samples"])],
                    cfg.jobs)
    rows, worst = [], {i: -np.inf for i in ("1-4", "5", "total")}
    for k, rep in enumerate(reps):
        LuU, UU = rep["LuU"], rep["UU"]
        for i in range(4):
            rel = rep["margins"][i] / UU[i]
            rows.append((k, i + 1, LuU[i], UU[i], rep["margins"][i]))
            worst["1-4"] = max(worst["1-4"], rel)
        rows.append((k, 5, LuU[4], UU[4], LuU[4] + UU[4]))
        worst["5"] = max(worst["5"], rep["e5"] / UU[4])
        rows.append((k, "total", LuU.sum(), UU.sum(), rep["m"]))
        worst["total"] = max(worst["total"], rep["m"] / UU.sum())
    w.csv("dissipativity.csv", ("sample", "i", "LuU", "UU", "margin"), rows)
    m.check("margin_i1-4_relative", worst["1-4"], p["tol"])
    m.check("abs_margin_i5_relative", worst["5"], p["tol"])
    m.check("margin_total_relative", worst["total"], p["tol"])


def _scan_flags(scan):
    flagged = scan["flagged"]
    re, im, A = scan["re"], scan["im"], scan["abs_s"]
    near = np.zeros(A.shape, dtype=bool)
    step = scan["step"]
    for lam, l in flagged:
        near[l] |= (np.abs(re[:, None] - lam.real) <= step * 1.0001) & (np.abs(im[None, :] - lam.imag) <= step * 1.0001)
    far = A[~near]
    return flagged, float(far.min()) if far.size else np.inf


def run_mode_scan(cfg, p, w, m):
    from .spectral import mode_stability_scan

    scan = mode_stability_scan(p["l_max"], p["re_min"], p["re_max"], p["im_max"], p["step"], p["flag_tol"])
    flagged, far_min = _scan_flags(scan)
    rows = [(lam.real, lam.imag, l, scan["abs_s"][l][np.argmin(np.abs(scan["re"] - lam.real)),
                                                       np.argmin(np.abs(scan["im"] - lam.imag))])
            for lam, l in flagged]
    w.csv("flagged.csv", ("re", "im", "l", "abs_s"), rows)
    scan["stride"] = p["heatmap_stride"]
    m.artifacts.append(os.path.basename(emit_plotdata("scan", scan, w.out)))
    got = sorted((round(lam.real, 9), round(lam.imag, 9), l) for lam, l in flagged)
    m.check("flagged_set_is_{(1,0),(0,1)}", 0.0 if got == [(0.0, 0.0, 1), (1.0, 0.0, 0)] else 1.0, 0.0)
    m.check("nonadjacent_min_abs_s", far_min, p["separation_tol"], op=">")
    w.json("scan_summary.json", {"flagged": [[lam.real, lam.imag, l] for lam, l in flagged],
                                 "nonadjacent_min_abs_s": far_min})


def run_spectrum(cfg, p, w, m):
    from .operators import discrete_spectrum

    recs = discrete_spectrum(5, p["n_r"], p["n_theta"], p["alpha"], p["refine"], p["converge_tol"])
    w.csv("spectrum.csv", ("re", "im", "l", "converged", "shift"),
          [(r["re"], r["im"], r["l"], r["converged"], r["shift"]) for r in recs])
    m.artifacts.append(os.path.basename(emit_plotdata("spectrum", recs, w.out)))
    sel = [r for r in recs if r["converged"] and r["re"] > p["re_cut"]]
    dist = max((min(abs(complex(r["re"], r["im"]) - t) for t in (0, 1)) for r in sel), default=0.0)
    m.check("converged_unstable_within_gap_tol_of_{0,1}", dist, p["gap_tol"])
    ones = {r["l"] for r in sel if abs(complex(r["re"], r["im"]) - 1) < p["gap_tol"]}
    zeros = {r["l"] for r in sel if abs(complex(r["re"], r["im"])) < p["gap_tol"]}
    m.check("eigenvalue_1_only_in_l0", 0.0 if ones == {0} else 1.0, 0.0)
    m.check("eigenvalue_0_only_in_l1", 0.0 if zeros == {1} else 1.0, 0.0)


def run_wronskian(cfg, p, w, m):
    from .spectral import aux_params, hyp2f1, phi0, phi1, wronskian_check

    z = np.linspace(0, p["z_max"], p["n_z"])
    rows, worst = [], 0.0
    for l in range(p["l_max"] + 1):
        a, b, c = aux_params(l)
        for zz in z:
            s0, s1 = hyp2f1(a, b, c, zz), hyp2f1(a, b, 1.5, 1 - zz) if zz > 0 else np.nan
            c0 = phi0(l, zz)
            c1 = phi1(l, zz) if zz > 0 else np.nan
            e0 = abs(c0 / s0 - 1)
            e1 = abs(c1 / s1 - 1) if zz > 0 else 0.0
            worst = max(worst, e0, e1)
            rows.append((l, zz, c0, s0, e0, c1, s1, e1))
    w.csv("closed_forms.csv", ("l", "z", "phi0_closed", "phi0_series", "rel0", "phi1_closed", "phi1_series", "rel1"),
          rows)
    rho = np.linspace(p["rho_min"], p["rho_max"], p["n_rho"])
    wr = [(l, wronskian_check(l, rho)) for l in range(p["l_max"] + 1)]
    w.csv("wronskian.csv", ("l", "max_rel_dev"), wr)
    m.check("closed_form_vs_series_rel", worst, p["series_tol"])
    m.check("wronskian_rel", max(v for _, v in wr), p["wronskian_tol"])


def run_ode_check(cfg, p, w, m):
    from .evolution import ode_blowup_check
    from .spectral import boundary_growth_marker, homogeneous_pair_check, multiplicity_ode_check

    rho = np.linspace(p["rho_min"], p["rho_max"], p["n_rho"])
    res = multiplicity_ode_check(rho, p["c0"])
    r_phi, r_psi, r_w = homogeneous_pair_check(rho)
    g = boundary_growth_marker()
    w.csv("boundary_growth.csv", ("rho", "du", "ddu", "du_over_log"),
          zip(g["rho"], g["du"], g["ddu"], g["log_ratio"]))
    ts, vals, exact, err = ode_blowup_check(p["T_frame"], p["t_max"])
    w.csv("ode_blowup.csv", ("t", "u_center", "exact", "rel_err"), zip(ts, vals, exact, np.abs(vals / exact - 1)))
    m.check("multiplicity_ode_residual", res, p["ode_tol"])
    m.check("homogeneous_rho", r_phi, p["pair_tol"])
    m.check("homogeneous_rho^-4", r_psi, p["pair_tol"])
    m.check("wronskian_-5rho^-4", r_w, p["pair_tol"])
    m.check("second_derivative_unbounded", 0.0 if g["ddu_monotone"] else 1.0, 0.0)
    m.check("constant_data_blowup_rel", err, p["blowup_tol"])


def _evolver(p):
    from .discretization import make_grid
    from .evolution import Evolver

    return Evolver(make_grid(d=5, n_r=p["n_r"], n_theta=p["n_theta"]), cfl=p["cfl"])


def _pert(p):
    from .evolution import Perturbation

    try:
        return Perturbation(p["kind"], p["eps"], p["width"])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc)) from None


def _trace_outputs(trace, w, m, window, T):
    from .evolution import summarize

    trace.write_csv(w.path("trace.csv"))
    m.artifacts.append(os.path.basename(emit_plotdata("decay", trace, w.out)))
    s = summarize(trace, window, T)
    w.json("summary.json", s)
    return s


def run_evolve(cfg, p, w, m):
    from .evolution import evolve, prepare_initial_data

    ev = _evolver(p)
    pert = _pert(p)
    trace, _ = evolve(ev, prepare_initial_data(pert, p["T"], ev.grid), p["tau_max"], p["record_every"])
    _trace_outputs(trace, w, m, p["window"], p["T"])
    m.check("trace_finite", 0.0 if np.all(np.isfinite(trace.array("energy_norm_Phi"))) else 1.0, 0.0)
    if pert.kind == "none" or pert.eps == 0:
        m.check("static_profile_norm_Phi", max(trace.energy_norm_Phi), p["static_tol"])


def run_shoot(cfg, p, w, m):
    from .evolution import envelope_check, evolve, fit_decay_rate, prepare_initial_data, shoot_blowup_time

    ev = _evolver(p)
    pert = _pert(p)
    res = shoot_blowup_time(pert, (p["T_lo"], p["T_hi"]), p["shoot_tol"], ev, tau_class=p["tau_class"])
    w.csv("shoot.csv", ("T", "class", "p"), res.history)
    trace, _ = evolve(ev, prepare_initial_data(pert, res.T, ev.grid), p["tau_max"], p["record_every"])
    s = _trace_outputs(trace, w, m, p["window"], res.T)
    w.json("shoot_summary.json", {"T_star": res.T, "bracket": list(res.bracket), "secant": res.secant,
                                  "n_evolutions": len(res.history), **{k: s[k] for k in s if k != "T"}})
    m.check("bracket_width", res.width(), p["bracket_tol"])
    rate = _rate_or_inf(fit_decay_rate, trace, p["window"], "energy_norm_Phi")
    m.check("energy_norm_Phi_rate", rate, p["max_rate"])
    env = envelope_check(trace, p["window"])
    m.check("sobolev_envelope_max_ratio", max(env.values()), p["envelope_factor"])
    if p["check_alpha"]:
        m.check("alpha_rate", _rate_or_inf(fit_decay_rate, trace, p["window"], "alpha"), p["max_rate"])
        m.check("abs_alpha_inf", abs(trace.alpha[-1]), p["alpha_bound"])


def _rate_or_inf(fn, *args):
    from .errors import NonConvergedFit

    try:
        return fn(*args)[0]
    except NonConvergedFit:
        return np.inf


def run_fit_rate(cfg, p, w, m):
    from .evolution import EvolutionTrace, fit_decay_rate

    if not p["trace"]:
        raise ConfigError("fit-rate needs trace = PATH")
    tr = EvolutionTrace.read_csv(p["trace"])
    rate, quality = fit_decay_rate(tr, p["window"], p["quantity"])
    w.json("rate.json", {"quantity": p["quantity"], "window": list(p["window"]), "rate": rate, "quality": quality})
    if np.isfinite(p["max_rate"]):
        m.check(f"{p['quantity']}_rate", rate, p["max_rate"])


def _norm_eq_sample(args):
    from .discretization import make_grid
    from .energy_norm import norm, random_polynomial_pair, sobolev_product_norm

    seed, idx, degree, n_r, n_theta = args
    grid = make_grid(d=5, n_r=n_r, n_theta=n_theta)
    u = random_polynomial_pair(grid, degree, np.random.default_rng([seed, idx]))
    return norm(u), sobolev_product_norm(u)


def run_norm_equivalence(cfg, p, w, m):
    res = pool_map(_norm_eq_sample,
                   [(cfg.seed, k, p["degree"], p["n_r"], p["n_theta"]) for k in range(p["n_samples"])], cfg.jobs)
    ratios = np.array([a / b for a, b in res])
    w.csv("norm_equivalence.csv", ("sample", "energy_norm", "sobolev_norm", "ratio"),
          [(k, a, b, a / b) for k, (a, b) in enumerate(res)])
    m.check("ratio_min_positive", ratios.min(), 0.0, op=">")
    m.check("ratio_spread", ratios.max() / ratios.min(), p["max_spread"])


RUNNERS = {
    "dissipativity": run_dissipativity,
    "mode-scan": run_mode_scan,
    "spectrum": run_spectrum,
    "wronskian": run_wronskian,
    "ode-check": run_ode_check,
    "evolve": run_evolve,
    "shoot": run_shoot,
    "fit-rate": run_fit_rate,
    "norm-equivalence": run_norm_equivalence,
}


def run(subcommand, config):
    """Execute one subcommand; returns its RunManifest (written to out/manifest.json)."""
    if isinstance(config, dict):
        config = ExperimentConfig(subcommand, resolve_config(subcommand, config))
    manifest = RunManifest(config={"subcommand": subcommand, "seed": config.seed, "jobs": config.jobs,
                                   **{k: list(v) if isinstance(v, tuple) else v for k, v in config.params.items()}})
    writer = Writer(config.out, manifest)
    t0 = time.perf_counter()
    RUNNERS[subcommand](config, config.params, writer, manifest)
    manifest.wall_time = time.perf_counter() - t0
    manifest.artifacts.append("manifest.json")
    with open(os.path.join(config.out, "manifest.json"), "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, default=_jsonable)
        fh.write("\n")
    return manifest


def build_parser():
    ap = argparse.ArgumentParser(prog="cubicwave", description=__doc__.split("\n")[0])
    ap.add_argument("subcommand", choices=sorted(RUNNERS))
    ap.add_argument("--config", metavar="PATH", help="key = value config file")
    ap.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], help="override one config key")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", metavar="DIR", default=".")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--show-schema", action="store_true", help="print the config schema and exit")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.show_schema:
        for k, (typ, default) in SCHEMAS[args.subcommand].items():
            print(f"{k} = {default}    # {getattr(typ, '__name__', str(typ)).lstrip('_')}")
        return 0
    try:
        raw = {}
        if args.config:
            with open(args.config) as fh:
                raw.update(parse_config_text(fh.read()))
        raw.update(parse_config_text("\n".join(args.set)))
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = ExperimentConfig(args.subcommand, resolve_config(args.subcommand, raw), args.seed, args.out, args.jobs)
        manifest = run(args.subcommand, cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CubicWaveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for c in manifest.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.name}: measured {c.measured:.3e} (required {c.op} {c.threshold:.3e}), margin {c.margin:.3e}")
    if not manifest.passed:
        failed = [c for c in manifest.checks if not c.passed]
        err = AssertionFailure(", ".join(f"{c.name} (margin {c.margin:.3e})" for c in failed))
        print(f"assertion failure: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
