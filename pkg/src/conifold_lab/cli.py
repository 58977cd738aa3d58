"""Experiment runner: sweeps, scaling fits, convergence runs, reports.

Reports follow one schema: ``{"experiment", "config", "rows", "asserts",
"version"}`` where every assert is ``{"name", "pass", "observed", "bound"}``.
CSV output mirrors the rows with a header line and floats printed with 17
significant digits, so identical config + seed gives byte-identical files.
Exit codes: 0 all asserted invariants pass, 1 an invariant failed, 2
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import curvature, forms, metricgeom
from .chart import OMEGA, ResolvedPoint, omega_r, rho, rho_alpha
from .errors import ConfigError, NonPositiveData
from .profile import ProfileParams, cubic_residual, eval_profile

VERSION = "0.1.0"

EXPERIMENTS = ("estimates", "diam-scaling", "gh-converge", "ricci-audit", "profile-table")

DEFAULT_TOLERANCES = {
    "cubic_residual": 1e-9,
    "ricci_potential_residual": 1e-9,
    "ricci_matrix_max_entry": 1e-4,
    "ricci_control_min_entry": 1e-2,
    "sandwich_min_eigenvalue": -1e-10,
    "trace_bound_hat": 4.0 + 1e-9,
    "norm_identity_rel": 1e-8,
    "diam_exponent_dev": 1e-2,
    "area_linearity_rel": 1e-8,
    "radial_closed_form_abs": 1e-8,
    "radial_uniform_slack": 1e-6,
    "gh_monotone_slack": 0.10,
    "gh_ratio": 1.0 / 3.0,
    "gh_seed_spread": 0.25,
    "omega_delta_eps": 0.2,
    "sandwich_stability_factor": 2.0,
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    t_grid: tuple[float, ...] = (1.0, 0.1, 0.01)
    n_samples: int = 2000
    graph_k: int = 12
    seed: int = 42
    tolerances: dict[str, float] = field(default_factory=dict)
    output_path: str = "report.json"
    format: str = "json"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.t_grid:
            raise ConfigError("t_grid must be nonempty")
        if any(not (0.0 < t <= 1.0) for t in self.t_grid):
            raise ConfigError("t_grid entries must lie in (0, 1]")
        if any(a <= b for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ConfigError("t_grid must be strictly decreasing")
        if self.n_samples < 10:
            raise ConfigError("n_samples must be >= 10")
        if self.graph_k < 4:
            raise ConfigError("graph_k must be >= 4")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        for k in self.tolerances:
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {k!r}")

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


def _max_workers() -> int:
    env = os.environ.get("CONIFOLD_LAB_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"CONIFOLD_LAB_THREADS={env!r} is not an integer") from exc
        return max(1, cap)
    return min(4, os.cpu_count() or 1)


def _pmap(fn, items):
    """Map over independent work items on the capped pool, preserving order."""
    workers = _max_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fit_power_law(pairs) -> tuple[float, float, float]:
    """Least-squares power law v = amplitude * t^exponent in log-log coordinates."""
    if len(pairs) < 3:
        raise NonPositiveData("need at least 3 pairs")
    t = np.array([p[0] for p in pairs], dtype=float)
    v = np.array([p[1] for p in pairs], dtype=float)
    if np.any(t <= 0.0) or np.any(v <= 0.0):
        raise NonPositiveData("power-law fit needs positive data")
    lt, lv = np.log(t), np.log(v)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + intercept)
    total = lv - lv.mean()
    ss_tot = float(total @ total)
    r_sq = 1.0 if ss_tot == 0.0 else 1.0 - float(resid @ resid) / ss_tot
    return float(slope), float(math.exp(intercept)), r_sq


def _check(name: str, observed: float, bound: float, ok: bool) -> dict:
    return {"name": name, "pass": bool(ok), "observed": float(observed), "bound": float(bound)}


def _report_only(name: str, observed: float) -> dict:
    # recorded value, not asserted against anything
    return {"name": name, "pass": True, "observed": float(observed), "bound": float(observed)}


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _exp_profile_table(cfg: ExperimentConfig):
    n_rho = max(5, min(cfg.n_samples, 500))
    rho_values = np.linspace(-20.0, 0.0, n_rho)
    rows, max_cubic, max_pot = [], 0.0, 0.0
    for t in cfg.t_grid:
        params = ProfileParams(t)
        for r in rho_values:
            prof = eval_profile(params, float(r))
            cres = abs(cubic_residual(params, prof.rho, prof.uprime))
            pres = abs(
                math.log((t + prof.uprime) * prof.uprime * prof.usecond) - 2.0 * prof.rho
            )
            max_cubic, max_pot = max(max_cubic, cres), max(max_pot, pres)
            rows.append(
                {
                    "t": t,
                    "rho": prof.rho,
                    "uprime": prof.uprime,
                    "usecond": prof.usecond,
                    "cubic_residual": cres,
                    "ricci_potential_residual": pres,
                }
            )
    asserts = [
        _check("cubic_residual_max", max_cubic, cfg.tol("cubic_residual"),
               max_cubic <= cfg.tol("cubic_residual")),
        _check("ricci_potential_residual_max", max_pot, cfg.tol("ricci_potential_residual"),
               max_pot <= cfg.tol("ricci_potential_residual")),
    ]
    return rows, asserts


def _exp_diam_scaling(cfg: ExperimentConfig):
    rows = []
    for t in cfg.t_grid:
        diam = metricgeom.zero_section_diameter(t)
        rows.append({"t": t, "diameter": diam, "diam_t13": diam * t ** (-1.0 / 3.0)})
    grid = list(cfg.t_grid)
    if len(grid) < 3:
        grid = sorted(set(grid + [0.1, 0.01, 0.001]), reverse=True)
    slope, amp, r_sq = fit_power_law(
        [(t, metricgeom.zero_section_diameter(t)) for t in grid]
    )
    t13 = [r["diam_t13"] for r in rows]
    tol = cfg.tol("diam_exponent_dev")
    asserts = [
        _check("diam_exponent", slope, tol, abs(slope - 0.5) <= tol),
        _report_only("diam_amplitude", amp),
        _report_only("diam_fit_r_squared", r_sq),
        _check("diam_t13_max_at_t1", max(t13), t13[0] * (1.0 + 1e-12),
               max(t13) <= t13[0] * (1.0 + 1e-12)),
        _report_only("diam_t13_constant", max(t13)),
    ]
    return rows, asserts


def _exp_gh_converge(cfg: ExperimentConfig):
    seeds = [cfg.seed + i for i in range(5)]
    per_seed = _pmap(
        lambda s: metricgeom.gh_upper_bounds(list(cfg.t_grid), cfg.n_samples, s, cfg.graph_k),
        seeds,
    )

    rows = []
    for s, ests in zip(seeds, per_seed):
        for e in ests:
            rows.append({"seed": s, "t": e.t, "bound": e.bound})

    asserts = []
    slack = cfg.tol("gh_monotone_slack")
    ratio = cfg.tol("gh_ratio")
    for s, ests in zip(seeds, per_seed):
        bounds = [e.bound for e in ests]
        worst = 0.0
        for prev, nxt in zip(bounds, bounds[1:]):
            if prev > 0:
                worst = max(worst, nxt / prev - 1.0)
        asserts.append(_check(f"gh_monotone_seed{s}", worst, slack, worst <= slack))
        obs_ratio = bounds[-1] / bounds[0] if bounds[0] > 0 else math.inf
        asserts.append(_check(f"gh_ratio_seed{s}", obs_ratio, ratio, obs_ratio < ratio))
    spread_tol = cfg.tol("gh_seed_spread")
    for j, t in enumerate(cfg.t_grid):
        vals = [ests[j].bound for ests in per_seed]
        spread = (max(vals) - min(vals)) / max(vals) if max(vals) > 0 else 0.0
        asserts.append(_check(f"gh_seed_spread_t{t:g}", spread, spread_tol,
                              spread <= spread_tol))
    return rows, asserts


def _exp_ricci_audit(cfg: ExperimentConfig):
    rng = np.random.default_rng(cfg.seed)
    rows, asserts = [], []
    stencil = curvature.StencilSpec(h=1e-3, order=4)
    pts = metricgeom.sample_domain(OMEGA, 64, cfg.seed, rho_depth=5.0)
    pts = [p for p in pts if -5.0 < rho(p) < -0.1][:5]
    for t in cfg.t_grid:
        samples = list(rng.uniform(-20.0, 0.0, size=min(cfg.n_samples, 2000)))
        pot = curvature.ricci_potential_residual(t, samples)
        mats = [
            float(np.abs(curvature.ricci_form(forms.calabi_family(t), p, stencil).m).max())
            for p in pts
        ]
        rows.append({"t": t, "potential_residual": pot, "ricci_matrix_max": max(mats)})
        asserts.append(_check(f"ricci_potential_t{t:g}", pot,
                              cfg.tol("ricci_potential_residual"),
                              pot <= cfg.tol("ricci_potential_residual")))
        asserts.append(_check(f"ricci_matrix_t{t:g}", max(mats),
                              cfg.tol("ricci_matrix_max_entry"),
                              max(mats) <= cfg.tol("ricci_matrix_max_entry")))
    control_pt = ResolvedPoint(0.0, 0.5, 0.0)
    control = float(np.abs(curvature.ricci_form(forms.OMEGA_HAT, control_pt, stencil).m).max())
    asserts.append(_check("ricci_control_omega_hat", control,
                          cfg.tol("ricci_control_min_entry"),
                          control > cfg.tol("ricci_control_min_entry")))
    return rows, asserts


def _loccom_min_eigs(p: ResolvedPoint):
    restr = forms.restrict_to_fibre(forms.OMEGA_HAT, p).m2
    e_r1 = math.exp(rho_alpha(p, 1))
    lower = np.linalg.eigvalsh(restr - np.eye(2))[0]
    upper = np.linalg.eigvalsh((2.0 / e_r1) * np.eye(2) - restr)[0]
    trace = float(restr.trace().real)
    return float(lower), float(upper), e_r1 * trace


_ESTIMATE_ROW_KEYS = ("t", "norm_V_rel", "sup_w_scaled", "sup_fibre_trace_scaled",
                      "c0", "c1", "delta", "omega_delta_diameter")


def _estimate_row(**values) -> dict:
    return {k: values.get(k) for k in _ESTIMATE_ROW_KEYS}


def _estimates_for_t(t: float, sub) -> dict:
    kind = forms.calabi_family(t)
    params = ProfileParams(t)
    worst_v, sup_w, sup_h = 0.0, 0.0, 0.0
    c0, c1 = math.inf, 0.0
    for p in sub:
        r = rho(p)
        prof = eval_profile(params, r)
        nv = forms.vector_norm_sq(kind, forms.V, p)
        worst_v = max(worst_v, abs(nv - prof.usecond) / prof.usecond)
        nw = forms.vector_norm_sq(kind, forms.W, p)
        sup_w = max(sup_w, math.exp(0.5 * r) * nw)
        sup_h = max(sup_h, math.exp(rho_alpha(p, 1)) * forms.fibrewise_trace_H(kind, p))
        lmin, lmax = forms.compare_forms(
            forms.eval_form(kind, p), forms.eval_form(forms.CONIFOLD_FLAT, p)
        )
        c0, c1 = min(c0, lmin), max(c1, lmax * math.exp(r))
    return {"t": t, "worst_v": worst_v, "sup_w": sup_w, "sup_h": sup_h,
            "c0": c0, "c1": c1}


def _exp_estimates(cfg: ExperimentConfig):
    rows, asserts = [], []
    pts = metricgeom.sample_domain(OMEGA, cfg.n_samples, cfg.seed)

    # fibre comparison sandwich + fibrewise trace of the reference form
    lo_min, up_min, tr_max = math.inf, math.inf, 0.0
    for p in pts:
        lo, up, tr = _loccom_min_eigs(p)
        lo_min, up_min, tr_max = min(lo_min, lo), min(up_min, up), max(tr_max, tr)
    tol = cfg.tol("sandwich_min_eigenvalue")
    asserts.append(_check("fibre_sandwich_lower", lo_min, tol, lo_min >= tol))
    asserts.append(_check("fibre_sandwich_upper", up_min, tol, up_min >= tol))
    asserts.append(_check("fibre_trace_hat", tr_max, cfg.tol("trace_bound_hat"),
                          tr_max <= cfg.tol("trace_bound_hat")))

    # norm identities, vertical collapse and tangential comparison, per t
    rel_tol = cfg.tol("norm_identity_rel")
    sub = pts[: max(200, cfg.n_samples // 10)]
    worst_hat = 0.0
    for p in sub:
        nv = forms.vector_norm_sq(forms.OMEGA_HAT, forms.V, p)
        worst_hat = max(worst_hat, abs(nv - math.exp(rho(p))) / math.exp(rho(p)))
    asserts.append(_check("norm_V_hat_rel", worst_hat, rel_tol, worst_hat <= rel_tol))

    per_t = _pmap(lambda t: _estimates_for_t(t, sub), list(cfg.t_grid))
    for res in per_t:
        t = res["t"]
        rows.append(_estimate_row(t=t, norm_V_rel=res["worst_v"], sup_w_scaled=res["sup_w"],
                                  sup_fibre_trace_scaled=res["sup_h"], c0=res["c0"],
                                  c1=res["c1"]))
        asserts.append(_check(f"norm_V_family_rel_t{t:g}", res["worst_v"], rel_tol,
                              res["worst_v"] <= rel_tol))
        asserts.append(_report_only(f"vertical_collapse_sup_t{t:g}", res["sup_w"]))
        asserts.append(_report_only(f"fibre_trace_sup_t{t:g}", res["sup_h"]))
        asserts.append(_check(f"tangential_lower_t{t:g}", res["c0"], 0.0, res["c0"] > 0.0))
    c0s = [r["c0"] for r in per_t]
    c1s = [r["c1"] for r in per_t]
    factor = cfg.tol("sandwich_stability_factor")
    asserts.append(_check("tangential_c0_stability", max(c0s) / min(c0s), factor,
                          max(c0s) / min(c0s) <= factor))
    asserts.append(_check("tangential_c1_stability", max(c1s) / min(c1s), factor,
                          max(c1s) / min(c1s) <= factor))

    # radial path lengths: closed form at t = 0 and uniform boundedness
    closed = (1.5) ** (2.0 / 3.0)
    r0 = metricgeom.radial_length_from_rho(0.0, 0.0)
    tol_abs = cfg.tol("radial_closed_form_abs")
    asserts.append(_check("radial_closed_form", abs(r0 - closed), tol_abs,
                          abs(r0 - closed) <= tol_abs))
    slack = cfg.tol("radial_uniform_slack")
    worst = max(metricgeom.radial_length_from_rho(0.0, t) for t in cfg.t_grid)
    asserts.append(_check("radial_uniform_bound", worst, r0 + slack, worst <= r0 + slack))

    # shrinking small neighbourhoods: find (delta, t) with sampled diameter < eps
    eps = cfg.tol("omega_delta_eps")
    found = None
    best_diam = math.inf
    n_small = max(300, cfg.n_samples // 4)
    for delta in (0.05, 0.02, 0.01, 0.005):
        for t in (min(cfg.t_grid), min(cfg.t_grid) / 10.0, min(cfg.t_grid) / 100.0):
            cloud = metricgeom.build_cloud(omega_r(delta), forms.calabi_family(t),
                                           n_small, cfg.graph_k, cfg.seed)
            diam = metricgeom.cloud_diameter(cloud) + 2.0 * metricgeom.radial_stub(
                t, 2.0 * math.log(delta) - metricgeom.RHO_DEPTH)
            rows.append(_estimate_row(t=t, delta=delta, omega_delta_diameter=diam))
            best_diam = min(best_diam, diam)
            if diam < eps:
                found = (delta, t, diam)
                break
        if found:
            break
    asserts.append(_check("omega_delta_shrinks", best_diam, eps, found is not None))
    if found:
        asserts.append(_report_only("omega_delta_delta", found[0]))
        asserts.append(_report_only("omega_delta_t", found[1]))
    return rows, asserts


_RUNNERS = {
    "profile-table": _exp_profile_table,
    "diam-scaling": _exp_diam_scaling,
    "gh-converge": _exp_gh_converge,
    "ricci-audit": _exp_ricci_audit,
    "estimates": _exp_estimates,
}


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(k, "")) for k in header])
    return buf.getvalue()


def _config_dict(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "t_grid": list(cfg.t_grid),
        "n_samples": cfg.n_samples,
        "graph_k": cfg.graph_k,
        "seed": cfg.seed,
        "tolerances": {k: cfg.tolerances[k] for k in sorted(cfg.tolerances)},
        "output_path": cfg.output_path,
        "format": cfg.format,
    }


def run(config: ExperimentConfig) -> int:
    """Execute the experiment, write the report, return the exit code."""
    rows, asserts = _RUNNERS[config.experiment](config)
    report = {
        "experiment": config.experiment,
        "config": _config_dict(config),
        "rows": rows,
        "asserts": asserts,
        "version": VERSION,
    }
    try:
        if config.format == "json":
            text = json.dumps(report, indent=2, allow_nan=False) + "\n"
        else:
            text = _rows_to_csv(rows)
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except (OSError, ValueError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    ok = True
    for a in asserts:
        status = "PASS" if a["pass"] else "FAIL"
        ok = ok and a["pass"]
        print(f"{status} {a['name']}: observed={_fmt(a['observed'])} bound={_fmt(a['bound'])}")
    print(f"{'OK' if ok else 'INVARIANT FAILURE'}: report written to {config.output_path}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# configuration parsing
# ---------------------------------------------------------------------------


def _parse_t_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad t_grid {text!r}") from exc


def _read_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"bad config line {line!r}")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    file_vals = _read_config_file(args.config) if args.config else {}

    def pick(cli_val, key, cast, default):
        if cli_val is not None:
            return cli_val
        if key in file_vals:
            try:
                return cast(file_vals[key])
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"bad config value for {key}: {file_vals[key]!r}") from exc
        return default

    tolerances: dict[str, float] = {}
    for key, val in file_vals.items():
        if key.startswith("tol_"):
            name = key[4:]
            try:
                tolerances[name] = float(val)
            except ValueError as exc:
                raise ConfigError(f"bad tolerance {key}={val!r}") from exc
    for item in args.tol or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        name, _, val = item.partition("=")
        try:
            tolerances[name] = float(val)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance {item!r}") from exc

    experiment = args.experiment or file_vals.get("experiment")
    if not experiment:
        raise ConfigError("no experiment given")
    return ExperimentConfig(
        experiment=experiment,
        t_grid=pick(_parse_t_grid(args.t_grid) if args.t_grid else None, "t_grid",
                    _parse_t_grid, (1.0, 0.1, 0.01)),
        n_samples=pick(args.n, "n", int, 2000),
        graph_k=pick(args.k, "k", int, 12),
        seed=pick(args.seed, "seed", int, 42),
        tolerances=tolerances,
        output_path=pick(args.out, "out", str, "report.json"),
        format=pick(args.format, "format", str, "json"),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="conifold-lab",
        description="Verification experiments for the resolved-conifold metric family.",
    )
    parser.add_argument("experiment", nargs="?", choices=EXPERIMENTS)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--t-grid", dest="t_grid", help="comma-separated decreasing t values")
    parser.add_argument("--n", type=int, help="sample count")
    parser.add_argument("--k", type=int, help="neighbour count for cloud graphs")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    parser.add_argument("--out", help="report output path")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="override a named tolerance (repeatable)")
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
