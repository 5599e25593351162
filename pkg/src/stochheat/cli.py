"""Command-line entry point: configuration, CSV and manifest output.

    stochheat strong-order --samples 100 --output-dir out/
    stochheat strong-order --config out/manifest.json      # rerun

Exit codes: 0 success, 1 invalid configuration, 2 numerical abort, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from .green_kernel import check_bound
from .grid_spectral import GridSpec
from .noise import NoisePlan, coupled_stream
from .problem import get_problem
from .schemes import NumericalAbort, SchemeKind, integrate

OUTPUT_ENV = "STOCHHEAT_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# -- value parsing ------------------------------------------------------------

def _number(tok) -> float:
    if isinstance(tok, bool):
        raise ValueError(f"expected a number, got {tok!r}")
    if isinstance(tok, (int, float)):
        return float(tok)
    tok = str(tok).strip()
    if "^" in tok:
        base, exp = tok.split("^", 1)
        return float(base) ** float(exp)
    return float(tok)


def _int(tok) -> int:
    v = _number(tok)
    if v != int(v):
        raise ValueError(f"expected an integer, got {tok!r}")
    return int(v)


def _float_list(tok) -> tuple:
    items = tok if isinstance(tok, (list, tuple)) else str(tok).split(",")
    return tuple(_number(t) for t in items if str(t).strip())


def _int_list(tok) -> tuple:
    items = tok if isinstance(tok, (list, tuple)) else str(tok).split(",")
    return tuple(_int(t) for t in items if str(t).strip())


def _str_list(tok) -> tuple:
    items = tok if isinstance(tok, (list, tuple)) else str(tok).split(",")
    return tuple(str(t).strip().lower() for t in items if str(t).strip())


def _bool(tok) -> bool:
    if isinstance(tok, bool):
        return tok
    s = str(tok).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {tok!r}")


def _window(tok):
    if tok is None:
        return None
    v = _float_list(tok)
    if len(v) != 2:
        raise ValueError("expected two step sizes dt_min,dt_max")
    return tuple(sorted(v))


PARSERS = {
    "problem": str, "scheme": str, "schemes": _str_list, "bounds": _str_list,
    "M": _int, "M_set": _int_list, "T": _number, "dt": _number, "dt_ref": _number,
    "dt_levels": _float_list, "samples": _int, "seed": _int, "sample_index": _int,
    "paths": _int, "batch_size": _int, "repetitions": _int, "slope_window": _window,
    "panels": _int, "holder_dt": _number, "s0": _number, "record_every": _int,
    "timing": _bool, "output_dir": str,
}

HELP = {
    "problem": "built-in problem: strong_test, as_test or nonlip_demo",
    "scheme": "time integrator: sexp, sem or cnm",
    "schemes": "comma-separated integrators",
    "bounds": "kernel estimates to check: I,II,III",
    "M": "number of spatial cells", "M_set": "comma-separated spatial resolutions",
    "T": "final time", "dt": "time step", "dt_ref": "reference (finest) time step",
    "dt_levels": "comma-separated coarse time steps (2^-k accepted)",
    "samples": "Monte Carlo samples", "seed": "64-bit noise seed",
    "sample_index": "first sample path index", "paths": "number of sample paths",
    "batch_size": "samples integrated together", "repetitions": "timing repetitions",
    "slope_window": "dt_min,dt_max of the slope fit", "panels": "time quadrature panels for estimate (i)",
    "holder_dt": "time step of the Hölder check", "s0": "base time of the Hölder time increments",
    "record_every": "snapshot stride in steps", "timing": "write measured wall times (false: zeros)",
    "output_dir": f"output directory (default ${OUTPUT_ENV} or ./results)",
}


def _defaults() -> dict[str, dict]:
    sc, wp, asc = ex.StrongStudyConfig(), ex.WorkPrecisionConfig(), ex.ASConfig()
    mc, hc = ex.MomentConfig(), ex.HolderConfig()
    return {
        "strong-order": dict(problem=sc.problem, M=sc.M, T=sc.T, dt_levels=sc.dt_levels, dt_ref=sc.dt_ref,
                             samples=sc.samples, seed=sc.seed, schemes=sc.schemes,
                             batch_size=sc.batch_size, slope_window=None, timing=True),
        "work-precision": dict(problem=wp.problem, M=wp.M, T=wp.T, dt_levels=wp.dt_levels,
                               dt_ref=wp.dt_ref, samples=wp.samples, seed=wp.seed, schemes=wp.schemes,
                               repetitions=wp.repetitions, batch_size=wp.batch_size, timing=True),
        "as-convergence": dict(problem=asc.problem, M=asc.M, T=asc.T, dt_levels=asc.dt_levels,
                               dt_ref=asc.dt_ref, seed=asc.seed, sample_index=asc.sample_index, paths=1),
        "kernel-checks": dict(M_set=(8, 16, 32, 64), bounds=("i", "ii", "iii"), panels=128),
        "moment-checks": dict(problem=mc.problem, M_set=mc.M_set, T=mc.T, dt=mc.dt, samples=mc.samples,
                              seed=mc.seed, batch_size=mc.batch_size, M=hc.M, holder_dt=hc.dt, s0=hc.s0),
        "single-run": dict(problem="strong_test", scheme="sexp", M=64, T=0.5, dt=2.0**-10, seed=1,
                           sample_index=0, record_every=16),
    }


DEFAULTS = _defaults()


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    output_dir: Path = field(default_factory=lambda: Path(os.environ.get(OUTPUT_ENV, "results")))

    def __getitem__(self, key):
        return self.params[key]

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, "output_dir": str(self.output_dir),
                **{k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}}


def _coerce(sub: str, key: str, value, source: str):
    if key not in DEFAULTS[sub] and key != "output_dir":
        raise ConfigError(f"unknown key {key!r} for {sub} ({source})")
    try:
        return PARSERS[key](value) if value is not None else None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r} ({source}): {exc}") from None


def _read_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    if "config" in data and isinstance(data["config"], dict):  # a manifest
        data = dict(data["config"])
    return data


def _validate(cfg: RunConfig):
    p, sub = cfg.params, cfg.subcommand
    try:
        if "problem" in p:
            get_problem(p["problem"])
        if sub == "strong-order":
            strong_config(cfg).validate()
        elif sub == "work-precision":
            work_config(cfg).validate()
        elif sub == "as-convergence":
            as_config(cfg, 0).validate()
            if p["paths"] < 1:
                raise ValueError("paths: need at least 1")
        elif sub == "kernel-checks":
            if not p["M_set"] or min(p["M_set"]) < 2:
                raise ValueError("M_set: every M must be >= 2")
            for b in p["bounds"]:
                if b.upper() not in ("I", "II", "III"):
                    raise ValueError(f"bounds: unknown estimate {b!r}")
            if p["panels"] < 128:
                raise ValueError("panels: need at least 128")
        elif sub == "moment-checks":
            if min(p["M_set"]) < 2 or p["samples"] < 2:
                raise ValueError("M_set/samples out of range")
            ex._steps_for(p["T"], p["dt"], "dt")
            ex._steps_for(p["T"], p["holder_dt"], "holder_dt")
        elif sub == "single-run":
            if p["scheme"] not in {k.value for k in SchemeKind}:
                raise ValueError(f"scheme: unknown scheme {p['scheme']!r}")
            GridSpec(p["M"], ex._steps_for(p["T"], p["dt"], "dt"), p["T"])
            if p["record_every"] < 1:
                raise ValueError("record_every: need at least 1")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def strong_config(cfg: RunConfig) -> ex.StrongStudyConfig:
    p = cfg.params
    return ex.StrongStudyConfig(problem=p["problem"], M=p["M"], T=p["T"], dt_levels=p["dt_levels"],
                                dt_ref=p["dt_ref"], samples=p["samples"], seed=p["seed"],
                                schemes=p["schemes"], batch_size=p["batch_size"],
                                slope_window=p["slope_window"])


def work_config(cfg: RunConfig) -> ex.WorkPrecisionConfig:
    p = cfg.params
    return ex.WorkPrecisionConfig(problem=p["problem"], M=p["M"], T=p["T"], dt_levels=p["dt_levels"],
                                  dt_ref=p["dt_ref"], samples=p["samples"], seed=p["seed"],
                                  schemes=p["schemes"], repetitions=p["repetitions"],
                                  batch_size=p["batch_size"])


def as_config(cfg: RunConfig, path: int) -> ex.ASConfig:
    p = cfg.params
    return ex.ASConfig(problem=p["problem"], M=p["M"], T=p["T"], dt_levels=p["dt_levels"],
                       dt_ref=p["dt_ref"], seed=p["seed"], sample_index=p["sample_index"] + path)


def _show(v) -> str:
    if isinstance(v, float) and 0 < v < 1 and math.log2(v).is_integer():
        return f"2^{int(math.log2(v))}"
    return str(v)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stochheat", description="Stochastic heat equation: integrators and studies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for sub, defaults in DEFAULTS.items():
        sp = subs.add_parser(sub, help=f"run {sub}")
        sp.add_argument("--config", default=None,
                        help="JSON file of key/value settings, or a manifest to rerun")
        for key, default in list(defaults.items()) + [("output_dir", None)]:
            shown = ",".join(map(_show, default)) if isinstance(default, tuple) else _show(default)
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=argparse.SUPPRESS,
                            help=f"{HELP[key]} (default: {shown})")
    return parser


def parse_config(argv=None) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    path = ns.pop("config", None)
    params = dict(DEFAULTS[sub])
    out_dir = None
    if path is not None:
        for key, value in _read_file(path).items():
            if key == "subcommand":
                if value != sub:
                    raise ConfigError(f"config {path} is for {value!r}, not {sub!r}")
                continue
            if key == "output_dir":
                out_dir = value
                continue
            params[key] = _coerce(sub, key, value, path)
    for key, value in ns.items():
        if key == "output_dir":
            out_dir = value
            continue
        params[key] = _coerce(sub, key, value, "command line")
    cfg = RunConfig(sub, params)
    if out_dir is not None:
        cfg.output_dir = Path(out_dir)
    _validate(cfg)
    return cfg


# -- output -------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def write_csv(rows, path, header: list[str] | None = None) -> None:
    """Write dict/dataclass rows; floats use the shortest round-trip repr."""
    rows = [dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r) for r in rows]
    if header is None:
        if not rows:
            raise ValueError("an empty table needs an explicit header")
        header = list(rows[0])
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(row.get(k)) for k in header])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


ERROR_COLUMNS = ["dt", "sup_msq_error", "rms_error", "wall_time_s", "samples_used", "aborted_samples",
                 "sup_msq_stderr", "argmax_t", "argmax_x", "log2_dt", "log2_err"]


def error_report_rows(report: ex.ErrorReport, timing: bool = True) -> list[dict]:
    rows = []
    for lv in report.levels:
        row = dataclasses.asdict(lv)
        if not timing:
            row["wall_time_s"] = 0.0
        row["log2_dt"] = math.log2(lv.dt)
        row["log2_err"] = math.log2(lv.sup_msq_error) if lv.sup_msq_error > 0 else float("-inf")
        rows.append(row)
    return rows


def write_manifest(cfg: RunConfig, outcome: dict, path) -> None:
    doc = {
        "tool": "stochheat",
        "version": __version__,
        "subcommand": cfg.subcommand,
        "seed": cfg.params.get("seed"),
        "samples": cfg.params.get("samples"),
        "config": cfg.to_json(),
        "outcome": _finite_or_null(outcome),
        "host": f"{platform.python_implementation()} {platform.python_version()} / numpy {np.__version__}",
    }
    path = Path(path)
    try:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _finite_or_null(v):
    # strict JSON has no NaN / Infinity
    if isinstance(v, dict):
        return {str(k): _finite_or_null(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_finite_or_null(x) for x in v]
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    return v


# -- subcommands --------------------------------------------------------------

def _run_strong(cfg: RunConfig, out: Path) -> dict:
    reports = ex.strong_error_study(strong_config(cfg))
    outcome = {}
    for scheme, rep in reports.items():
        write_csv(error_report_rows(rep, cfg["timing"]), out / f"strong_{scheme}.csv", ERROR_COLUMNS)
        outcome[scheme] = {"fitted_slope": rep.fitted_slope, "slope_stderr": rep.slope_stderr,
                           "fit_window": list(rep.fit_window)}
    return outcome


def _run_work(cfg: RunConfig, out: Path) -> dict:
    rows = ex.work_precision_study(work_config(cfg))
    table = []
    for r in rows:
        table.append({"scheme": r.scheme, "dt": r.dt,
                      "wall_time_total_s": r.wall_time_total_s if cfg["timing"] else 0.0,
                      "avg_final_error": r.avg_final_error, "log2_dt": math.log2(r.dt),
                      "log2_err": math.log2(r.avg_final_error) if r.avg_final_error > 0 else float("-inf")})
    write_csv(table, out / "work_precision.csv",
              ["scheme", "dt", "wall_time_total_s", "avg_final_error", "log2_dt", "log2_err"])
    totals = {}
    for r in rows:
        totals[r.scheme] = totals.get(r.scheme, 0.0) + r.wall_time_total_s
    return {"total_wall_time_s": totals if cfg["timing"] else {}}


def _run_as(cfg: RunConfig, out: Path) -> dict:
    dist_rows, outcome = [], {}
    for path in range(cfg["paths"]):
        acfg = as_config(cfg, path)
        res = ex.as_convergence_profiles(acfg)
        cols = {"x": res.x, "reference": res.reference}
        for dt, prof in zip(res.dts, res.profiles):
            cols[f"dt={dt!r}"] = prof
        rows = [{k: v[i] for k, v in cols.items()} for i in range(len(res.x))]
        write_csv(rows, out / f"as_profiles_path{acfg.sample_index}.csv", list(cols))
        for dt, d in zip(res.dts, res.sup_distance):
            dist_rows.append({"sample_index": acfg.sample_index, "dt": dt, "sup_distance": d})
        outcome[str(acfg.sample_index)] = ex.decreasing_fraction(res.sup_distance)
    write_csv(dist_rows, out / "as_distance.csv", ["sample_index", "dt", "sup_distance"])
    return {"decreasing_fraction": outcome}


def _run_kernel(cfg: RunConfig, out: Path) -> dict:
    rows, summary = [], []
    runs = []
    for b in cfg["bounds"]:
        b = b.upper()
        if b == "III":
            # alpha in (1/2, 1) and alpha >= 1 are reported apart
            runs += [("III", "alpha<1", (0.6, 0.75, 0.9)), ("III", "alpha>=1", (1.0, 1.5, 2.0, 2.4))]
        else:
            runs.append((b, "", (0.75,)))
    for b, tag, alphas in runs:
        fit = check_bound(b, M_set=cfg["M_set"], panels=cfg["panels"], alphas=alphas)
        for (bid, M, s, t, x, alpha, ratio) in fit.rows:
            rows.append({"bound_id": bid, "range": tag, "M": M, "s": s, "t": t, "x": x,
                         "alpha": alpha, "ratio": ratio})
        summary.append({"bound_id": b, "range": tag, "fitted_C": fit.fitted_C, "refined_C": fit.refined_C,
                        "passed": fit.passed,
                        **{f"C_M{M}": c for M, c in fit.per_M.items()}})
    write_csv(rows, out / "kernel_bounds.csv", ["bound_id", "range", "M", "s", "t", "x", "alpha", "ratio"])
    header = ["bound_id", "range", "fitted_C", "refined_C", "passed"] + [f"C_M{M}" for M in cfg["M_set"]]
    write_csv(summary, out / "kernel_summary.csv", header)
    return {"bounds": summary}


def _run_moments(cfg: RunConfig, out: Path) -> dict:
    p = cfg.params
    mom = ex.moment_bound_check(ex.MomentConfig(problem=p["problem"], M_set=p["M_set"], T=p["T"], dt=p["dt"],
                                                samples=p["samples"], seed=p["seed"],
                                                batch_size=p["batch_size"]))
    keys = ["sup_m2", "sup_m4", "late_sup_m2", "late_sup_m4"]
    write_csv([{"M": M, **{k: mom[k][i] for k in keys}} for i, M in enumerate(mom["M"])],
              out / "moments.csv", ["M"] + keys)
    hol = ex.holder_increment_check(ex.HolderConfig(problem=p["problem"], M=p["M"], T=p["T"],
                                                    dt=p["holder_dt"], samples=p["samples"], seed=p["seed"],
                                                    batch_size=p["batch_size"], s0=p["s0"]))
    rows = [{"kind": "time", "lag": h, "msq_increment": v} for h, v in zip(hol.time_lags, hol.time_msq)]
    rows += [{"kind": "space", "lag": h, "msq_increment": v} for h, v in zip(hol.space_lags, hol.space_msq)]
    write_csv(rows, out / "holder.csv", ["kind", "lag", "msq_increment"])
    return {"moment_ratios": mom["ratios"], "moments_passed": mom["passed"],
            "time_exponent": hol.time_exponent, "space_exponent": hol.space_exponent}


def _run_single(cfg: RunConfig, out: Path) -> dict:
    p = cfg.params
    problem = get_problem(p["problem"])
    grid = GridSpec(p["M"], ex._steps_for(p["T"], p["dt"]), p["T"])
    plan = NoisePlan(p["seed"], p["M"], grid.N, p["T"], p["sample_index"])
    record = sorted(set(range(0, grid.N + 1, p["record_every"])) | {grid.N})
    states = integrate(SchemeKind(p["scheme"]), problem, grid, coupled_stream(plan, grid.N), record)
    x = grid.x_full
    rows = []
    for st in states:
        full = np.concatenate([[0.0], st.U, [0.0]])
        rows += [{"n": st.n, "t": st.t, "x": float(xi), "u": float(ui)} for xi, ui in zip(x, full)]
    write_csv(rows, out / "trajectory.csv", ["n", "t", "x", "u"])
    return {"snapshots": len(states), "final_sup": float(np.max(np.abs(states[-1].U)))}


RUNNERS = {"strong-order": _run_strong, "work-precision": _run_work, "as-convergence": _run_as,
           "kernel-checks": _run_kernel, "moment-checks": _run_moments, "single-run": _run_single}


def run(cfg: RunConfig) -> dict:
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    outcome = RUNNERS[cfg.subcommand](cfg, out)
    write_manifest(cfg, outcome, out / "manifest.json")
    return outcome


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        outcome = run(cfg)
    except ConfigError as exc:
        print(f"stochheat: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"stochheat: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"stochheat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(_finite_or_null(outcome), indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
