"""Command-line entry points: simulate, reference, benchmark, compare-solvers.

Configuration is layered: the named preset supplies defaults, an optional
JSON config file overrides them, and command-line flags override the file.
Every output directory receives a ``manifest.json`` with the fully resolved
configuration so any run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__, benchmarks, snapshots
from .benchmarks import BenchmarkSpec, IcSpec, ReferencePoint
from .controller import RunAbortedError
from .models import PfcParams
from .schemes import SchemeKind

_PARAM_FIELDS = ("L", "N", "origin", "s", "dt_min", "dt_max", "tol_iter", "T",
                 "ref_x", "ref_y", "ref_t", "objective_tol")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def resolve_spec(problem: str, file_cfg: dict) -> BenchmarkSpec:
    spec = benchmarks.preset(problem)
    if not file_cfg:
        return spec
    updates = {k: file_cfg[k] for k in _PARAM_FIELDS if k in file_cfg}
    if "eta_list" in file_cfg:
        updates["eta_list"] = tuple(float(v) for v in file_cfg["eta_list"])
    if "params" in file_cfg:
        updates["params"] = replace(spec.params, **file_cfg["params"])
    if "ic" in file_cfg:
        ic = file_cfg["ic"]
        updates["ic"] = IcSpec(ic["kind"], dict(ic.get("params", {})))
    return replace(spec, **updates) if updates else spec


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"error: cannot read config {path}: {exc}")


def _spec_dict(spec: BenchmarkSpec) -> dict:
    d = dataclasses.asdict(spec)
    d["model"] = "pfc" if isinstance(spec.params, PfcParams) else "fch"
    return d


def _spec_hash(spec: BenchmarkSpec, extra: dict | None = None) -> str:
    payload = {"spec": _spec_dict(spec), "extra": extra or {}}
    blob = json.dumps(payload, sort_keys=True, default=list)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _out_dir(args, default_name: str) -> Path:
    root = args.out or os.environ.get("PFCBENCH_OUT", ".")
    path = Path(root) / default_name if args.out is None else Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out: Path, spec: BenchmarkSpec, extra: dict) -> None:
    manifest = {"version": __version__, "spec": _spec_dict(spec), **extra}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=list)


def _parse_snapshot_times(raw: str | None) -> tuple[float, ...]:
    if not raw:
        return ()
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise SystemExit(f"error: bad --snapshot-times value {raw!r}")


def _parse_scheme(name: str) -> SchemeKind:
    try:
        return SchemeKind.parse(name)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")


def _attach_run_log(out: Path) -> logging.Handler:
    """Send package diagnostics to <out>/run.log.

    ``PFCBENCH_LOG=debug`` also captures the per-step preconditioner line and
    per-iteration solver traces.
    """
    level = getattr(logging, os.environ.get("PFCBENCH_LOG", "info").upper(), logging.INFO)
    handler = logging.FileHandler(out / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    root = logging.getLogger("pfcbench")
    root.setLevel(level)
    root.addHandler(handler)
    return handler


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    problem = args.problem or cfg.get("problem")
    if not problem:
        raise SystemExit("error: --problem is required (or set it in the config file)")
    spec = resolve_spec(problem, cfg)
    scheme = _parse_scheme(args.scheme or cfg.get("scheme", "bdf2"))
    tol = args.tol if args.tol is not None else cfg.get("step_tol", 1e-4)
    T = args.final_time if args.final_time is not None else cfg.get("T")
    estimator = args.estimator or cfg.get("estimator")
    snaps = _parse_snapshot_times(args.snapshot_times) or tuple(cfg.get("snapshot_times", ()))
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    out = _out_dir(args, f"simulate-{problem}-{scheme.value}")

    _write_manifest(out, spec, {
        "command": "simulate", "problem": problem, "scheme": scheme.value,
        "solver": args.solver, "estimator": estimator or benchmarks.default_estimator(problem, scheme),
        "step_tol": tol, "T": T if T is not None else spec.T,
        "snapshot_times": list(snaps), "seed": seed,
    })
    log_handler = _attach_run_log(out)
    logger = logging.getLogger("pfcbench.cli")
    logger.info("simulate %s scheme=%s solver=%s tol=%g", problem, scheme.value,
                args.solver, tol)
    try:
        report, _ops = benchmarks.run_benchmark(
            spec, scheme, tol, T=T, algorithm=args.solver,
            estimator=estimator, seed=seed, snapshot_times=snaps)
        logger.info("run complete: %d accepted / %d rejected steps, fft=%s",
                    report.accepted_count, report.rejected_count,
                    _fmt(report.fft_reported))
    except RunAbortedError as exc:
        exc.report.write_csv(out / "report.csv")
        logger.error("aborted: %s", exc)
        print(f"simulate {problem}/{scheme.value}: ABORTED: {exc}", file=sys.stderr)
        return 1
    finally:
        log_handler.close()
        logging.getLogger("pfcbench").removeHandler(log_handler)
    report.write_csv(out / "report.csv")
    for t_snap, field in sorted(report.snapshots.items()):
        snapshots.write_snapshot(out / f"snapshot_t{t_snap!r}.bin", field, t_snap)
        snapshots.export_csv(out / f"snapshot_t{t_snap!r}.csv", field)
    snapshots.write_snapshot(out / f"final_t{report.final_time!r}.bin",
                             report.final, report.final_time)
    print(f"simulate {problem}/{scheme.value}: {report.accepted_count} accepted / "
          f"{report.rejected_count} rejected steps, fft={_fmt(report.fft_reported)}, "
          f"wrote {out}")
    return 0


def _reference_cache_path(out: Path, problem: str, h: str) -> Path:
    return out / f"reference-{problem}-{h}.json"


def compute_reference(spec: BenchmarkSpec, out: Path, tol: float, seed: int,
                      max_level: int, force: bool = False) -> ReferencePoint:
    h = _spec_hash(spec, {"tol": tol, "seed": seed, "max_level": max_level})
    cache = _reference_cache_path(out, spec.name, h)
    if cache.exists() and not force:
        try:
            with open(cache) as fh:
                data = json.load(fh)
            if data.get("spec_hash") == h:
                return ReferencePoint(**data["reference"])
        except (json.JSONDecodeError, TypeError, KeyError):
            pass  # corrupt cache: fall through and recompute
    ref = benchmarks.reference_solve(spec, tol=tol, seed=seed, max_level=max_level)
    with open(cache, "w") as fh:
        json.dump({"spec_hash": h, "reference": dataclasses.asdict(ref)}, fh, indent=2)
    return ref


def cmd_reference(args) -> int:
    cfg = _load_config(args.config)
    problem = args.problem or cfg.get("problem")
    if not problem:
        raise SystemExit("error: --problem is required")
    spec = resolve_spec(problem, cfg)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    out = _out_dir(args, f"reference-{problem}")
    _write_manifest(out, spec, {"command": "reference", "problem": problem,
                                "tol": args.ref_tol, "seed": seed,
                                "max_level": args.max_level})
    ref = compute_reference(spec, out, args.ref_tol, seed, args.max_level, args.force)
    status = "certified" if ref.certified else "NOT certified"
    print(f"reference {problem}: value={_fmt(ref.value)} at "
          f"(x,y,t)=({_fmt(ref.x)},{_fmt(ref.y)},{_fmt(ref.t)}) "
          f"dt={_fmt(ref.dt)} [{status}]")
    return 0 if ref.certified else 1


def _benchmark_one(payload):
    problem, scheme_name, cfg, solver, seed, ref_tol, max_level, out_str = payload
    try:
        spec = resolve_spec(problem, cfg)
        scheme = SchemeKind.parse(scheme_name)
        out = Path(out_str)
        ref = compute_reference(spec, out, ref_tol, seed, max_level)
        row = benchmarks.cost_protocol(spec, scheme, ref, algorithm=solver, seed=seed)
        return {"ok": True, "row": dataclasses.asdict(row)}
    except Exception as exc:  # noqa: BLE001 - runs are independent
        return {"ok": False, "problem": problem, "scheme": scheme_name, "error": str(exc)}


def cmd_benchmark(args) -> int:
    cfg = _load_config(args.config)
    problems = (args.problem or cfg.get("problem", "")).split(",")
    problems = [p.strip() for p in problems if p.strip()]
    if not problems:
        raise SystemExit("error: --problem is required (comma-separated list allowed)")
    schemes = (args.scheme or cfg.get("scheme", "mp,bdf2,lmp,lbdf2")).split(",")
    schemes = [s.strip() for s in schemes if s.strip()]
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    out = _out_dir(args, "benchmark")
    pairs = sorted((p, s) for p in problems for s in schemes)
    payloads = [(p, s, cfg, args.solver, seed, args.ref_tol, args.max_level, str(out))
                for p, s in pairs]
    failures = []
    rows = []
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_benchmark_one, payloads))
    else:
        results = [_benchmark_one(payload) for payload in payloads]
    for res in results:
        if not res["ok"]:
            failures.append((res["problem"], res["scheme"], res["error"]))
            continue
        row = benchmarks.CostRow(**res["row"])
        rows.append(row)
        if row.status != "ok":
            failures.append((row.problem, row.scheme, "objective tolerance not met"))
    benchmarks.write_cost_csv(out / "benchmark.csv", rows)
    _write_manifest(out, resolve_spec(problems[0], cfg), {
        "command": "benchmark", "problems": problems, "schemes": schemes,
        "solver": args.solver, "seed": seed,
    })
    print(f"benchmark: wrote {len(rows)} rows to {out / 'benchmark.csv'}")
    for prob, scheme, msg in failures:
        print(f"  FAILED {prob}/{scheme}: {msg}", file=sys.stderr)
    return 1 if failures else 0


def cmd_compare_solvers(args) -> int:
    cfg = _load_config(args.config)
    problems = (args.problem or cfg.get("problem", "")).split(",")
    problems = [p.strip() for p in problems if p.strip()]
    if not problems:
        raise SystemExit("error: --problem is required")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    tol = args.tol if args.tol is not None else cfg.get("step_tol", 1e-4)
    out = _out_dir(args, "compare-solvers")
    failures = []
    lines = ["Prob,Scheme,Solver,FFT,Clock (sec),CPU (sec),Accepted,Rejected"]
    for problem in problems:
        spec = resolve_spec(problem, cfg)
        scheme = _parse_scheme(args.scheme) if args.scheme else None
        try:
            result = benchmarks.compare_pgd_pagd(spec, scheme=scheme, step_tol=tol,
                                                 T=args.final_time, seed=seed)
        except RunAbortedError as exc:
            failures.append((problem, str(exc)))
            continue
        for solver in ("pgd", "pagd"):
            r = result[solver]
            lines.append(f"{r['problem']},{r['scheme']},{solver},{_fmt(r['fft'])},"
                         f"{_fmt(r['clock_sec'])},{_fmt(r['cpu_sec'])},"
                         f"{r['accepted']},{r['rejected']}")
        ratio = result["pagd"]["fft"] / max(result["pgd"]["fft"], 1.0)
        print(f"compare-solvers {problem}: pgd fft={_fmt(result['pgd']['fft'])} "
              f"pagd fft={_fmt(result['pagd']['fft'])} (ratio {ratio:.3f})")
    (out / "compare.csv").write_text("\n".join(lines) + "\n")
    _write_manifest(out, resolve_spec(problems[0], cfg), {
        "command": "compare-solvers", "problems": problems, "step_tol": tol, "seed": seed,
    })
    for prob, msg in failures:
        print(f"  FAILED {prob}: {msg}", file=sys.stderr)
    return 1 if failures else 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfcbench",
        description="Pseudo-spectral benchmark suite for sixth-order phase-field flows",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file overriding preset values")
        p.add_argument("--problem", help=f"benchmark name ({', '.join(benchmarks.preset_names())})")
        p.add_argument("--out", help="output directory (default: $PFCBENCH_OUT or cwd)")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized initial data")

    p_sim = sub.add_parser("simulate", help="run one (problem, scheme) evolution")
    common(p_sim)
    p_sim.add_argument("--scheme", help="mp | bdf2 | lmp | lbdf2")
    p_sim.add_argument("--solver", choices=("pgd", "pagd"), default="pagd")
    p_sim.add_argument("--estimator", choices=("am3", "midab2"), default=None)
    p_sim.add_argument("--tol", type=float, default=None, help="stepping tolerance")
    p_sim.add_argument("--final-time", type=float, default=None, help="override final time T")
    p_sim.add_argument("--snapshot-times", help="comma-separated times to save fields at")
    p_sim.set_defaults(func=cmd_simulate)

    p_ref = sub.add_parser("reference", help="certify the high-accuracy reference point value")
    common(p_ref)
    p_ref.add_argument("--ref-tol", type=float, default=1e-6, help="settling tolerance of the ladder")
    p_ref.add_argument("--max-level", type=int, default=8, help="deepest dt = 0.1^level to try")
    p_ref.add_argument("--force", action="store_true", help="ignore the cache and recompute")
    p_ref.set_defaults(func=cmd_reference)

    p_bench = sub.add_parser("benchmark", help="cost-vs-accuracy protocol, one CSV row per run")
    common(p_bench)
    p_bench.add_argument("--scheme", help="comma-separated scheme list (default: all four)")
    p_bench.add_argument("--solver", choices=("pgd", "pagd"), default="pagd")
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel (problem, scheme) runs")
    p_bench.add_argument("--ref-tol", type=float, default=1e-6)
    p_bench.add_argument("--max-level", type=int, default=8)
    p_bench.set_defaults(func=cmd_benchmark)

    p_cmp = sub.add_parser("compare-solvers", help="plain vs accelerated solver transform counts")
    common(p_cmp)
    p_cmp.add_argument("--scheme", help="override the default scheme choice")
    p_cmp.add_argument("--tol", type=float, default=None, help="stepping tolerance (default 1e-4)")
    p_cmp.add_argument("--final-time", type=float, default=None)
    p_cmp.set_defaults(func=cmd_compare_solvers)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
