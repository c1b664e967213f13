"""Command-line front end.

Exit codes: 0 success, 1 malformed or unreadable config, 2 convergence
hypothesis violated without ``--override-hypotheses``, 3 numerical abort,
4 primal-dual equivalence check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, Resolved, config_json_schema, load_config, resolve
from .fbb import fbb_run
from .fbfb import fbfb_run
from .primal_dual import compare_pd, pd_run, pd_verdicts
from .problem import AdmissionError, HypothesisViolation, NumericalAbort, check_hypotheses
from .problems import characterization_spot_check, list_benchmarks

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESIS = 2
EXIT_NUMERICAL = 3
EXIT_MISMATCH = 4

COMPARE_TOL = 1e-10
# coupling scale used by --inject-fault
FAULT_SCALE = 1.0 + 1e-3


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _load(args) -> Resolved:
    cfg = load_config(
        args.config,
        benchmark=getattr(args, "benchmark", None),
        algorithm=getattr(args, "algorithm", None),
        budget=getattr(args, "budget", None),
        out_dir=getattr(args, "out_dir", None),
        seed=getattr(args, "seed", None),
        override_hypotheses=True if getattr(args, "override_hypotheses", False) else None,
    )
    return resolve(cfg)


def _solve(r: Resolved):
    cfg = r.cfg
    kw = dict(override_hypotheses=cfg.override_hypotheses, stop_tol=cfg.stop_tol, trace_mode=cfg.trace)
    if r.algorithm == "pd":
        return pd_run(r.problem, r.schedule, cfg.budget, p_witness=cfg.p_witness, **kw)
    if r.algorithm == "fbb":
        return fbb_run(r.problem, r.schedule, cfg.budget, **kw)
    return fbfb_run(r.problem, r.schedule, cfg.budget, **kw)


def cmd_run(args) -> int:
    r = _load(args)
    try:
        report, trace = _solve(r)
    except AdmissionError as exc:
        raise ConfigError(str(exc)) from exc
    except HypothesisViolation as exc:
        _err(f"{exc}")
        print("rerun with --override-hypotheses to iterate anyway", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NumericalAbort as exc:
        _err(f"numerical abort: {exc}")
        return EXIT_NUMERICAL

    out = Path(r.cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace.write(out / "trace.csv")
    doc = report.to_dict()
    doc["config"] = r.cfg.model_dump(mode="json", by_alias=True)
    doc["schedule"] = r.schedule.to_dict()
    if r.benchmark is not None:
        doc["benchmark"] = r.benchmark.summary()
        doc["oracle_solution"] = r.benchmark.oracle_solution.tolist()
    (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n")

    print(f"{r.algorithm}: {report.iterations} iterations, final dist {doc['final_dist']}, "
          f"ergodic dist {doc['final_ergodic_dist']}")
    print(f"wrote {out / 'trace.csv'} and {out / 'report.json'}")
    return EXIT_OK


def cmd_check(args) -> int:
    r = _load(args)
    if r.structured:
        verdicts = pd_verdicts(r.problem, r.schedule, r.cfg.p_witness)
    else:
        p = None if r.cfg.p_witness is None else np.asarray(r.cfg.p_witness, dtype=float)
        verdicts = check_hypotheses(r.problem, r.schedule, p)
    labels = {
        "i": "(i)   A + N_C maximally monotone, zeros exist",
        "ii": "(ii)  gap summability",
        "iii": "(iii) lambda in l2 \\ l1",
    }
    for key, v in verdicts.items():
        print(f"{labels.get(key, key):<45} {v.status:<10} {v.reason}")
        for name, val in v.diagnostics.items():
            print(f"{'':<47}{name} = {val:.6g}")
    bench = r.benchmark
    if bench is not None and not bench.structured:
        worst = characterization_spot_check(bench, rng=r.cfg.seed)
        print(f"oracle spot check: min <w, u - z> over 100 graph samples = {worst:.3e}")
    return EXIT_OK


def cmd_compare_pd(args) -> int:
    r = _load(args)
    if not r.structured:
        raise ConfigError("compare-pd needs a structured problem (benchmark or inline problem with 'blocks')")
    steps = args.steps or r.cfg.compare_steps
    cmp = compare_pd(r.problem, r.schedule, steps, FAULT_SCALE if args.inject_fault else 1.0)
    ok = cmp.max_deviation <= COMPARE_TOL
    print(f"max deviation over {cmp.steps} steps: {cmp.max_deviation:.3e} (step {cmp.worst_step}); "
          f"tolerance {COMPARE_TOL:g}: {'ok' if ok else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_list(args) -> int:
    rows = list_benchmarks()
    if args.json:
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    for row in rows:
        print(f"{row['name']:<34} {row['algorithm']:<5} d={row['dim']}  {row['description']}")
    return EXIT_OK


def cmd_schema(args) -> int:
    print(json.dumps(config_json_schema(), indent=2))
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--benchmark", help="registered benchmark name (instead of or overriding the config)")
    p.add_argument("--algorithm", choices=["fbb", "fbfb", "pd"])
    p.add_argument("--budget", type=int, help="number of iterations")
    p.add_argument("--out-dir", help="directory for trace.csv and report.json")
    p.add_argument("--seed", type=int)
    p.add_argument("--override-hypotheses", action="store_true",
                   help="iterate even when a convergence hypothesis is known to fail")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="penaltysplit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a solver and write trace.csv and report.json")
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="print the convergence-hypothesis verdicts")
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare-pd", help="blockwise primal-dual vs two-forward-step on the product space")
    _common(p)
    p.add_argument("--steps", type=int, help="number of steps (default: config compare_steps)")
    p.add_argument("--inject-fault", action="store_true", help="perturb the product assembly (negative control)")
    p.set_defaults(func=cmd_compare_pd)

    p = sub.add_parser("list-benchmarks", help="list registered benchmarks")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("schema", help="print the run-config JSON schema")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
