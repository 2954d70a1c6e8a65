"""``fluidlaws`` command line entry point.

Exit codes: 0 when every asserted check passes (or a scenario marked
``expect = "fail"`` fails as intended), 1 on tolerance failures or an
unexpected pass, 2 on schema errors, 3 when a density/EOS/chart pairing is
refused by the classification, 4 on any other runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path
from typing import List, Optional

from ..errors import ClassificationError, FluidLawsError
from . import report
from .schema import TASKS, ScenarioError, load_scenario
from .workflows import WORKFLOWS, Workbench

EXIT_OK = 0
EXIT_CHECKS = 1
EXIT_SCHEMA = 2
EXIT_REFUSED = 3
EXIT_RUNTIME = 4

OUT_ENV = "FLUIDLAWS_OUT"


def bundled_scenarios() -> List[str]:
    root = resources.files("fluidlaws.cli") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def resolve_scenario(ref: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    bundled = resources.files("fluidlaws.cli") / "scenarios" / f"{ref}.toml"
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"no scenario file '{ref}' and no bundled scenario of that name ({', '.join(bundled_scenarios())})")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fluidlaws", description="Verification suites for fluid conservation laws.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="TOML scenario file or bundled scenario name")
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--out", default=None, help=f"output root (default ${OUT_ENV} or ./fluidlaws-out)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for independent grid levels")
    common.add_argument("--allow-incompatible", action="store_true", help="run classification-forbidden pairings")
    sub.add_parser("run", parents=[common], help="run every task listed in the scenario")
    for task in TASKS:
        sub.add_parser(task, parents=[common], help=f"run the {task} task")
    sub.add_parser("list-scenarios", help="print the bundled scenario names")
    return p


def _out_dir(arg: Optional[str], name: str) -> Path:
    root = Path(arg or os.environ.get(OUT_ENV) or "fluidlaws-out")
    out = root / name
    out.mkdir(parents=True, exist_ok=True)
    return out


def execute(args) -> int:
    path = resolve_scenario(args.scenario)
    scn = load_scenario(path)
    if args.seed is not None:
        if args.seed < 0:
            raise ScenarioError("--seed", [("seed", "must be non-negative")])
        scn = scn.model_copy(update={"seed": args.seed})
    tasks = scn.tasks if args.command == "run" else [args.command]
    if not tasks:
        raise ScenarioError(str(path), [("tasks", "scenario lists no tasks for 'run'")])
    wb = Workbench(scn, threads=args.threads, allow_incompatible=args.allow_incompatible)
    out = _out_dir(args.out, scn.name)
    files, statuses = [], {}
    for task in tasks:
        res = WORKFLOWS[task](wb)
        for key, series in sorted(res.series.items()):
            files.append(report.write_series_csv(out / f"{task}__{key}.csv", series))
        summary = report.task_summary(scn.name, res, scn.expect, scn.seed)
        files.append(report.write_json(out / f"{task}.json", summary))
        statuses[task] = summary["status"]
        print(f"{scn.name} {task}: {summary['status']}")
        for line in report.format_checks(res):
            print(line)
    tolerances = scn.checks.model_dump()
    mf = report.manifest(path, scn.model_dump(mode="json"), scn.seed, wb.threads, tolerances, files, out, statuses)
    report.write_json(out / "manifest.json", mf)
    return EXIT_OK if all(report.status_ok(s) for s in statuses.values()) else EXIT_CHECKS


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-scenarios":
        print("\n".join(bundled_scenarios()))
        return EXIT_OK
    try:
        return execute(args)
    except ScenarioError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SCHEMA
    except ClassificationError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        print("pass --allow-incompatible (or set allow_incompatible = true) for a deliberate falsification run", file=sys.stderr)
        return EXIT_REFUSED
    except (FluidLawsError, ValueError, FileNotFoundError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
