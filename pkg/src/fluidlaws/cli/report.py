"""Deterministic artifacts: JSON summaries, CSV series and the run manifest.

Nothing time- or host-dependent is written, so repeated runs with the same
seed produce byte-identical files.  Non-finite numbers become ``null``.
"""

from __future__ import annotations

import hashlib
import json
import math
import platform
from importlib import metadata
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np

SUMMARY_SCHEMA = "fluidlaws.summary/1"
MANIFEST_SCHEMA = "fluidlaws.manifest/1"

STATUS_PASS = "PASS"
STATUS_FAIL = "FAIL"
STATUS_EXPECTED_FAIL = "EXPECTED-FAIL"
STATUS_UNEXPECTED_PASS = "UNEXPECTED-PASS"


def status(passed: bool, expect: str) -> str:
    if expect == "fail":
        return STATUS_UNEXPECTED_PASS if passed else STATUS_EXPECTED_FAIL
    return STATUS_PASS if passed else STATUS_FAIL


def status_ok(s: str) -> bool:
    return s in (STATUS_PASS, STATUS_EXPECTED_FAIL)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> Path:
    path.write_text(dumps(obj))
    return path


def _fmt(v: float) -> str:
    v = float(v)
    return repr(v) if math.isfinite(v) else ""


def write_series_csv(path: Path, series) -> Path:
    lines = ["t,integral,flux,residual"]
    for row in series.rows():
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def package_versions() -> Dict[str, str]:
    out = {"python": platform.python_version()}
    for dist in ("artifact", "numpy", "scipy", "sympy", "pydantic"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def task_summary(scenario: str, task, expect: str, seed: int) -> dict:
    return {
        "schema": SUMMARY_SCHEMA,
        "scenario": scenario,
        "task": task.task,
        "seed": seed,
        "expect": expect,
        "status": status(task.passed, expect),
        "checks": [c.as_dict() for c in task.checks],
        "info": task.info,
    }


def manifest(scenario_path: Path, scenario: dict, seed: int, threads: int, tolerances: dict, files: Iterable[Path], out: Path, statuses: Dict[str, str]) -> dict:
    return {
        "schema": MANIFEST_SCHEMA,
        "scenario": scenario,
        "scenario_sha256": sha256(scenario_path) if scenario_path is not None else None,
        "seed": seed,
        "threads": threads,
        "tolerances": tolerances,
        "versions": package_versions(),
        "statuses": statuses,
        "files": {str(Path(f).relative_to(out)): sha256(f) for f in sorted(files)},
    }


def format_checks(task) -> List[str]:
    lines = []
    for c in task.checks:
        mark = "ok  " if c.passed else "FAIL"
        val = "nan" if c.value is None or not math.isfinite(c.value) else f"{c.value:.3e}"
        lines.append(f"  [{mark}] {c.name}: {val} {c.relation} {c.tol:.3e}")
    return lines
