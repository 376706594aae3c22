"""Experiment reports: criteria verdicts, fitted slopes and output files."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import loglog_fit

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

MIN_FIT_POINTS = 4
MIN_FIT_R2 = 0.9


def jsonable(obj):
    """Plain-Python copy of obj with numpy scalars and arrays converted."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def fit(xs, ys, lo: float | None = None, hi: float | None = None) -> dict:
    """Log-log slope with its verdict against the band [lo, hi].

    Fits with fewer than MIN_FIT_POINTS usable points or R^2 below MIN_FIT_R2
    are inconclusive rather than pass/fail.
    """
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    ok = (xs > 0) & (ys > 0) & np.isfinite(xs) & np.isfinite(ys)
    if ok.sum() < 2:
        return {"slope": None, "intercept": None, "r2": None, "n": int(ok.sum()), "lo": lo, "hi": hi,
                "status": INCONCLUSIVE, "reason": "fewer than two positive samples"}
    res = loglog_fit(xs[ok], ys[ok])
    res.update(lo=lo, hi=hi)
    if res["n"] < MIN_FIT_POINTS or res["r2"] < MIN_FIT_R2:
        res["status"] = INCONCLUSIVE
        res["reason"] = f"needs >= {MIN_FIT_POINTS} points and R^2 >= {MIN_FIT_R2}"
        return res
    good = (lo is None or res["slope"] >= lo) and (hi is None or res["slope"] <= hi)
    res["status"] = PASS if good else FAIL
    return res


@dataclass
class ExperimentReport:
    config: dict
    measured: dict = field(default_factory=dict)
    criteria: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    runtime: float = 0.0
    tables: dict = field(default_factory=dict)

    def criterion(self, name: str, status, detail=None) -> str:
        if isinstance(status, (bool, np.bool_)):
            status = PASS if status else FAIL
        self.criteria[name] = {"status": status, "detail": jsonable(detail)}
        return status

    def criterion_from_fit(self, name: str, res: dict) -> str:
        return self.criterion(name, res["status"], res)

    def table(self, name: str, header, rows) -> None:
        """Store a CSV artifact (written as <name>.csv)."""
        lines = [",".join(header)]
        for r in rows:
            lines.append(",".join(_cell(v) for v in r))
        self.tables[name] = "\n".join(lines) + "\n"

    @property
    def ok(self) -> bool:
        return all(c["status"] != FAIL for c in self.criteria.values())

    def to_dict(self, with_runtime: bool = False) -> dict:
        d = {"config": self.config, "measured": jsonable(self.measured), "criteria": self.criteria,
             "violations": jsonable(self.violations), "passes": self.ok,
             "artifacts": sorted(f"{k}.csv" for k in self.tables)}
        if with_runtime:
            d["runtime"] = self.runtime
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary_lines(self) -> list[str]:
        return [f"{c['status'].upper():12s} {name}" for name, c in sorted(self.criteria.items())]

    def write(self, out_dir) -> Path:
        """config.json, report.json and CSV tables; wall time goes to runtime.json.

        Keeping the wall time out of report.json makes reports of identical
        configs byte-identical.
        """
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(self.config, indent=2, sort_keys=True) + "\n")
        (out / "report.json").write_text(self.to_json())
        (out / "runtime.json").write_text(json.dumps({"runtime_seconds": self.runtime}) + "\n")
        for name, text in self.tables.items():
            (out / f"{name}.csv").write_text(text)
        return out


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)
