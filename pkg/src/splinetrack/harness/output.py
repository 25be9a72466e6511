"""CSV and JSON writers for experiment results.

Floats are written with ``repr`` so identical runs give byte-identical files.
Wall-clock timings go to a separate ``timing.json``.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .experiments import RunRecord

TRACK_COLUMNS = [
    "k", "t", "npe", "iou", "chd", "modal_class", "p_true_class",
    "gx", "gy", "h", "gx_est", "gy_est", "h_est",
]


def _f(x) -> str:
    return repr(float(x))


def tracking_csv(record: RunRecord, class_names: list[str], true_index: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACK_COLUMNS)
    for s in record.scans:
        w.writerow([
            s.k, _f(s.t), _f(s.score.npe), _f(s.score.iou), _f(s.score.chd),
            class_names[s.modal], _f(s.distribution[true_index]),
            _f(s.truth[0]), _f(s.truth[1]), _f(s.truth[2]),
            _f(s.estimate[0]), _f(s.estimate[1]), _f(s.estimate[2]),
        ])
    return buf.getvalue()


def tracking_summary(records: list[RunRecord], seed: int) -> dict:
    per_run = []
    for r in records:
        per_run.append({
            "run": r.run,
            "scans": len(r.scans),
            "aborted": r.aborted,
            "mean_npe": r.mean("npe") if r.scans else None,
            "mean_iou": r.mean("iou") if r.scans else None,
            "mean_chd": r.mean("chd") if r.scans else None,
        })
    done = [p for p in per_run if p["scans"]]
    return {
        "seed": seed,
        "runs": len(records),
        "mean_npe": float(np.mean([p["mean_npe"] for p in done])) if done else None,
        "mean_iou": float(np.mean([p["mean_iou"] for p in done])) if done else None,
        "mean_chd": float(np.mean([p["mean_chd"] for p in done])) if done else None,
        "per_run": per_run,
    }


def classification_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "k", "kind", "mle_class", "correct", "p_true_class"])
    names = report["classes"]
    true = report["true_class"]
    for r in report["per_run"]:
        for kind, mles in r["mle"].items():
            for k, i in enumerate(mles):
                w.writerow([r["run"], k, kind, names[i], int(names[i] == true), _f(r["p_true"][k])])
    return buf.getvalue()


def bench_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["m", "n", "N", "kind", "nanoseconds"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
