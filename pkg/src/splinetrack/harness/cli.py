"""Command line entry point: ``splinetrack {classify,track,bench}``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from ..shaper import DictionaryError
from . import output
from .config import ConfigError, ScenarioConfig, defaults_help
from .experiments import build_dictionary, loglog_slope, run_bench, run_classification, run_tracking

log = logging.getLogger("splinetrack")


def _load(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig.from_dict({})
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "runs", None) is not None:
        over["runs"] = args.runs
    return cfg.with_overrides(**over) if over else cfg


def cmd_classify(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    t0 = time.perf_counter()
    report = run_classification(cfg)
    elapsed = time.perf_counter() - t0
    output.write_text(out / "classification.csv", output.classification_csv(report))
    summary = {k: v for k, v in report.items() if k != "per_run"}
    summary["seed"] = cfg.seed
    output.write_json(out / "summary.json", summary)
    output.write_json(out / "timing.json", {"seconds": elapsed})
    for kind, acc in report["accuracy"].items():
        print(f"{kind:8s} accuracy {acc:.3f} (chance {report['chance']:.3f})")
    return 0


def cmd_track(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    t0 = time.perf_counter()
    records = run_tracking(cfg)
    elapsed = time.perf_counter() - t0
    names = build_dictionary(cfg, with_particles=False).names
    true = names.index(cfg["true_class"])
    for r in records:
        output.write_text(out / f"run_{r.run:03d}.csv", output.tracking_csv(r, names, true))
    summary = output.tracking_summary(records, cfg.seed)
    output.write_json(out / "summary.json", summary)
    n_scans = sum(len(r.scans) for r in records)
    output.write_json(out / "timing.json", {"seconds": elapsed, "seconds_per_scan": elapsed / max(n_scans, 1)})
    print(f"mean NPE {summary['mean_npe']:.3f}  IOU {summary['mean_iou']:.3f}  CHD {summary['mean_chd']:.3f} m")
    aborted = [r for r in records if r.aborted]
    return 1 if aborted else 0


def cmd_bench(args) -> int:
    cfg = _load(args)
    rows = run_bench(cfg)
    text = output.bench_csv(rows)
    if args.out:
        output.write_text(Path(args.out) / "bench.csv", text)
    sys.stdout.write(text)
    for kind, key in (("exact_contour", "m"), ("mc_surface", "m"), ("mc_surface_N", "N")):
        sel = [r for r in rows if r["kind"] == kind]
        if len(sel) > 1:
            slope = loglog_slope([r[key] for r in sel], [r["nanoseconds"] for r in sel])
            log.info("%s: log-log slope vs %s = %.2f", kind, key, slope)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="splinetrack",
        description="Polygonal extended-object tracking and shape classification experiments.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="config defaults (any key may be overridden in the --config JSON):\n" + defaults_help(),
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out):
        sp.add_argument("--config", type=Path, help="scenario JSON; omitted keys take the defaults shown by splinetrack --help")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--runs", type=int, help="override the number of Monte Carlo runs")
        sp.add_argument("--out", default=out, help="output directory (default: %(default)s)")

    c = sub.add_parser("classify", help="static-object classification accuracy")
    common(c, "out/classify")
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("track", help="track-to-shape runs on a maneuvering target")
    common(t, "out/track")
    t.set_defaults(func=cmd_track)

    b = sub.add_parser("bench", help="likelihood timing over m and N grids")
    b.add_argument("--config", type=Path, help="scenario JSON with a bench block")
    b.add_argument("--out", help="directory for bench.csv; the CSV is always printed")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DictionaryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
