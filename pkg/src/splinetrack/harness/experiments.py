"""Classification, tracking and benchmark experiments."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Pose, ShapeVector, dewhiten, dewhiten_points, edge_partition, triangulate
from ..likelihood import build_particles, contour_loglik, mc_loglik
from ..metrics import ScanScore, chamfer, inner_radius, iou, npe
from ..motion import GX, GY, H, propagate_schedule
from ..scattering import Dataset, noise, sample_cardinality, sample_contour_points, sample_scattering
from ..shaper import Dictionary, Shaper, class_logliks, load_dictionary
from ..tracker import FilterDivergence, Tracker, TrackerState
from .config import ConfigError, ScenarioConfig

log = logging.getLogger(__name__)


def scan_rng(seed: int, run: int, k: int, sensor: int) -> np.random.Generator:
    """Independent stream per (seed, run, scan, sensor) so runs can execute in any order."""
    return np.random.default_rng([seed, run, k, sensor])


def build_dictionary(cfg: ScenarioConfig, with_particles: bool = True) -> Dictionary:
    sh = cfg["shaper"]
    kinds = {s.kind for s in cfg.sensors()}
    n_particles = int(sh["particles"]) if with_particles and "surface" in kinds else None
    d = load_dictionary(cfg.dictionary_path(), cfg.sensors(), n_particles, int(sh["particle_seed"]))
    if cfg["true_class"] not in d.names:
        raise ConfigError(f"true_class {cfg['true_class']!r} is not in the dictionary {d.names}")
    return d


def simulate_scan(entry, pose: Pose, sensor, rng: np.random.Generator, k: int = 0) -> Dataset:
    """One scan of a dictionary object placed at ``pose``.

    Scatterers are drawn in the body frame from the entry's cached partition
    or triangulation and then moved to the world; the rigid map preserves
    uniformity.
    """
    params = entry.cardinality[sensor.kind]
    m = sample_cardinality(params, rng)
    if m == 0:
        return Dataset(np.empty((0, 2)), k)
    z = sample_scattering(sensor.kind, entry.partition, entry.triangulation, m, rng)
    return Dataset(dewhiten_points(z, pose) + noise(sensor.R, m, rng), k)


def _executor(threads: int):
    return ThreadPoolExecutor(max_workers=threads) if threads > 1 else nullcontext(None)


@dataclass
class ClassificationRun:
    run: int
    mle: dict[str, list[int]]
    p_true: list[float]
    converged_at: int | None


def _classification_run(cfg: ScenarioConfig, dictionary: Dictionary, run: int) -> ClassificationRun:
    sensors = cfg.sensors()
    true = dictionary.index(cfg["true_class"])
    entry = dictionary[true]
    pose = Pose(cfg["pose"]["g"], cfg["pose"]["h"])
    dR = cfg.classification_delta_R()
    threshold = float(cfg["classification"]["convergence_threshold"])
    sh = cfg["shaper"]
    mle: dict[str, list[int]] = {s.kind: [] for s in sensors}
    p_true: list[float] = []
    converged = None
    with _executor(int(sh["threads"])) as ex:
        shaper = Shaper(dictionary, float(sh["delta"]), dR, ex)
        for k in range(cfg.scans):
            for j, sensor in enumerate(sensors):
                Y = simulate_scan(entry, pose, sensor, scan_rng(cfg.seed, run, k, j), k)
                res = shaper.step(Y, pose, sensor.kind, sensor.R)
                # the single-scan MLE uses the same likelihoods the recursive update just consumed
                mle[sensor.kind].append(int(np.argmax(res.logliks)))
            p_true.append(float(shaper.distribution.probs[true]))
            if converged is None and p_true[-1] > threshold:
                converged = k + 1
    return ClassificationRun(run, mle, p_true, converged)


def run_classification(cfg: ScenarioConfig, runs: int | None = None) -> dict:
    """Static object at a known pose: per-scan MLE accuracy and recursive convergence.

    Accuracy per sensor kind is the fraction of scans whose maximum-likelihood
    class is the true class.  Alongside, a recursive shaper is fed the same
    scans; ``converged_at`` is the first scan count where its posterior mass
    on the true class exceeds the configured threshold.
    """
    runs = cfg.runs if runs is None else runs
    dictionary = build_dictionary(cfg)
    true = dictionary.index(cfg["true_class"])
    results = _map_runs(_classification_run, cfg, dictionary, runs)
    kinds = [s.kind for s in cfg.sensors()]
    acc = {}
    for kind in kinds:
        hits = [np.mean(np.array(r.mle[kind]) == true) for r in results]
        acc[kind] = float(np.mean(hits))
    conv = [r.converged_at for r in results]
    return {
        "classes": dictionary.names,
        "true_class": cfg["true_class"],
        "scans": cfg.scans,
        "runs": runs,
        "accuracy": acc,
        "chance": 1.0 / len(dictionary),
        "converged_at": conv,
        "per_run": [
            {"run": r.run, "mle": r.mle, "p_true": r.p_true, "converged_at": r.converged_at} for r in results
        ],
    }


def _map_runs(fn, cfg, dictionary, runs):
    workers = int(cfg["workers"])
    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(fn, cfg, dictionary, r) for r in range(runs)]
            return [f.result() for f in futs]
    return [fn(cfg, dictionary, r) for r in range(runs)]


@dataclass
class ScanRecord:
    k: int
    t: float
    truth: np.ndarray
    estimate: np.ndarray
    distribution: np.ndarray
    modal: int
    score: ScanScore


@dataclass
class RunRecord:
    run: int
    scans: list[ScanRecord] = field(default_factory=list)
    aborted: str | None = None

    def mean(self, attr: str) -> float:
        return float(np.mean([getattr(s.score, attr) for s in self.scans]))


def _tracking_run(cfg: ScenarioConfig, dictionary: Dictionary, run: int) -> RunRecord:
    sensors = cfg.sensors()
    T = cfg.period
    true = dictionary.index(cfg["true_class"])
    entry = dictionary[true]
    truth = propagate_schedule(cfg.initial_state(), cfg.segments(), T, cfg.scans)

    mcfg = cfg["metrics"]
    rho_min = mcfg["rho_min"] or inner_radius(entry.shape)
    cells = int(mcfg["iou_cells"])
    K = int(mcfg["chamfer_samples"])
    tr = cfg["tracker"]
    sh = cfg["shaper"]

    tracker = Tracker(TrackerState(truth[0], cfg.P0(), cfg.Q(), cfg.E()), float(tr["heading_eps"]))
    record = RunRecord(run)
    with _executor(int(sh["threads"])) as ex:
        shaper = Shaper(dictionary, float(sh["delta"]), cfg.delta_R(), ex)
        for k in range(cfg.scans):
            x_true = truth[k]
            true_pose = Pose(x_true[GX : GY + 1], x_true[H])
            scans = [
                simulate_scan(entry, true_pose, s, scan_rng(cfg.seed, run, k, j), k) for j, s in enumerate(sensors)
            ]
            if k > 0:
                try:
                    tracker.step(scans, T)
                except FilterDivergence as exc:
                    record.aborted = f"scan {k}: {exc}"
                    log.error("run %d aborted: %s", run, record.aborted)
                    break
            est = tracker.state
            pose = Pose(est.position, est.heading)
            for Y, sensor in zip(scans, sensors):
                res = shaper.step(Y, pose, sensor.kind, sensor.R)
            true_world = dewhiten(entry.shape, true_pose)
            est_world = res.shape
            cell = min(true_world.diameter(), est_world.diameter()) / cells
            score = ScanScore(
                k=k,
                npe=npe(true_pose.g, pose.g, rho_min),
                iou=iou(true_world, est_world, cell),
                chd=chamfer(true_world, est_world, K),
            )
            record.scans.append(
                ScanRecord(k, k * T, x_true.copy(), est.x.copy(), shaper.distribution.probs, res.modal, score)
            )
    return record


def run_tracking(cfg: ScenarioConfig, runs: int | None = None) -> list[RunRecord]:
    """Track-to-shape: tracker pose feeds the shaper; one record per scan per run."""
    runs = cfg.runs if runs is None else runs
    dictionary = build_dictionary(cfg)
    return _map_runs(_tracking_run, cfg, dictionary, runs)


def regular_polygon(n: int, radius: float) -> ShapeVector:
    a = 2 * np.pi * np.arange(n) / n
    return ShapeVector(radius * np.column_stack([np.cos(a), np.sin(a)]))


def _best_ns(fn, repeats: int) -> int:
    fn()
    best = None
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        dt = time.perf_counter_ns() - t0
        best = dt if best is None else min(best, dt)
    return int(best)


def run_bench(cfg: ScenarioConfig) -> list[dict]:
    """Wall time of one dataset-likelihood evaluation over grids of m and N.

    Rows carry ``(m, n, N, kind, nanoseconds)``; ``N = 0`` for the exact
    contour likelihood.  Each time is the best of ``repeats`` runs.
    """
    b = cfg["bench"]
    n = int(b["vertices"])
    shape = regular_polygon(n, float(b["radius"]))
    part = edge_partition(shape)
    tri = triangulate(shape)
    R = float(b["sigma"]) ** 2 * np.eye(2)
    reps = int(b["repeats"])
    rng = np.random.default_rng(cfg.seed)
    m_max = max(max(b["m_grid"]), int(b["m_fixed"]))
    Y_all = sample_contour_points(part, m_max, rng) + noise(R, m_max, rng)

    rows = []
    for m in b["m_grid"]:
        Y = Y_all[:m]
        ns = _best_ns(lambda: contour_loglik(Y, part, R).sum(), reps)
        rows.append({"m": m, "n": n, "N": 0, "kind": "exact_contour", "nanoseconds": ns})
    P = build_particles(shape, tri, int(b["N_fixed"]), cfg.seed)
    for m in b["m_grid"]:
        Y = Y_all[:m]
        ns = _best_ns(lambda: mc_loglik(Y, P, R).sum(), reps)
        rows.append({"m": m, "n": n, "N": P.N, "kind": "mc_surface", "nanoseconds": ns})
    Y = Y_all[: int(b["m_fixed"])]
    for N in b["N_grid"]:
        P = build_particles(shape, tri, int(N), cfg.seed)
        ns = _best_ns(lambda: mc_loglik(Y, P, R).sum(), reps)
        rows.append({"m": Y.shape[0], "n": n, "N": int(N), "kind": "mc_surface_N", "nanoseconds": ns})
    return rows


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def class_logliks_at(dictionary: Dictionary, Y: Dataset, kind: str, R, threads: int = 1) -> np.ndarray:
    """Per-class dataset log-likelihoods, optionally evaluated on a thread pool."""
    with _executor(threads) as ex:
        return class_logliks(Y.points, dictionary, kind, np.asarray(R, float), ex)
