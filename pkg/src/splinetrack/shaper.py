"""Shape dictionary and the recursive Bayesian shape classifier."""

from __future__ import annotations

import json
import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .geometry import (
    BARYCENTRIC,
    EdgePartition,
    Pose,
    ShapeVector,
    Triangulation,
    contour_length,
    dewhiten,
    edge_partition,
    rotation,
    signed_area,
    triangulate,
    validate,
    whiten_points,
)
from .likelihood import ParticleSet, build_particles, dataset_loglik
from .scattering import CardinalityParams, Dataset, cardinality_params

log = logging.getLogger(__name__)


class DictionaryError(ValueError):
    """Malformed dictionary file or invalid entry."""


class DegenerateUpdate(RuntimeError):
    """Every class assigned zero likelihood; ``distribution`` is the unchanged prior."""

    def __init__(self, distribution: ClassDistribution):
        super().__init__("all class log-likelihoods are -inf")
        self.distribution = distribution


@dataclass(frozen=True)
class DictionaryEntry:
    name: str
    shape: ShapeVector
    length: float
    area: float
    partition: EdgePartition
    triangulation: Triangulation
    reflectivity: float = 1.0
    cardinality: dict[str, CardinalityParams] = field(default_factory=dict)
    particles: ParticleSet | None = None

    @property
    def n(self) -> int:
        return self.shape.n

    @classmethod
    def build(
        cls,
        name: str,
        vertices,
        reflectivity: float = 1.0,
        sensors=(),
        n_particles: int | None = None,
        particle_seed: int = 0,
    ) -> DictionaryEntry:
        """Validate a barycentric shape and precompute everything the likelihoods use.

        Clockwise vertex lists are reversed rather than rejected.
        """
        try:
            shape = ShapeVector(vertices, BARYCENTRIC).oriented()
        except ValueError as exc:
            raise DictionaryError(f"entry {name!r}: {exc}") from exc
        report = validate(shape)
        if not report.ok:
            raise DictionaryError(f"entry {name!r} is not a valid shape vector: {report.describe()}")
        if not 0.0 <= reflectivity <= 1.0:
            raise DictionaryError(f"entry {name!r}: reflectivity must lie in [0, 1]")
        tri = triangulate(shape)
        card = {s.kind: cardinality_params(shape, s, reflectivity) for s in sensors}
        particles = None
        if n_particles:
            particles = build_particles(shape, tri, n_particles, particle_seed, source=name)
        return cls(
            name=name,
            shape=shape,
            length=contour_length(shape),
            area=signed_area(shape.vertices),
            partition=edge_partition(shape),
            triangulation=tri,
            reflectivity=reflectivity,
            cardinality=card,
            particles=particles,
        )


@dataclass(frozen=True)
class Dictionary:
    entries: tuple[DictionaryEntry, ...]

    def __post_init__(self):
        names = [e.name for e in self.entries]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise DictionaryError(f"duplicate class ids: {sorted(dup)}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> DictionaryEntry:
        return self.entries[i]

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no class named {name!r}") from None

    @property
    def complexity(self) -> int:
        return sum(e.n for e in self.entries)

    @property
    def average_complexity(self) -> float:
        return self.complexity / len(self.entries)

    @classmethod
    def from_records(
        cls,
        records,
        sensors=(),
        n_particles: int | None = None,
        particle_seed: int = 0,
        require_multiple: bool = True,
    ) -> Dictionary:
        """Build from ``{name, vertices, reflectivity}`` records.

        Particle seeds are derived from ``particle_seed`` and the class
        position so that classes never share particle sets.
        """
        entries = []
        seen = set()
        for i, rec in enumerate(records):
            try:
                name = str(rec["name"])
                vertices = rec["vertices"]
            except (KeyError, TypeError) as exc:
                raise DictionaryError(f"record {i} lacks 'name' or 'vertices'") from exc
            if name in seen:
                raise DictionaryError(f"duplicate class id {name!r}")
            seen.add(name)
            seed = int(np.random.SeedSequence([particle_seed, i]).generate_state(1)[0])
            entries.append(
                DictionaryEntry.build(name, vertices, float(rec.get("reflectivity", 1.0)), sensors, n_particles, seed)
            )
        if require_multiple and len(entries) < 2:
            raise DictionaryError("a dictionary needs at least two classes")
        return cls(tuple(entries))


def load_dictionary(path, sensors=(), n_particles: int | None = None, particle_seed: int = 0, **kw) -> Dictionary:
    path = Path(path)
    try:
        records = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DictionaryError(f"cannot read dictionary {path}: {exc}") from exc
    if isinstance(records, dict):
        records = records.get("shapes", records.get("entries"))
    if not isinstance(records, list):
        raise DictionaryError(f"{path}: expected a list of shape records")
    return Dictionary.from_records(records, sensors, n_particles, particle_seed, **kw)


@dataclass(frozen=True)
class ClassDistribution:
    """Normalised class probabilities held as logs."""

    logp: np.ndarray

    def __post_init__(self):
        lp = np.array(self.logp, dtype=float)
        lp.flags.writeable = False
        object.__setattr__(self, "logp", lp)

    @classmethod
    def uniform(cls, n: int) -> ClassDistribution:
        return cls(np.full(n, -np.log(n)))

    @classmethod
    def from_probs(cls, p) -> ClassDistribution:
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            return cls(np.log(p / p.sum()))

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.logp)

    def __len__(self) -> int:
        return self.logp.shape[0]

    def modal(self) -> int:
        # np.argmax returns the first maximiser: ties go to the lowest index
        return int(np.argmax(self.logp))


def _normalise(logp: np.ndarray) -> np.ndarray:
    return logp - logsumexp(logp)


def predict_class(p: ClassDistribution, delta: float) -> ClassDistribution:
    """Chapman-Kolmogorov step with a stay-probability ``delta`` kernel.

    ``p-(i) = (I delta - 1)/(I - 1) p(i) + (1 - delta)/(I - 1)``.
    """
    n = len(p)
    if not (1.0 / n < delta <= 1.0):
        raise ValueError(f"delta must lie in (1/{n}, 1], got {delta}")
    keep = (n * delta - 1) / (n - 1)
    floor = (1 - delta) / (n - 1)
    if floor == 0.0:
        return ClassDistribution(_normalise(p.logp))
    lp = np.logaddexp(np.log(keep) + p.logp, np.log(floor))
    return ClassDistribution(_normalise(lp))


def update_class(p: ClassDistribution, logliks) -> ClassDistribution:
    """Bayes rule in log space."""
    ll = np.asarray(logliks, dtype=float)
    if ll.shape != p.logp.shape:
        raise ValueError("one log-likelihood per class is required")
    if np.any(np.isnan(ll)) or np.any(ll == np.inf):
        raise ValueError("log-likelihoods must be finite or -inf")
    joint = ll + p.logp
    if not np.any(np.isfinite(joint)):
        raise DegenerateUpdate(p)
    return ClassDistribution(_normalise(joint))


@dataclass(frozen=True)
class ShaperResult:
    distribution: ClassDistribution
    shape: ShapeVector
    modal: int
    logliks: np.ndarray
    degenerate: bool = False


def class_logliks(
    Y_local: np.ndarray,
    dictionary: Dictionary,
    kind: str,
    R_plus: np.ndarray,
    executor: Executor | None = None,
) -> np.ndarray:
    """Dataset log-likelihood of every class; concurrent when ``executor`` is given."""

    def one(entry):
        return dataset_loglik(Y_local, entry, kind, R_plus)

    if executor is None:
        vals = [one(e) for e in dictionary]
    else:
        vals = list(executor.map(one, dictionary.entries))
    return np.array(vals, dtype=float)


def shaper_step(
    Y: Dataset | np.ndarray,
    pose: Pose,
    p: ClassDistribution,
    dictionary: Dictionary,
    kind: str,
    R,
    delta_R=None,
    delta: float = 0.9,
    executor: Executor | None = None,
) -> ShaperResult:
    """Whiten the scan, update the class distribution and dewhiten the modal shape.

    ``R`` is the world-frame measurement covariance; it is inflated by
    ``delta_R`` and rotated into the estimated body frame.
    """
    pts = Y.points if isinstance(Y, Dataset) else np.asarray(Y, dtype=float).reshape(-1, 2)
    R = np.asarray(R, dtype=float)
    R_plus = R + (np.eye(2) if delta_R is None else np.asarray(delta_R, dtype=float))
    U = rotation(pose.h)
    R_local = U.T @ R_plus @ U
    R_local = 0.5 * (R_local + R_local.T)

    Y_local = whiten_points(pts, pose)
    ll = class_logliks(Y_local, dictionary, kind, R_local, executor)
    prior = predict_class(p, delta)
    degenerate = False
    try:
        post = update_class(prior, ll)
    except DegenerateUpdate:
        log.warning("degenerate shaper update at m=%d; keeping the prior", pts.shape[0])
        post, degenerate = p, True
    best = post.modal()
    return ShaperResult(post, dewhiten(dictionary[best].shape, pose), best, ll, degenerate)


class Shaper:
    """Owns the class distribution across scans."""

    def __init__(self, dictionary: Dictionary, delta: float = 0.9, delta_R=None, executor: Executor | None = None):
        self.dictionary = dictionary
        self.delta = delta
        self.delta_R = np.eye(2) if delta_R is None else np.asarray(delta_R, dtype=float)
        self.executor = executor
        self.distribution = ClassDistribution.uniform(len(dictionary))

    def step(self, Y, pose: Pose, kind: str, R) -> ShaperResult:
        res = shaper_step(Y, pose, self.distribution, self.dictionary, kind, R, self.delta_R, self.delta, self.executor)
        self.distribution = res.distribution
        return res
