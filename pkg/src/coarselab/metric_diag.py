"""Coarse-embedding diagnostics for maps between finite metric spaces.

A map family carries, per index, a finite source space (a connected
graph with its path metric, or an explicit distance matrix), a target
(a point list in R^d with the Euclidean metric, or a connected graph),
and the map itself as a vertex table.  The diagnostics are the
per-distance compression moduli (the finite shadow of the proper
functions rho and gamma bounding a coarse embedding), weak-embedding
fiber statistics, bi-Lipschitz distortion, and ball concentration
counts.

Properness is a limit statement, so no operation here ever returns a
verdict "coarsely embeddable"; finite data only supports envelopes and
trends, and that is all these reports contain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DisconnectedGraphError, InvalidInputError
from .graph_core import LabeledGraph, distance_matrix
from .poincare_lab import GroupFunction, resolve_group, subset_indices
from .wreath import WreathGroup, x_subset

SourceSpace = Union[LabeledGraph, np.ndarray]
TargetSpace = Union[LabeledGraph, np.ndarray]


# -- map families -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MapEntry:
    """One index of a map family: source space, target space, and the
    map as a vertex table (``mapping[v]`` is a target point row or a
    target vertex)."""

    source: SourceSpace
    target: TargetSpace
    mapping: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(int(v) for v in self.mapping))
        n = _source_size(self.source)
        if len(self.mapping) != n:
            raise InvalidInputError(
                f"map table has {len(self.mapping)} entries for {n} source points"
            )
        m = _target_size(self.target)
        for v in self.mapping:
            if not (0 <= v < m):
                raise InvalidInputError(f"map value {v} outside the target")

    @property
    def size(self) -> int:
        return _source_size(self.source)


@dataclass(frozen=True)
class MapFamily:
    """A finite sequence of maps, one per index."""

    entries: tuple[MapEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise InvalidInputError("a map family needs at least one entry")

    def __len__(self) -> int:
        return len(self.entries)


def _source_size(source: SourceSpace) -> int:
    if isinstance(source, LabeledGraph):
        return source.vertex_count
    mat = np.asarray(source)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidInputError("a distance matrix must be square")
    return mat.shape[0]


def _target_size(target: TargetSpace) -> int:
    if isinstance(target, LabeledGraph):
        return target.vertex_count
    pts = np.asarray(target)
    if pts.ndim != 2:
        raise InvalidInputError("target points must form an (m, d) array")
    return pts.shape[0]


def _source_distances(source: SourceSpace) -> np.ndarray:
    if isinstance(source, LabeledGraph):
        dist = distance_matrix(source)
        if not np.all(np.isfinite(dist)):
            raise DisconnectedGraphError("source graph metric needs a connected graph")
        return dist
    mat = np.asarray(source, dtype=np.float64)
    if not np.all(np.isfinite(mat)):
        raise InvalidInputError("distance matrix entries must be finite")
    if np.abs(mat - mat.T).max() > 1e-9 or np.abs(np.diag(mat)).max() > 1e-9:
        raise InvalidInputError("distance matrix must be symmetric with zero diagonal")
    if mat.min() < 0:
        raise InvalidInputError("distances must be nonnegative")
    return mat


def _target_distance_table(target: TargetSpace) -> np.ndarray:
    """Distance matrix between target points (graph metric or Euclidean)."""
    if isinstance(target, LabeledGraph):
        dist = distance_matrix(target)
        if not np.all(np.isfinite(dist)):
            raise DisconnectedGraphError("target graph metric needs a connected graph")
        return dist
    pts = np.asarray(target, dtype=np.float64)
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("target points must be finite")
    diff = pts[:, np.newaxis, :] - pts[np.newaxis, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def _image_keys(entry: MapEntry) -> list:
    """Hashable identities of the image points, for fiber counting.

    Distinct target rows holding identical coordinates are one point.
    """
    if isinstance(entry.target, LabeledGraph):
        return [("v", v) for v in entry.mapping]
    pts = np.asarray(entry.target, dtype=np.float64)
    return [("p", pts[v].tobytes()) for v in entry.mapping]


# -- compression moduli --------------------------------------------------------


@dataclass(frozen=True)
class ModuliReport:
    """Per source-distance class: the observed min (rho) and max
    (gamma) target distances, pair counts, and monotone envelopes
    (largest nondecreasing minorant of rho, smallest nondecreasing
    majorant of gamma)."""

    distances: tuple[float, ...]
    rho: tuple[float, ...]
    gamma: tuple[float, ...]
    rho_envelope: tuple[float, ...]
    gamma_envelope: tuple[float, ...]
    counts: tuple[int, ...]

    def to_csv(self) -> str:
        lines = ["t,rho,gamma,count"]
        for t, r, g, c in zip(self.distances, self.rho, self.gamma, self.counts):
            lines.append(f"{t:.12g},{r:.12g},{g:.12g},{c}")
        return "\n".join(lines) + "\n"


def compression_moduli(mf: MapFamily) -> ModuliReport:
    """Observed lower and upper moduli over every vertex pair of every
    family index, bucketed by source distance."""
    classes: dict[float, list[float]] = {}
    for entry in mf.entries:
        src = _source_distances(entry.source)
        tgt = _target_distance_table(entry.target)
        n = entry.size
        for x in range(n):
            for y in range(x + 1, n):
                t = float(src[x, y])
                dy = float(tgt[entry.mapping[x], entry.mapping[y]])
                classes.setdefault(t, []).append(dy)
    if not classes:
        raise InvalidInputError("the family contains no vertex pairs")
    ts = sorted(classes)
    rho = [min(classes[t]) for t in ts]
    gamma = [max(classes[t]) for t in ts]
    counts = [len(classes[t]) for t in ts]
    rho_env = rho.copy()
    for i in range(len(ts) - 2, -1, -1):
        rho_env[i] = min(rho_env[i], rho_env[i + 1])
    gamma_env = gamma.copy()
    for i in range(1, len(ts)):
        gamma_env[i] = max(gamma_env[i], gamma_env[i - 1])
    return ModuliReport(
        distances=tuple(ts),
        rho=tuple(rho),
        gamma=tuple(gamma),
        rho_envelope=tuple(rho_env),
        gamma_envelope=tuple(gamma_env),
        counts=tuple(counts),
    )


# -- weak embeddings ------------------------------------------------------------


@dataclass(frozen=True)
class WeakEmbeddingReport:
    """Per-index Lipschitz constants and worst fiber fractions, plus the
    two verdicts that make up the finite shadow of a weak embedding:
    every index D-Lipschitz, fractions strictly decreasing."""

    lipschitz_constants: tuple[float, ...]
    fiber_fractions: tuple[float, ...]
    lipschitz_ok: bool
    fractions_decreasing: bool
    passed: bool


def is_weak_embedding(mf: MapFamily, lipschitz_bound: float) -> WeakEmbeddingReport:
    """Check the finite-family rendering of a weak embedding: uniformly
    ``lipschitz_bound``-Lipschitz maps whose worst fiber fractions
    decrease strictly along the family."""
    if len(mf) < 2:
        raise InvalidInputError("a weak-embedding trend needs at least two indices")
    lips = []
    fracs = []
    for entry in mf.entries:
        src = _source_distances(entry.source)
        tgt = _target_distance_table(entry.target)
        n = entry.size
        worst = 0.0
        for x in range(n):
            for y in range(x + 1, n):
                t = float(src[x, y])
                if t <= 0:
                    continue
                worst = max(worst, float(tgt[entry.mapping[x], entry.mapping[y]]) / t)
        lips.append(worst)
        keys = _image_keys(entry)
        sizes: dict = {}
        for k in keys:
            sizes[k] = sizes.get(k, 0) + 1
        fracs.append(max(sizes.values()) / n)
    lipschitz_ok = all(c <= lipschitz_bound + 1e-12 for c in lips)
    decreasing = all(fracs[i + 1] < fracs[i] for i in range(len(fracs) - 1))
    return WeakEmbeddingReport(
        lipschitz_constants=tuple(lips),
        fiber_fractions=tuple(fracs),
        lipschitz_ok=lipschitz_ok,
        fractions_decreasing=decreasing,
        passed=lipschitz_ok and decreasing,
    )


# -- distortion ------------------------------------------------------------------


def distortion(mf: Union[MapFamily, MapEntry]) -> float:
    """(max expansion) * (max contraction) over all vertex pairs of an
    injective single-index map; 1 for an isometry."""
    if isinstance(mf, MapFamily):
        if len(mf) != 1:
            raise InvalidInputError("distortion takes a single-index family")
        entry = mf.entries[0]
    else:
        entry = mf
    if len(set(_image_keys(entry))) != entry.size:
        raise InvalidInputError("distortion needs an injective map")
    src = _source_distances(entry.source)
    tgt = _target_distance_table(entry.target)
    n = entry.size
    expansion = 0.0
    contraction = 0.0
    for x in range(n):
        for y in range(x + 1, n):
            t = float(src[x, y])
            if t <= 0:
                raise InvalidInputError(
                    "source has distinct points at zero distance; not a metric"
                )
            dy = float(tgt[entry.mapping[x], entry.mapping[y]])
            if dy <= 0:
                raise InvalidInputError("distinct source points at zero target distance")
            expansion = max(expansion, dy / t)
            contraction = max(contraction, t / dy)
    if expansion == 0.0:
        raise InvalidInputError("no separated pairs to measure")
    return expansion * contraction


# -- ball concentration -----------------------------------------------------------


def ball_concentration(points: np.ndarray, radius: float) -> int:
    """The largest number of points inside one ball of the given radius
    centered at a point of the set itself.

    Restricting centers to the point set is the standard factor-two
    convention: a ball of radius r about an arbitrary center is covered
    by a ball of radius 2r about any set point inside it, so doubling
    the radius dominates the unrestricted count.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise InvalidInputError("points must form a nonempty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("points must be finite")
    if not (radius >= 0):
        raise InvalidInputError("radius must be nonnegative")
    diff = pts[:, np.newaxis, :] - pts[np.newaxis, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    within = dist <= radius + 1e-12
    return int(within.sum(axis=1).max())


@dataclass(frozen=True)
class CosetConcentrationReport:
    """Outcome of replaying the averaging argument: the base point whose
    X-coset concentrates best, how many of its coset points landed in
    the radius ball around its image, and the |X|/2 threshold."""

    base_index: int
    captured: int
    coset_size: int
    radius: float

    @property
    def passed(self) -> bool:
        return 2 * self.captured >= self.coset_size


def coset_ball_replay(
    group, x_set, f: GroupFunction, radius: float
) -> CosetConcentrationReport:
    """For each group element x, count the coset points x y (y in X)
    whose images lie within ``radius`` of the image of x, and return the
    best x.

    For a 1-Lipschitz f and radius sqrt(2 C |Sigma|) with C a valid
    Poincare constant, the averaging argument guarantees some x captures
    at least half its coset.
    """
    table = resolve_group(group)
    if x_set is None:
        if isinstance(group, WreathGroup):
            x_set = x_subset(group)
        else:
            raise InvalidInputError("an explicit X subset is required for a table group")
    members = subset_indices(group, x_set)
    if not (radius >= 0):
        raise InvalidInputError("radius must be nonnegative")
    vals = f.values
    if vals.shape[0] != table.order:
        raise InvalidInputError("function and group dimensions do not match")
    best_x = 0
    best = -1
    for x in range(table.order):
        center = vals[x]
        hits = 0
        for y in members:
            img = vals[table.mul(x, y)]
            if float(np.linalg.norm(img - center)) <= radius + 1e-12:
                hits += 1
        if hits > best:
            best = hits
            best_x = x
    return CosetConcentrationReport(
        base_index=best_x, captured=best, coset_size=len(members), radius=radius
    )
