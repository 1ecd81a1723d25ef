"""Rayleigh-regular supports: membership tests, partitions, random sampling.

A support T on the torus grid belongs to the class R_D(d, r; N, n) when it
splits into r disjoint subsets such that every axis-aligned square (interval
in 1D) of side d*lambda_c/2 contains at most one point of each subset.
Windows are taken half-open, so the per-subset constraint is equivalent to a
pairwise sup-norm torus separation of at least d*lambda_c/2.  Membership is
therefore an r-coloring problem on the conflict graph whose edges join point
pairs closer than the window side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSupportError, PartitionError
from .grid import Grid

__all__ = [
    "SupportSet",
    "RayleighParams",
    "is_regular",
    "partition_ordered",
    "partition_2d",
    "sample_support",
    "packing_capacity",
]

# Distances this close to the window side count as separated; guards float
# noise in d*lambda_c/2 when d is a decimal like 3.74.
_SEP_RTOL = 1e-9

# Exact-search ceilings: exhaustive coloring is attempted only below these.
_EXACT_MAX_POINTS = 24
_EXACT_MAX_CLASSES = 4


def _as_index_tuples(indices, dimension: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for idx in indices:
        tup = tuple(int(v) for v in np.atleast_1d(idx))
        if len(tup) != dimension:
            raise ValueError(f"point {idx!r} is not {dimension}-dimensional")
        out.append(tup)
    return tuple(sorted(out))


@dataclass(frozen=True)
class SupportSet:
    """Finite set of grid positions, stored as sorted integer index tuples."""

    grid: Grid
    indices: tuple

    def __post_init__(self):
        tups = _as_index_tuples(self.indices, self.grid.dimension)
        if len(set(tups)) != len(tups):
            raise ValueError("support points must be distinct")
        for tup in tups:
            if any(not (0 <= v < self.grid.size) for v in tup):
                raise ValueError(f"point {tup} outside [0, {self.grid.size})")
        object.__setattr__(self, "indices", tups)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def positions(self) -> np.ndarray:
        """Points of the torus, shape (k, D)."""
        arr = np.array(self.indices, dtype=np.float64)
        return arr.reshape(len(self.indices), self.grid.dimension) / self.grid.size

    def index_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.int64)

    def shifted(self, offset) -> "SupportSet":
        """Cyclic translation by an integer offset (per axis)."""
        off = np.atleast_1d(np.asarray(offset, dtype=np.int64))
        moved = (self.index_array() + off) % self.grid.size
        return SupportSet(self.grid, [tuple(row) for row in moved])

    @staticmethod
    def from_flat(grid: Grid, flat_indices) -> "SupportSet":
        if grid.dimension != 1:
            raise ValueError("from_flat is for 1D grids")
        return SupportSet(grid, [(int(i),) for i in flat_indices])


@dataclass(frozen=True)
class RayleighParams:
    """Class parameters (d, r) relative to a grid's cutoff wavelength."""

    d: float
    r: int
    grid: Grid

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("d must be positive")
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.grid.cutoff < 1:
            raise ValueError("Rayleigh classes need a cutoff of at least 1")

    @property
    def window(self) -> float:
        """Window side d*lambda_c/2 in torus units."""
        return self.d * self.grid.wavelength / 2.0


def _pairwise_separations(support: SupportSet) -> np.ndarray:
    """Matrix of sup-norm torus distances between support points."""
    idx = support.index_array()
    if idx.ndim == 1:
        idx = idx[:, None]
    n = support.grid.size
    diff = np.abs(idx[:, None, :] - idx[None, :, :])
    diff = np.minimum(diff, n - diff)
    return diff.max(axis=2) / n


def _conflict_graph(support: SupportSet, window: float) -> np.ndarray:
    sep = _pairwise_separations(support)
    conflicts = sep < window * (1.0 - _SEP_RTOL)
    np.fill_diagonal(conflicts, False)
    return conflicts


def _greedy_coloring(conflicts: np.ndarray, r: int, order) -> list[int] | None:
    colors = [-1] * conflicts.shape[0]
    for v in order:
        used = {colors[u] for u in np.nonzero(conflicts[v])[0] if colors[u] >= 0}
        for c in range(r):
            if c not in used:
                colors[v] = c
                break
        else:
            return None
    return colors


def _exact_coloring(conflicts: np.ndarray, r: int) -> list[int] | None:
    k = conflicts.shape[0]
    order = sorted(range(k), key=lambda v: -int(conflicts[v].sum()))
    colors = [-1] * k

    def extend(pos: int, used: int) -> bool:
        if pos == k:
            return True
        v = order[pos]
        neighbor_colors = {
            colors[u] for u in np.nonzero(conflicts[v])[0] if colors[u] >= 0
        }
        # allowing at most one brand-new color kills color-permutation symmetry
        for c in range(min(used + 1, r)):
            if c in neighbor_colors:
                continue
            colors[v] = c
            if extend(pos + 1, max(used, c + 1)):
                return True
            colors[v] = -1
        return False

    return colors if extend(0, 0) else None


def _colors_to_partition(support: SupportSet, colors, r: int) -> list[SupportSet]:
    groups: list[list] = [[] for _ in range(r)]
    for point, c in zip(support.indices, colors):
        groups[c].append(point)
    return [SupportSet(support.grid, g) for g in groups if g]


def is_regular(support: SupportSet, params: RayleighParams):
    """Class membership with a witness.

    Returns ``(True, partition)`` where the partition is a list of
    :class:`SupportSet` covering the support with the required per-subset
    separation, or ``(False, None)``.  Small instances that defeat the
    greedy pass are settled by exhaustive search, so the verdict is exact.
    """
    if support.grid != params.grid:
        raise ValueError("support and params use different grids")
    k = len(support)
    if k == 0:
        return True, []
    if k == 1:
        return True, [support]
    conflicts = _conflict_graph(support, params.window)
    if not conflicts.any():
        return True, [support]
    order = sorted(range(k), key=lambda v: -int(conflicts[v].sum()))
    colors = _greedy_coloring(conflicts, params.r, order)
    if colors is None:
        if k > _EXACT_MAX_POINTS and params.r > _EXACT_MAX_CLASSES:
            raise ValueError(
                f"membership for |T|={k}, r={params.r} exceeds the exact-search bound"
            )
        colors = _exact_coloring(conflicts, params.r)
    if colors is None:
        return False, None
    return True, _colors_to_partition(support, colors, params.r)


def partition_ordered(support: SupportSet, r: int) -> list[SupportSet]:
    """Split a sorted 1D support into r subsets by rank: subset i takes
    every r-th point starting from the i-th."""
    if support.grid.dimension != 1:
        raise ValueError("ordered partition is defined for 1D supports")
    if r < 1:
        raise ValueError("r must be at least 1")
    pts = support.indices
    return [SupportSet(support.grid, pts[i::r]) for i in range(r) if pts[i::r]]


def partition_2d(support: SupportSet, r: int, sep: float) -> list[SupportSet]:
    """Partition a 2D support into r subsets with per-subset sup-norm
    separation at least sep*lambda_c/2.

    Points are taken in lexicographic order and placed into the first
    subset that keeps the separation (deterministic).  If the greedy pass
    fails, supports of at most 12 points are settled exhaustively.
    """
    if support.grid.dimension != 2:
        raise ValueError("partition_2d requires a 2D support")
    window = sep * support.grid.wavelength / 2.0
    conflicts = _conflict_graph(support, window)
    k = len(support)
    colors = _greedy_coloring(conflicts, r, range(k))  # lexicographic order
    if colors is None and k <= 12:
        colors = _exact_coloring(conflicts, r)
    if colors is None:
        raise PartitionError(
            f"no {r}-way partition with separation {sep}*lambda_c/2 found "
            f"for {k} points"
        )
    return _colors_to_partition(support, colors, r)


def packing_capacity(params: RayleighParams) -> int:
    """Upper bound on |T| for members of the class (torus packing bound)."""
    window = params.window
    if window > 0.5:
        per_axis = 1
    else:
        per_axis = int(np.floor(1.0 / window * (1.0 + _SEP_RTOL)))
    return params.r * per_axis**params.grid.dimension


def sample_support(
    params: RayleighParams,
    count: int,
    seed: int,
    region=None,
    max_tries: int = 400,
) -> SupportSet:
    """Random support of the given size, verified to lie in the class.

    Rejection sampling: candidate points are drawn uniformly (within
    ``region``, a per-axis ``(lo, hi)`` half-open index box, if given) and
    placed into the first of r groups that keeps the group separated.
    Deterministic per seed.  Raises :class:`InfeasibleSupportError` when the
    request exceeds the packing bound or sampling keeps failing.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    grid = params.grid
    if count > packing_capacity(params):
        raise InfeasibleSupportError(
            f"{count} points exceed the packing bound "
            f"{packing_capacity(params)} for d={params.d}, r={params.r}"
        )
    if region is None:
        boxes = [(0, grid.size)] * grid.dimension
    else:
        boxes = [tuple(int(v) for v in b) for b in region]
    rng = np.random.default_rng(seed)
    window = params.window

    for _ in range(max_tries):
        groups: list[list] = [[] for _ in range(params.r)]
        taken: set = set()
        failures = 0
        while sum(len(g) for g in groups) < count and failures < 60 * count:
            point = tuple(int(rng.integers(lo, hi)) for lo, hi in boxes)
            if point in taken:
                failures += 1
                continue
            placed = False
            for g in groups:
                if all(
                    grid.chebyshev_distance(point, q) >= window * (1.0 - _SEP_RTOL)
                    for q in g
                ):
                    g.append(point)
                    taken.add(point)
                    placed = True
                    break
            if not placed:
                failures += 1
        if sum(len(g) for g in groups) == count:
            support = SupportSet(grid, [p for g in groups for p in g])
            ok, _ = is_regular(support, params)
            if ok:
                return support
    raise InfeasibleSupportError(
        f"could not sample {count} points in R({params.d}, {params.r}) "
        f"after {max_tries} attempts"
    )
