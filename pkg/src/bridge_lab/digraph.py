"""Random directed acyclic graphs and their longest-path level counts.

Vertices are 0..n-1 and every admissible edge (i, j) with i < j is present
independently with a common probability, so the index order is already a
topological order.  The weight of a vertex is the maximum number of edges
over all paths ending there; counting vertices by weight level and reading
the counts at a fraction of the maximum weight gives a centered process
that is bridge-like for large n.

Two readings of the level count are provided: ``cumulative`` counts weights
at most a level, ``tail`` counts weights at least a level.  They determine
each other exactly (cumulative(l) + tail(l+1) = n) and the bridge
functional defaults to the cumulative reading, which pins at both ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bridge_lab.renewal import PathSample, default_grid
from bridge_lab.rng_dist import RandomStream

DEFAULT_VARIANT = "cumulative"
_VARIANTS = ("cumulative", "tail")


@dataclass
class RandomDigraph:
    """Edges stored as concatenated in-neighbor lists in vertex order.

    The in-neighbors of vertex j are ``sources[starts[j]:starts[j+1]]``.
    """

    n: int
    p: float
    sources: np.ndarray
    starts: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("vertex count must be at least 1")
        if not 0.0 < self.p < 1.0:
            raise ValueError("edge probability must lie strictly in (0, 1)")
        self.sources = np.asarray(self.sources, dtype=np.int64)
        self.starts = np.asarray(self.starts, dtype=np.int64)
        if self.starts.shape != (self.n + 1,):
            raise ValueError("starts must have one entry per vertex plus a cap")
        if self.starts[0] != 0 or self.starts[-1] != self.sources.size:
            raise ValueError("starts must span the source array")
        if np.any(np.diff(self.starts) < 0):
            raise ValueError("starts must be nondecreasing")
        if self.sources.size:
            row = np.repeat(np.arange(self.n), np.diff(self.starts))
            if np.any(self.sources < 0) or np.any(self.sources >= row):
                raise ValueError("every edge must point from a lower index")

    @property
    def edge_count(self) -> int:
        return int(self.sources.size)

    def in_neighbors(self, j: int) -> np.ndarray:
        return self.sources[self.starts[j] : self.starts[j + 1]]

    def edge_pairs(self) -> np.ndarray:
        """All edges as an (m, 2) array of (source, target) rows."""
        targets = np.repeat(np.arange(self.n), np.diff(self.starts))
        return np.column_stack((self.sources, targets))


@dataclass
class WeightProfile:
    """Longest-path weights of one graph, with counts grouped by level."""

    weights: np.ndarray
    level_counts: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.int64)
        if self.weights.size == 0:
            raise ValueError("profile needs at least one vertex")
        if np.any(self.weights < 0):
            raise ValueError("weights are edge counts and cannot be negative")
        if np.any(self.weights > np.arange(self.weights.size)):
            raise ValueError("a vertex weight cannot exceed its index")
        counts = np.bincount(self.weights, minlength=int(self.weights.max()) + 1)
        if self.level_counts is None:
            self.level_counts = counts
        elif not np.array_equal(np.asarray(self.level_counts), counts):
            raise ValueError("level counts disagree with the weights")
        self._cum = np.cumsum(self.level_counts)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @property
    def max_level(self) -> int:
        return int(self.level_counts.size - 1)


def _pair_rows(flat: np.ndarray) -> np.ndarray:
    """Invert q = j(j-1)/2 + i for the row-major pair ordering."""
    j = ((1.0 + np.sqrt(1.0 + 8.0 * flat)) / 2.0).astype(np.int64)
    j = np.where(j * (j - 1) // 2 > flat, j - 1, j)
    j = np.where(j * (j + 1) // 2 <= flat, j + 1, j)
    return j


def generate_digraph(stream: RandomStream, n: int, p: float) -> RandomDigraph:
    """Draw each pair (i, j), i < j, independently with probability p.

    The present pairs are found by geometric skipping along the row-major
    pair ordering, so the cost is proportional to the edge count rather
    than to n^2.
    """
    if n < 1:
        raise ValueError("vertex count must be at least 1")
    if not 0.0 < p < 1.0:
        raise ValueError("edge probability must lie strictly in (0, 1)")
    total = n * (n - 1) // 2
    log_q = math.log1p(-p)
    chunk = max(256, int(1.1 * p * total) + 64)
    positions = []
    last = -1
    while last < total:
        skips = np.floor(np.log(stream.uniforms(chunk)) / log_q).astype(np.int64)
        block = last + np.cumsum(skips + 1)
        positions.append(block)
        last = int(block[-1])
    flat = np.concatenate(positions)
    flat = flat[flat < total]
    targets = _pair_rows(flat)
    sources = flat - targets * (targets - 1) // 2
    starts = np.searchsorted(targets, np.arange(n + 1))
    return RandomDigraph(n, p, sources, starts)


def vertex_weights(graph: RandomDigraph) -> WeightProfile:
    """Longest-path length, in edges, ending at each vertex.

    One pass in index order suffices because every edge points forward.
    """
    w = np.zeros(graph.n, dtype=np.int64)
    sources, starts = graph.sources, graph.starts
    for j in range(graph.n):
        lo, hi = starts[j], starts[j + 1]
        if hi > lo:
            w[j] = w[sources[lo:hi]].max() + 1
    return WeightProfile(w)


def level_count(profile: WeightProfile, level: int, variant: str = DEFAULT_VARIANT) -> int:
    """Number of vertices with weight <= level (cumulative) or >= level (tail)."""
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}")
    if not 0 <= level <= profile.max_level:
        raise ValueError("level out of range for this profile")
    if variant == "cumulative":
        return int(profile._cum[level])
    return profile.n - (int(profile._cum[level - 1]) if level > 0 else 0)


def digraph_bridge_process(
    graph: RandomDigraph, grid=None, variant: str = DEFAULT_VARIANT
) -> PathSample:
    """Centered level-count path read at a fraction of the maximum weight.

    The cumulative variant evaluates (C(floor(t L)) - t n)/sqrt(n) and
    pins at both ends; the tail variant evaluates the mirrored reading
    (T(floor(t L)) - (1 - t) n)/sqrt(n).  The scale of the limit is not
    known in closed form, so no scale hint is attached.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    profile = vertex_weights(graph)
    big_l = profile.max_level
    if big_l < 1:
        raise ValueError("graph has no edges, the level range is degenerate")
    n = profile.n
    ell = np.minimum(np.floor(grid * big_l).astype(np.int64), big_l)
    root = math.sqrt(n)
    if variant == "cumulative":
        values = (profile._cum[ell] - grid * n) / root
    else:
        cum_prev = np.concatenate(([0], profile._cum))[ell]
        values = ((n - cum_prev) - (1.0 - grid) * n) / root
    return PathSample(grid, values)


def write_edge_list(graph: RandomDigraph, path) -> None:
    """Dump the edges, one `i j` pair per line, for external inspection."""
    np.savetxt(path, graph.edge_pairs(), fmt="%d")
