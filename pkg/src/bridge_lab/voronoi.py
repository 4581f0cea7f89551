"""Planar Poisson clouds, nearest-point maps and Voronoi cell geometry.

Everything lives in a finite axis-aligned window at intensity 1.  Sites
are indexed by a uniform bucket grid of cell size 1, so nearest-point
queries cost O(1) on average.  Cells are convex polygons obtained by
clipping the window with perpendicular-bisector half-planes; candidate
sites are visited in distance order, which lets the clipping loop stop as
soon as no farther site can still cut the polygon.

The centered path functional reads, for each grid fraction t, the
distance from the scaled query point t*x to the cell containing the
scaled nearest site t*pi(x), normalized by sqrt(||x||).  It vanishes
identically at both ends because a point always lies in the cell that
contains it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bridge_lab.renewal import PathSample, default_grid
from bridge_lab.rng_dist import RandomStream

MARGIN = 8.0
CANDIDATE_RADIUS = 16.0


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self) -> None:
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("window must have positive width and height")

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def contains(self, p, pad: float = 0.0) -> bool:
        return (
            self.xmin + pad <= p[0] <= self.xmax - pad
            and self.ymin + pad <= p[1] <= self.ymax - pad
        )

    def corners(self) -> np.ndarray:
        return np.array(
            [
                [self.xmin, self.ymin],
                [self.xmax, self.ymin],
                [self.xmax, self.ymax],
                [self.xmin, self.ymax],
            ]
        )


def segment_window(x, margin: float = MARGIN) -> Window:
    """Bounding box of the segment from the origin to x, inflated."""
    x = np.asarray(x, dtype=float)
    return Window(
        min(0.0, x[0]) - margin,
        min(0.0, x[1]) - margin,
        max(0.0, x[0]) + margin,
        max(0.0, x[1]) + margin,
    )


@dataclass
class PointCloud:
    """Finite site set with a unit-size bucket index over the window."""

    points: np.ndarray
    window: Window
    _starts: np.ndarray = field(init=False, repr=False)
    _order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self._nx = max(1, math.ceil(self.window.xmax - self.window.xmin))
        self._ny = max(1, math.ceil(self.window.ymax - self.window.ymin))
        ids = self._bucket_ids(self.points)
        self._order = np.argsort(ids, kind="stable")
        sorted_ids = ids[self._order]
        self._starts = np.searchsorted(
            sorted_ids, np.arange(self._nx * self._ny + 1)
        )

    def _bucket_ids(self, pts) -> np.ndarray:
        ix = np.clip(
            np.floor(pts[:, 0] - self.window.xmin).astype(np.int64), 0, self._nx - 1
        )
        iy = np.clip(
            np.floor(pts[:, 1] - self.window.ymin).astype(np.int64), 0, self._ny - 1
        )
        return ix * self._ny + iy

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def in_box(self, center, radius: float) -> np.ndarray:
        """Indices of sites within the square of half-width radius."""
        ix0 = max(0, math.floor(center[0] - radius - self.window.xmin))
        ix1 = min(self._nx - 1, math.floor(center[0] + radius - self.window.xmin))
        iy0 = max(0, math.floor(center[1] - radius - self.window.ymin))
        iy1 = min(self._ny - 1, math.floor(center[1] + radius - self.window.ymin))
        if ix1 < ix0 or iy1 < iy0:
            return np.array([], dtype=np.int64)
        rows = []
        for ix in range(ix0, ix1 + 1):
            lo = self._starts[ix * self._ny + iy0]
            hi = self._starts[ix * self._ny + iy1 + 1]
            rows.append(self._order[lo:hi])
        idx = np.concatenate(rows) if rows else np.array([], dtype=np.int64)
        if idx.size == 0:
            return idx
        pts = self.points[idx]
        keep = (np.abs(pts[:, 0] - center[0]) <= radius) & (
            np.abs(pts[:, 1] - center[1]) <= radius
        )
        return idx[keep]


@dataclass
class VoronoiCellPoly:
    """Convex cell polygon, counterclockwise, clipped to the window."""

    site: np.ndarray
    vertices: np.ndarray

    def __post_init__(self) -> None:
        self.site = np.asarray(self.site, dtype=float)
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if self.vertices.shape[0] < 3:
            raise ValueError("cell polygon must have at least 3 vertices")
        a = self.vertices
        b = np.roll(a, -1, axis=0)
        c = np.roll(a, -2, axis=0)
        cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (
            b[:, 1] - a[:, 1]
        ) * (c[:, 0] - a[:, 0])
        if np.any(cross < -1e-9):
            raise ValueError("cell polygon must be convex and counterclockwise")
        if dist_point_to_cell(self, self.site, _validate=False) > 0.0:
            raise ValueError("cell must contain its site")


def sample_poisson(stream: RandomStream, window: Window) -> PointCloud:
    """Poisson(area) many sites placed uniformly in the window."""
    count = int(stream.poisson(window.area, 1)[0])
    u = stream.uniforms(2 * count).reshape(-1, 2)
    pts = np.column_stack(
        (
            window.xmin + (window.xmax - window.xmin) * u[:, 0],
            window.ymin + (window.ymax - window.ymin) * u[:, 1],
        )
    )
    return PointCloud(pts, window)


def nearest_point(cloud: PointCloud, x) -> np.ndarray:
    """The site closest to x; exact ties go to the lexicographically least."""
    if cloud.size == 0:
        raise ValueError("cloud is empty")
    x = np.asarray(x, dtype=float)
    span = float(cloud._nx + cloud._ny) + abs(x[0]) + abs(x[1])
    radius = 1.0
    while True:
        idx = cloud.in_box(x, radius)
        if idx.size:
            d2 = np.sum((cloud.points[idx] - x) ** 2, axis=1)
            best = math.sqrt(float(d2.min()))
            if best <= radius:
                break
            radius = best
        else:
            radius *= 2.0
            if radius > 2.0 * span:
                idx = np.arange(cloud.size)
                d2 = np.sum((cloud.points - x) ** 2, axis=1)
                break
    ties = idx[d2 == d2.min()]
    pts = cloud.points[ties]
    pick = np.lexsort((pts[:, 1], pts[:, 0]))[0]
    return cloud.points[ties[pick]].copy()


def _clip_halfplane(poly: np.ndarray, a: np.ndarray, b: float) -> np.ndarray:
    """Intersect a convex polygon with {x : a.x <= b}."""
    vals = poly @ a - b
    out = []
    m = poly.shape[0]
    for i in range(m):
        j = (i + 1) % m
        vi, vj = vals[i], vals[j]
        if vi <= 0.0:
            out.append(poly[i])
        if (vi < 0.0 < vj) or (vj < 0.0 < vi):
            t = vi / (vi - vj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.asarray(out).reshape(-1, 2)


def _cell_polygon(cloud: PointCloud, z: np.ndarray) -> np.ndarray:
    poly = cloud.window.corners()
    idx = cloud.in_box(z, CANDIDATE_RADIUS)
    others = cloud.points[idx]
    d2 = np.sum((others - z) ** 2, axis=1)
    keep = d2 > 0.0
    others, d2 = others[keep], d2[keep]
    order = np.argsort(d2)
    r_max = float(np.max(np.linalg.norm(poly - z, axis=1)))
    for k in order:
        if math.sqrt(d2[k]) > 2.0 * r_max:
            break
        z2 = others[k]
        a = 2.0 * (z2 - z)
        b = float(z2 @ z2 - z @ z)
        poly = _clip_halfplane(poly, a, b)
        if poly.shape[0] == 0:
            break
        r_max = float(np.max(np.linalg.norm(poly - z, axis=1)))
    return poly


def voronoi_cell(cloud: PointCloud, z) -> VoronoiCellPoly:
    """The cell of a site: all points at least as close to it as to any site."""
    z = np.asarray(z, dtype=float)
    if cloud.size == 0 or not np.any(np.all(cloud.points == z, axis=1)):
        raise ValueError("z is not a site of the cloud")
    return VoronoiCellPoly(z, _cell_polygon(cloud, z))


def cell_of(cloud: PointCloud, y) -> VoronoiCellPoly:
    """The cell containing an arbitrary point, via its nearest site."""
    site = nearest_point(cloud, y)
    return VoronoiCellPoly(site, _cell_polygon(cloud, site))


def dist_point_to_cell(cell: VoronoiCellPoly, y, _validate: bool = True) -> float:
    """Zero inside the polygon, else the distance to its boundary."""
    if _validate and cell.vertices.shape[0] < 3:
        raise ValueError("degenerate cell polygon")
    y = np.asarray(y, dtype=float)
    a = cell.vertices
    b = np.roll(a, -1, axis=0)
    edge = b - a
    cross = edge[:, 0] * (y[1] - a[:, 1]) - edge[:, 1] * (y[0] - a[:, 0])
    if np.all(cross >= -1e-12):
        return 0.0
    t = np.clip(
        ((y - a) * edge).sum(axis=1) / (edge * edge).sum(axis=1), 0.0, 1.0
    )
    foot = a + t[:, None] * edge
    return float(np.min(np.linalg.norm(foot - y, axis=1)))


def d_process(cloud: PointCloud, x, grid=None) -> PathSample:
    """Distances from t*x to the cell containing t*pi(x), over sqrt(||x||).

    The whole segment from the origin to x must sit inside the window
    with the standard margin, so that no queried cell feels the boundary.
    """
    x = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ValueError("x must be away from the origin")
    pad_ok = (
        cloud.window.xmin <= min(0.0, x[0]) - MARGIN
        and cloud.window.ymin <= min(0.0, x[1]) - MARGIN
        and cloud.window.xmax >= max(0.0, x[0]) + MARGIN
        and cloud.window.ymax >= max(0.0, x[1]) + MARGIN
    )
    if not pad_ok:
        raise ValueError("window must contain the segment to x with margin")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    anchor = nearest_point(cloud, x)
    values = np.empty(grid.size)
    root = math.sqrt(norm)
    for k, t in enumerate(grid):
        cell = cell_of(cloud, t * anchor)
        values[k] = dist_point_to_cell(cell, t * x) / root
    return PathSample(grid, values)
