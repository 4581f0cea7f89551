"""Tests for Poisson clouds, nearest-site queries and cell geometry."""

import functools
import math

import numpy as np
import pytest

from bridge_lab.rng_dist import make_stream
from bridge_lab.voronoi import (
    PointCloud,
    VoronoiCellPoly,
    Window,
    cell_of,
    d_process,
    dist_point_to_cell,
    nearest_point,
    sample_poisson,
    segment_window,
    voronoi_cell,
)

SQUARE = Window(-5.0, -5.0, 5.0, 5.0)


def scan_nearest(points, x):
    """Linear-scan oracle with the same lexicographic tie rule."""
    d2 = ((points - x) ** 2).sum(axis=1)
    cand = points[d2 == d2.min()]
    return cand[np.lexsort((cand[:, 1], cand[:, 0]))[0]]


def boundary_oracle(cell, y, samples=65536):
    """Densely sampled boundary distance, independent of projections."""
    a = cell.vertices
    b = np.roll(a, -1, axis=0)
    ts = np.linspace(0.0, 1.0, samples)[:, None]
    best = math.inf
    for i in range(a.shape[0]):
        pts = a[i] + ts * (b[i] - a[i])
        best = min(best, float(np.linalg.norm(pts - y, axis=1).min()))
    return best


@functools.lru_cache(maxsize=1)
def poisson_counts():
    win = Window(0.0, 0.0, 10.0, 10.0)
    total, left, right = [], [], []
    for r in range(2000):
        cloud = sample_poisson(make_stream(21, r), win)
        total.append(cloud.size)
        if cloud.size:
            xs = cloud.points[:, 0]
            left.append(int((xs < 5.0).sum()))
            right.append(int((xs >= 5.0).sum()))
        else:
            left.append(0)
            right.append(0)
    return np.array(total), np.array(left), np.array(right)


def test_poisson_mean_count():
    total, _, _ = poisson_counts()
    assert abs(total.mean() - 100.0) < 2.5


def test_poisson_count_variance():
    total, _, _ = poisson_counts()
    assert abs(total.var() - 100.0) < 10.0


def test_poisson_disjoint_boxes_uncorrelated():
    _, left, right = poisson_counts()
    cov = np.cov(left, right)[0, 1]
    # each half has Poisson(50) counts, so the SE of the estimate is
    # about sqrt(50*50/2000)
    assert abs(cov) < 3.4 * math.sqrt(50.0 * 50.0 / 2000.0)


def test_nearest_singleton_and_exact_hit():
    cloud = PointCloud(np.array([[1.0, 1.0]]), SQUARE)
    np.testing.assert_array_equal(nearest_point(cloud, [4.0, -4.0]), [1.0, 1.0])
    cloud2 = sample_poisson(make_stream(22, 0), SQUARE)
    site = cloud2.points[7]
    np.testing.assert_array_equal(nearest_point(cloud2, site), site)


def test_nearest_tie_breaks_lexicographically():
    cloud = PointCloud(np.array([[2.0, 0.0], [0.0, 0.0]]), SQUARE)
    np.testing.assert_array_equal(nearest_point(cloud, [1.0, 0.0]), [0.0, 0.0])
    vertical = PointCloud(np.array([[0.0, 2.0], [0.0, 0.0]]), SQUARE)
    np.testing.assert_array_equal(nearest_point(vertical, [0.0, 1.0]), [0.0, 0.0])


def test_nearest_matches_linear_scan():
    rng = np.random.default_rng(23)
    cloud = sample_poisson(make_stream(23, 0), SQUARE)
    for _ in range(100):
        if rng.random() < 0.3:
            q = cloud.points[rng.integers(cloud.size)] + rng.normal(0, 0.01, 2)
        else:
            q = rng.uniform(-5.0, 5.0, 2)
        np.testing.assert_array_equal(
            nearest_point(cloud, q), scan_nearest(cloud.points, q)
        )


def test_nearest_empty_cloud():
    empty = PointCloud(np.empty((0, 2)), SQUARE)
    with pytest.raises(ValueError):
        nearest_point(empty, [0.0, 0.0])


def test_cell_of_two_sites_is_clipped_halfplane():
    cloud = PointCloud(np.array([[0.0, 0.0], [2.0, 0.0]]), SQUARE)
    cell = voronoi_cell(cloud, [0.0, 0.0])
    expected = {(-5.0, -5.0), (1.0, -5.0), (1.0, 5.0), (-5.0, 5.0)}
    assert {tuple(v) for v in cell.vertices} == expected


def test_cell_of_single_site_is_window():
    cloud = PointCloud(np.array([[1.0, 1.0]]), SQUARE)
    cell = voronoi_cell(cloud, [1.0, 1.0])
    assert {tuple(v) for v in cell.vertices} == {tuple(c) for c in SQUARE.corners()}


def test_cell_requires_site():
    cloud = PointCloud(np.array([[0.0, 0.0], [2.0, 0.0]]), SQUARE)
    with pytest.raises(ValueError):
        voronoi_cell(cloud, [0.5, 0.5])


def test_cell_membership_sampling():
    rng = np.random.default_rng(24)
    for r in range(50):
        cloud = sample_poisson(make_stream(24, r), Window(0.0, 0.0, 8.0, 8.0))
        if cloud.size < 2:
            continue
        site = cloud.points[int(rng.integers(cloud.size))]
        cell = voronoi_cell(cloud, site)
        k = cell.vertices.shape[0]
        w = rng.exponential(size=(1000, k))
        probes = (w / w.sum(axis=1, keepdims=True)) @ cell.vertices
        d_site = np.linalg.norm(probes - site, axis=1)
        d_all = np.linalg.norm(
            probes[:, None, :] - cloud.points[None, :, :], axis=2
        ).min(axis=1)
        assert np.all(d_site <= d_all + 1e-9)


def test_cell_of_contains_query():
    rng = np.random.default_rng(25)
    cloud = sample_poisson(make_stream(25, 0), SQUARE)
    for _ in range(100):
        y = rng.uniform(-5.0, 5.0, 2)
        cell = cell_of(cloud, y)
        assert dist_point_to_cell(cell, y) == 0.0
        np.testing.assert_array_equal(cell.site, scan_nearest(cloud.points, y))


def test_cell_of_site_is_own_cell():
    cloud = sample_poisson(make_stream(26, 0), SQUARE)
    site = cloud.points[3]
    cell = cell_of(cloud, site)
    np.testing.assert_array_equal(cell.site, site)


def test_dist_inside_and_halfplane():
    cloud = PointCloud(np.array([[0.0, 0.0], [2.0, 0.0]]), SQUARE)
    cell = voronoi_cell(cloud, [0.0, 0.0])
    assert dist_point_to_cell(cell, [0.5, 0.5]) == 0.0
    assert dist_point_to_cell(cell, [3.0, 0.0]) == pytest.approx(2.0, abs=1e-12)


def test_dist_matches_boundary_sampling():
    rng = np.random.default_rng(27)
    checked = 0
    r = 0
    while checked < 100:
        cloud = sample_poisson(make_stream(27, r), Window(0.0, 0.0, 12.0, 12.0))
        r += 1
        if cloud.size < 3:
            continue
        for _ in range(10):
            y = rng.uniform(0.0, 12.0, 2)
            cell = cell_of(cloud, rng.uniform(0.0, 12.0, 2))
            d = dist_point_to_cell(cell, y)
            if d < 0.05 or np.linalg.norm(y - cell.site) < 1.0:
                continue
            assert abs(d - boundary_oracle(cell, y)) < 1e-6
            checked += 1
            if checked == 100:
                break


def test_cell_polygon_validation():
    bowtie = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        VoronoiCellPoly(np.array([0.5, 0.5]), bowtie)
    triangle = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        VoronoiCellPoly(np.array([5.0, 5.0]), triangle)
    with pytest.raises(ValueError):
        VoronoiCellPoly(np.array([0.0, 0.0]), triangle[:2])


def test_d_process_pins_exactly():
    x = np.array([60.0, 0.0])
    win = segment_window(x)
    for r in range(50):
        cloud = sample_poisson(make_stream(28, r), win)
        sample = d_process(cloud, x)
        assert sample.values[0] == 0.0
        assert sample.values[-1] == 0.0
        assert np.all(sample.values >= 0.0)


def test_d_process_pathwise_bound():
    # the queried cell always contains the scaled nearest site, so the
    # value is at most the distance between the two scaled points
    x = np.array([60.0, 25.0])
    win = segment_window(x)
    norm = float(np.linalg.norm(x))
    for r in range(20):
        cloud = sample_poisson(make_stream(29, r), win)
        sample = d_process(cloud, x)
        gap = float(np.linalg.norm(x - nearest_point(cloud, x)))
        bound = sample.grid * gap / math.sqrt(norm)
        assert np.all(sample.values <= bound + 1e-12)


def test_d_process_margin_enforced():
    cloud = sample_poisson(make_stream(30, 0), SQUARE)
    with pytest.raises(ValueError):
        d_process(cloud, np.array([20.0, 0.0]))
    with pytest.raises(ValueError):
        d_process(cloud, np.array([0.0, 0.0]))


def test_primitives_translation_equivariant():
    shift = np.array([3.7, -2.2])
    win = Window(0.0, 0.0, 12.0, 12.0)
    moved = Window(*(np.array([0.0, 0.0, 12.0, 12.0]) + np.tile(shift, 2)))
    cloud = sample_poisson(make_stream(31, 0), win)
    cloud2 = PointCloud(cloud.points + shift, moved)
    rng = np.random.default_rng(31)
    for _ in range(40):
        y = rng.uniform(1.0, 11.0, 2)
        base = nearest_point(cloud, y)
        np.testing.assert_allclose(nearest_point(cloud2, y + shift), base + shift, atol=1e-9)
        probe = rng.uniform(0.0, 12.0, 2)
        d1 = dist_point_to_cell(cell_of(cloud, y), probe)
        d2 = dist_point_to_cell(cell_of(cloud2, y + shift), probe + shift)
        assert abs(d1 - d2) < 1e-9
