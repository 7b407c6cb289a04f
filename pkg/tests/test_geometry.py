import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dronecell.geometry import (
    DronePose, GroundPoint, build_grid, euclidean_distance, ground_distance, normalize_heading,
)

coords = st.floats(-1e4, 1e4, allow_nan=False)
points = st.builds(GroundPoint, coords, coords)


@pytest.mark.parametrize("a, b, expected", [
    ((0, 0), (0, 0), 0.0),
    ((0, 0), (3, 4), 5.0),
    ((10, 10), (50, 10), 40.0),
])
def test_ground_distance(a, b, expected):
    assert ground_distance(GroundPoint(*a), GroundPoint(*b)) == pytest.approx(expected)


@pytest.mark.parametrize("r, h, expected", [
    (0.0, 10.0, 10.0),
    (40.0, 10.0, 41.2310562561766),
    (30.0, 40.0, 50.0),
])
def test_euclidean_distance(r, h, expected):
    assert euclidean_distance(r, h) == pytest.approx(expected, rel=1e-12)


@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert ground_distance(a, c) <= ground_distance(a, b) + ground_distance(b, c) + 1e-9


@given(points, points)
def test_ground_distance_symmetric(a, b):
    assert ground_distance(a, b) == ground_distance(b, a)


def test_euclidean_distance_increasing_in_r():
    r = np.linspace(0, 500, 2001)
    d = euclidean_distance(r, 10.0)
    assert np.all(np.diff(d) > 0)
    assert np.all(d >= 10.0)


def test_ground_point_rejects_nan():
    with pytest.raises(ValueError):
        GroundPoint(float("nan"), 0.0)


def test_pose_normalizes_heading():
    pose = DronePose(GroundPoint(0, 0), 10.0, -math.pi / 2)
    assert pose.heading == pytest.approx(1.5 * math.pi)
    assert 0.0 <= normalize_heading(-1e-18) < 2 * math.pi
    with pytest.raises(ValueError):
        DronePose(GroundPoint(0, 0), 0.0)


def test_single_cell_grid():
    grid = build_grid(1, 80)
    assert grid.centers == (GroundPoint(40, 40),)
    assert grid.inner_cell_ids == (0,)


def test_default_grid_has_nine_inner_cells():
    grid = build_grid(7, 80)
    assert len(grid.centers) == 49
    assert grid.inner_cell_ids == (16, 17, 18, 23, 24, 25, 30, 31, 32)
    inner_centers = {(grid.centers[i].x, grid.centers[i].y) for i in grid.inner_cell_ids}
    assert inner_centers == {(x, y) for x in (200, 280, 360) for y in (200, 280, 360)}


def test_small_grid_inner_is_everything():
    grid = build_grid(3, 80)
    assert len(grid.centers) == 9
    assert grid.inner_cell_ids == tuple(range(9))


def test_even_grid_rejected():
    with pytest.raises(ValueError):
        build_grid(4, 80)


def test_centers_are_square_centroids():
    grid = build_grid(5, 80)
    for i, c in enumerate(grid.centers):
        xmin, ymin, xmax, ymax = grid.bounds(i)
        assert (c.x, c.y) == ((xmin + xmax) / 2, (ymin + ymax) / 2)
        assert xmax - xmin == ymax - ymin == 80


@given(st.floats(0, 560), st.floats(0, 560))
def test_membership_partitions_grid(x, y):
    grid = build_grid(7, 80)
    cell = grid.cell_of(GroundPoint(x, y))
    assert cell is not None
    xmin, ymin, xmax, ymax = grid.bounds(cell)
    assert xmin <= x <= xmax and ymin <= y <= ymax
    # every other cell that contains the point only touches it on an edge
    for other in range(grid.n_cells):
        if other == cell:
            continue
        ox0, oy0, ox1, oy1 = grid.bounds(other)
        if ox0 < x < ox1 and oy0 < y < oy1:
            pytest.fail(f"point interior to cells {cell} and {other}")


def test_outside_grid_has_no_cell():
    assert build_grid(3, 80).cell_of(GroundPoint(-1, 5)) is None
