import numpy as np
import pytest

from src.services.contour import boundary_polylines, cell_indices


def test_cell_indices_bit_order():
    grid = np.array([[1, 0], [0, 1]], dtype=bool)
    assert cell_indices(grid).tolist() == [[10]]
    assert cell_indices(~grid).tolist() == [[5]]


def test_uniform_grid_has_no_boundary():
    assert boundary_polylines(np.ones((4, 4), bool), np.arange(4.0), np.arange(4.0)) == []
    assert boundary_polylines(np.zeros((4, 4), bool), np.arange(4.0), np.arange(4.0)) == []


def test_single_stable_sample_gives_closed_diamond():
    grid = np.zeros((3, 3), dtype=bool)
    grid[1, 1] = True
    (line,) = boundary_polylines(grid, np.arange(3.0), np.arange(3.0))
    assert line.shape == (5, 2)
    np.testing.assert_array_equal(line[0], line[-1])
    assert {tuple(p) for p in line} == {(1.0, 0.5), (1.5, 1.0), (1.0, 1.5), (0.5, 1.0)}


def test_disk_boundary_is_one_closed_loop():
    x = np.linspace(-2, 2, 81)
    X, Y = np.meshgrid(x, x)
    grid = X**2 + Y**2 <= 1.0
    (line,) = boundary_polylines(grid, x, x)
    np.testing.assert_array_equal(line[0], line[-1])
    assert np.all(np.abs(np.hypot(line[:, 0], line[:, 1]) - 1.0) < 0.05)


def test_saddle_keeps_stable_diagonal_connected():
    grid = np.array([[1, 0], [0, 1]], dtype=bool)
    lines = boundary_polylines(grid, np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    assert len(lines) == 2
    cut_off = sorted(tuple(sorted(map(tuple, line))) for line in lines)
    # each segment separates one unstable corner from the stable diagonal
    assert cut_off == [((0.0, 0.5), (0.5, 1.0)), ((0.5, 0.0), (1.0, 0.5))]


def test_shape_mismatch():
    with pytest.raises(ValueError):
        boundary_polylines(np.zeros((3, 4), bool), np.arange(3.0), np.arange(4.0))
