"""
Marching squares on a boolean grid.

Grid values are sampled at cell centres; the returned polylines run through the
midpoints between stable and unstable neighbours. Saddle cells are resolved so
that diagonal stable corners stay connected.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, List, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# corners: 0=(i, j), 1=(i, j+1), 2=(i+1, j+1), 3=(i+1, j); bit 3 is corner 0
# entry: (saddle, edges) or (saddle, (edges_centre_out, edges_centre_in))
MARCHING_SQUARES_TABLE = [
    (False, []),  # 0000
    (False, [((0, 3), (2, 3))]),  # 0001
    (False, [((1, 2), (2, 3))]),  # 0010
    (False, [((0, 3), (1, 2))]),  # 0011
    (False, [((0, 1), (1, 2))]),  # 0100
    (True, ([((0, 1), (1, 2)), ((0, 3), (2, 3))], [((0, 1), (0, 3)), ((1, 2), (3, 2))])),  # 0101
    (False, [((0, 1), (2, 3))]),  # 0110
    (False, [((0, 1), (0, 3))]),  # 0111
    (False, [((0, 1), (0, 3))]),  # 1000
    (False, [((0, 1), (2, 3))]),  # 1001
    (True, ([((0, 1), (0, 3)), ((1, 2), (3, 2))], [((0, 1), (1, 2)), ((0, 3), (2, 3))])),  # 1010
    (False, [((0, 1), (1, 2))]),  # 1011
    (False, [((0, 3), (1, 2))]),  # 1100
    (False, [((1, 2), (2, 3))]),  # 1101
    (False, [((0, 3), (2, 3))]),  # 1110
    (False, []),  # 1111
]

_CORNER_OFFSETS = ((0, 0), (0, 1), (1, 1), (1, 0))

Key = Tuple[int, int]


def _edge_key(i: int, j: int, edge: Tuple[int, int]) -> Key:
    """Edge midpoint in doubled integer grid coordinates (row, col)."""
    a, b = (_CORNER_OFFSETS[k] for k in edge)
    return 2 * i + a[0] + b[0], 2 * j + a[1] + b[1]


def cell_indices(grid: np.ndarray) -> np.ndarray:
    """Case index (0..15) of every 2x2 cell of a boolean grid."""
    g = np.asarray(grid, dtype=np.uint8)
    return (g[:-1, :-1] << 3) | (g[:-1, 1:] << 2) | (g[1:, 1:] << 1) | g[1:, :-1]


def segments(grid: np.ndarray) -> List[Tuple[Key, Key]]:
    idx = cell_indices(grid)
    out: List[Tuple[Key, Key]] = []
    for i, j in zip(*np.nonzero((idx != 0) & (idx != 15))):
        saddle, edges = MARCHING_SQUARES_TABLE[idx[i, j]]
        if saddle:
            edges = edges[1]
        for e0, e1 in edges:
            out.append((_edge_key(i, j, e0), _edge_key(i, j, e1)))
    return out


def _chain(segs: List[Tuple[Key, Key]]) -> List[List[Key]]:
    adjacency: Dict[Key, List[int]] = defaultdict(list)
    for n, (p, q) in enumerate(segs):
        adjacency[p].append(n)
        adjacency[q].append(n)
    used = np.zeros(len(segs), dtype=bool)
    lines: List[List[Key]] = []

    def walk(start: Key, line: List[Key]) -> None:
        point = start
        while True:
            nxt = [n for n in adjacency[point] if not used[n]]
            if not nxt:
                return
            n = nxt[0]
            used[n] = True
            p, q = segs[n]
            point = q if p == point else p
            line.append(point)

    # open lines first (endpoints with a single segment), then closed loops
    starts = [p for p, ns in adjacency.items() if len(ns) == 1] + list(adjacency)
    for start in starts:
        if all(used[n] for n in adjacency[start]):
            continue
        line = [start]
        walk(start, line)
        line.reverse()
        walk(start, line)
        lines.append(line)
    return lines


def boundary_polylines(
    grid: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
) -> List[np.ndarray]:
    """Boundary of the True set as (k, 2) arrays of (x, y) points.

    grid has shape (len(y), len(x)); x and y are the cell-centre coordinates.
    """
    grid = np.asarray(grid, dtype=bool)
    if grid.shape != (len(y), len(x)):
        raise ValueError(f"grid shape {grid.shape} does not match axes ({len(y)}, {len(x)})")
    if grid.shape[0] < 2 or grid.shape[1] < 2:
        return []
    lines = _chain(segments(grid))
    dx, dy = x[1] - x[0], y[1] - y[0]
    result = []
    for line in lines:
        pts = np.array(line, dtype=float)
        result.append(np.column_stack([x[0] + pts[:, 1] * dx / 2, y[0] + pts[:, 0] * dy / 2]))
    logger.debug(f"{len(result)} boundary polylines from {grid.size} samples")
    return result
