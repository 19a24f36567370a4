"""ASCII grid maps and the byte-grid observation encoding.

Map files start with a ``width height`` line followed by ``height`` rows of
``width`` characters:

    #  wall            .  empty           S  agent start
    g  green victim    y  yellow victim   F  fire spawn region
    1 2 3  equipment (Fireman) or landmark (Cooperative Navigation)
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

WALL, EMPTY, GREEN, YELLOW, START, FIRE_REGION = "#", ".", "g", "y", "S", "F"
ITEMS = ("1", "2", "3")
VOCABULARY = frozenset((WALL, EMPTY, GREEN, YELLOW, START, FIRE_REGION) + ITEMS)

# (dx, dy) for left, right, up, down
MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))
LEFT, RIGHT, UP, DOWN = range(4)
ACTIONS = (LEFT, RIGHT, UP, DOWN)

# pixel codes
MINIMAP_CODES = {"agent": 240, "yellow": 150, "green": 200, "wall": 100}
FIREMAN_CODES = {"agents": (240, 200), "fire": 55, "items": (40, 50, 60), "wall": 100}
COOPNAV_CODES = {"agents": (240, 200, 150), "landmarks": (40, 50, 60)}


class MapFormatError(ValueError):
    pass


@dataclass
class GridMap:
    width: int
    height: int
    cells: np.ndarray  # (height, width) array of single-character strings

    def positions(self, symbol: str) -> list[tuple[int, int]]:
        ys, xs = np.nonzero(self.cells == symbol)
        return [(int(x), int(y)) for y, x in zip(ys, xs)]

    def count(self, symbol: str) -> int:
        return int(np.sum(self.cells == symbol))

    def is_wall(self, x: int, y: int) -> bool:
        return not (0 <= x < self.width and 0 <= y < self.height) or self.cells[y, x] == WALL

    @property
    def walls(self) -> np.ndarray:
        return self.cells == WALL


def parse_map(text: str) -> GridMap:
    lines = [ln.rstrip("\n") for ln in text.strip("\n").splitlines()]
    if not lines:
        raise MapFormatError("empty map")
    try:
        width, height = (int(v) for v in lines[0].split())
    except ValueError:
        raise MapFormatError(f"bad header {lines[0]!r}; expected 'width height'") from None
    rows = lines[1:]
    if len(rows) != height:
        raise MapFormatError(f"expected {height} rows, found {len(rows)}")
    for i, row in enumerate(rows):
        if len(row) != width:
            raise MapFormatError(f"row {i} has {len(row)} cells, expected {width}")
        bad = set(row) - VOCABULARY
        if bad:
            raise MapFormatError(f"row {i} has unknown symbols {sorted(bad)}")
    cells = np.array([list(row) for row in rows], dtype="<U1")
    return GridMap(width, height, cells)


def load_map(path: str | Path | None = None, default: str | None = None) -> GridMap:
    if path is not None:
        return parse_map(Path(path).read_text())
    return parse_map(resources.files("fastibl.data").joinpath(default).read_text())


def format_map(grid: GridMap) -> str:
    rows = ["".join(r) for r in grid.cells]
    return f"{grid.width} {grid.height}\n" + "\n".join(rows) + "\n"


def encode_grid_observation(task: str, grid: GridMap, positions, *, victims=None,
                            fire=None, items=None, landmarks=None, viewer: int | None = None
                            ) -> np.ndarray:
    """Full byte-grid encoding of a task state, indexed ``[y, x]``.

    ``positions`` lists agent coordinates in agent order.  For Fireman,
    ``viewer`` selects whose observation to build; the other agent is
    left out of it.
    """
    obs = np.zeros((grid.height, grid.width), dtype=np.uint8)
    if task == "minimap":
        obs[grid.walls] = MINIMAP_CODES["wall"]
        for (x, y), kind in (victims or {}).items():
            obs[y, x] = MINIMAP_CODES["yellow" if kind == YELLOW else "green"]
        x, y = positions[0]
        obs[y, x] = MINIMAP_CODES["agent"]
    elif task == "fireman":
        obs[grid.walls] = FIREMAN_CODES["wall"]
        for code, cells in zip(FIREMAN_CODES["items"], items or ()):
            for x, y in cells:
                obs[y, x] = code
        if fire is not None:
            obs[fire[1], fire[0]] = FIREMAN_CODES["fire"]
        who = range(len(positions)) if viewer is None else (viewer,)
        for i in who:
            x, y = positions[i]
            obs[y, x] = FIREMAN_CODES["agents"][i]
    elif task == "coopnav":
        obs[grid.walls] = 100
        for code, (x, y) in zip(COOPNAV_CODES["landmarks"], landmarks or ()):
            obs[y, x] = code
        for i in reversed(range(len(positions))):
            x, y = positions[i]
            obs[y, x] = COOPNAV_CODES["agents"][i]
    else:
        raise ValueError(f"no grid encoding for task {task!r}")
    return obs


def move(grid: GridMap, pos: tuple[int, int], action: int) -> tuple[tuple[int, int], bool]:
    """Target of ``action`` from ``pos``; returns (new position, blocked)."""
    dx, dy = MOVES[action]
    x, y = pos[0] + dx, pos[1] + dy
    if grid.is_wall(x, y):
        return pos, True
    return (x, y), False
