"""Combinatorics and geometry of the standard Sierpinski gasket.

Cells are addressed by words over ``{0, 1, 2}``; the cell ``K_w`` is the
image of the base triangle under ``F_{w_1} o ... o F_{w_n}`` with
``F_i(x) = (x + q_i) / 2``.  Vertices are stored exactly as integer lattice
points ``(a, b)`` meaning ``(a * q_1 + b * q_2) / 2**k``, so deduplication
never touches floating point.

Cell arrays are ordered by address read as a base-3 integer, first letter
most significant: cell ``c`` at level ``m`` has children ``3c, 3c+1, 3c+2``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ResourceLimitError

DEFAULT_MAX_LEVEL = 12

SQRT3_2 = math.sqrt(3.0) / 2.0

#: Euclidean corners q0, q1, q2 of the base triangle.
CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3_2]])

# Corners in lattice coordinates (coefficients of q1 and q2).
_LATTICE_CORNERS = np.array([[0, 0], [1, 0], [0, 1]], dtype=np.int64)

# Child i of a cell with lattice corners c (at denominator 2**k) has corner j
# equal to c_i + c_j at denominator 2**(k+1).
_LATTICE_MAPS = np.zeros((3, 3, 3), dtype=np.int64)
for _i in range(3):
    for _j in range(3):
        _LATTICE_MAPS[_i, _j, _i] += 1
        _LATTICE_MAPS[_i, _j, _j] += 1

# The three edges of a cell as corner-index pairs.
CELL_EDGES = ((0, 1), (1, 2), (0, 2))

Address = str


def check_level(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> int:
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise DomainError(f"level must be an integer, got {m!r}")
    if m < 0:
        raise DomainError(f"level must be nonnegative, got {m}")
    if m > max_level:
        raise ResourceLimitError(f"level {m} exceeds the configured maximum {max_level}")
    return int(m)


def validate_address(w: Address) -> Address:
    if not isinstance(w, str) or any(ch not in "012" for ch in w):
        raise DomainError(f"invalid cell address {w!r}; expected a word over 0, 1, 2")
    return w


def subcells(w: Address) -> tuple[Address, Address, Address]:
    validate_address(w)
    return (w + "0", w + "1", w + "2")


def address_index(w: Address) -> int:
    """Position of ``K_w`` in the level-``len(w)`` cell ordering."""
    validate_address(w)
    return int(w, 3) if w else 0


def address_from_index(index: int, level: int) -> Address:
    if level == 0:
        return ""
    return np.base_repr(index, 3).zfill(level)


def addresses(level: int) -> list[Address]:
    """All ``3**level`` addresses in cell order."""
    if level == 0:
        return [""]
    return ["".join(t) for t in itertools.product("012", repeat=level)]


def address_digits(level: int) -> np.ndarray:
    """``(3**level, level)`` array of address letters in cell order."""
    idx = np.arange(3**level)
    out = np.empty((3**level, level), dtype=np.int64)
    for j in range(level):
        out[:, level - 1 - j] = idx % 3
        idx = idx // 3
    return out


def cell_corner_lattice(level: int) -> np.ndarray:
    """Lattice corners of every level cell, shape ``(3**level, 3, 2)``, denominator ``2**level``."""
    corners = _LATTICE_CORNERS[None, :, :].copy()
    for _ in range(level):
        # (cells, child, corner, xy)
        corners = np.einsum("ijk,ckd->cijd", _LATTICE_MAPS, corners).reshape(-1, 3, 2)
    return corners


def word_corner_lattice(w: Address) -> np.ndarray:
    """Lattice corners of ``K_w`` at denominator ``2**len(w)``, shape ``(3, 2)``."""
    corners = _LATTICE_CORNERS.copy()
    for letter in validate_address(w):
        corners = _LATTICE_MAPS[int(letter)] @ corners
    return corners


def locate(a: np.ndarray, b: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Find, for lattice points at denominator ``2**level``, a cell word and corner.

    Returns ``(words, corner)`` with ``words`` of shape ``(n, level)`` such that
    each point equals ``F_word(q_corner)``.  Points shared by several cells are
    assigned to the lowest-lettered one.  Raises :class:`DomainError` for points
    that are not level vertices of the gasket.
    """
    words, corner, valid = locate_partial(a, b, level)
    if not np.all(valid):
        raise DomainError(f"point is not a level-{level} vertex of the gasket")
    return words, corner


def locate_partial(a, b, level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Like :func:`locate` but returns a validity mask instead of raising."""
    a = np.array(a, dtype=np.int64, copy=True).reshape(-1)
    b = np.array(b, dtype=np.int64, copy=True).reshape(-1)
    valid = (a >= 0) & (b >= 0) & (a + b <= 2**level)
    words = np.zeros((a.size, level), dtype=np.int64)
    for j in range(level):
        h = 2 ** (level - j - 1)
        in0 = a + b <= h
        in1 = ~in0 & (a >= h)
        in2 = ~in0 & ~in1 & (b >= h)
        valid &= in0 | in1 | in2
        letter = np.where(in0, 0, np.where(in1, 1, 2))
        a = a - np.where(in1, h, 0)
        b = b - np.where(in2, h, 0)
        words[:, j] = letter
    corner = np.where((a == 0) & (b == 0), 0, np.where(a == 1, 1, 2))
    return words, corner, valid


def word_corners(words: np.ndarray) -> np.ndarray:
    """Lattice corners for a batch of equal-length words, shape ``(n, 3, 2)``."""
    words = np.asarray(words, dtype=np.int64)
    corners = np.broadcast_to(_LATTICE_CORNERS, (len(words), 3, 2))
    for j in range(words.shape[1]):
        corners = _LATTICE_MAPS[words[:, j]] @ corners
    return corners


def adjacent(p: np.ndarray, q: np.ndarray, level: int) -> np.ndarray:
    """Whether lattice points ``p[k]`` and ``q[k]`` span an edge of the level graph."""
    p = np.asarray(p, dtype=np.int64).reshape(-1, 2)
    q = np.asarray(q, dtype=np.int64).reshape(-1, 2)
    d = q - p
    step = (np.abs(d).sum(axis=1) == 1) | ((d[:, 0] == -d[:, 1]) & (np.abs(d[:, 0]) == 1))
    out = np.zeros(len(p), dtype=bool)
    if not np.any(step):
        return out
    mid = (p + q)[step]
    # an edge midpoint is a level+1 vertex lying in exactly one level cell
    words, _, valid = locate_partial(mid[:, 0], mid[:, 1], level + 1)
    corners = word_corners(words[:, :level])
    ps, qs = p[step], q[step]
    has_p = np.any(np.all(corners == ps[:, None, :], axis=2), axis=1)
    has_q = np.any(np.all(corners == qs[:, None, :], axis=2), axis=1)
    out[step] = valid & has_p & has_q
    return out


@dataclass(frozen=True, order=True)
class Vertex:
    """A gasket vertex ``(a * q1 + b * q2) / 2**k`` in lowest terms.

    ``k`` is the coarsest level at which the point is a graph vertex, so the
    same point always has the same identity regardless of the graph it came
    from.
    """

    a: int
    b: int
    k: int

    def __post_init__(self):
        if self.k < 0 or self.a < 0 or self.b < 0 or self.a + self.b > 2**self.k:
            raise DomainError(f"lattice point {(self.a, self.b, self.k)} outside the base triangle")
        if self.k > 0 and self.a % 2 == 0 and self.b % 2 == 0:
            raise DomainError("Vertex must be given in lowest terms; use Vertex.from_lattice")

    @classmethod
    def from_lattice(cls, a: int, b: int, level: int) -> "Vertex":
        a, b, k = int(a), int(b), int(level)
        while k > 0 and a % 2 == 0 and b % 2 == 0:
            a //= 2
            b //= 2
            k -= 1
        v = cls(a, b, k)
        locate(np.array([a]), np.array([b]), k)  # membership check
        return v

    @classmethod
    def from_address(cls, s: str) -> "Vertex":
        """Parse ``w + i`` as the vertex ``F_w(q_i)``; e.g. ``"01"`` is the midpoint of q0 q1."""
        if not s:
            raise DomainError("vertex address must be nonempty")
        validate_address(s)
        corners = word_corner_lattice(s[:-1])
        a, b = corners[int(s[-1])]
        return cls.from_lattice(a, b, len(s) - 1)

    def lattice(self, level: int) -> tuple[int, int]:
        if level < self.k:
            raise DomainError(f"vertex first appears at level {self.k}, not a level-{level} vertex")
        s = 2 ** (level - self.k)
        return self.a * s, self.b * s

    @property
    def xy(self) -> tuple[float, float]:
        s = 2.0**-self.k
        return ((self.a + 0.5 * self.b) * s, self.b * SQRT3_2 * s)

    def address(self) -> str:
        words, corner = locate(np.array([self.a]), np.array([self.b]), self.k)
        return "".join(str(d) for d in words[0]) + str(int(corner[0]))

    def __str__(self) -> str:
        return self.address()


@dataclass(frozen=True, eq=False)
class LevelGraph:
    """The level-``m`` approximating graph of the gasket.

    ``keys`` holds lattice coordinates at denominator ``2**level``; vertex ids are
    row indices into ``keys``.  ``cells[c]`` lists the corner ids of cell ``c``
    with corner ``i`` equal to ``F_w(q_i)``, and ``edges[3c + e]`` is edge ``e``
    of cell ``c`` (see :data:`CELL_EDGES`).
    """

    level: int
    keys: np.ndarray
    cells: np.ndarray
    edges: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.keys)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @functools.cached_property
    def points(self) -> np.ndarray:
        s = 2.0**-self.level
        a, b = self.keys[:, 0], self.keys[:, 1]
        pts = np.column_stack([(a + 0.5 * b) * s, b * SQRT3_2 * s])
        pts.setflags(write=False)
        return pts

    @functools.cached_property
    def _sorted_codes(self) -> np.ndarray:
        return _codes(self.keys, self.level)

    def vertex(self, index: int) -> Vertex:
        a, b = self.keys[index]
        return Vertex.from_lattice(a, b, self.level)

    def vertices(self) -> list[Vertex]:
        return [self.vertex(i) for i in range(self.n_vertices)]

    def index_of(self, v: Vertex) -> int:
        return int(self.indices_of([v])[0])

    def indices_of(self, vs: Iterable[Vertex]) -> np.ndarray:
        pairs = [v.lattice(self.level) for v in vs]
        if not pairs:
            return np.zeros(0, dtype=np.int64)
        return self.lookup(np.array(pairs, dtype=np.int64))

    def lookup(self, lattice: np.ndarray) -> np.ndarray:
        """Vertex ids for an ``(n, 2)`` array of level lattice coordinates."""
        codes = _codes(lattice, self.level)
        pos = np.searchsorted(self._sorted_codes, codes)
        pos = np.clip(pos, 0, self.n_vertices - 1)
        if not np.array_equal(self._sorted_codes[pos], codes):
            raise DomainError(f"point is not a vertex of the level-{self.level} graph")
        return pos

    def cell_corner_ids(self, w: Address) -> tuple[int, int, int]:
        if len(validate_address(w)) > self.level:
            raise DomainError(f"address {w!r} is finer than graph level {self.level}")
        corners = word_corner_lattice(w) * 2 ** (self.level - len(w))
        return tuple(int(i) for i in self.lookup(corners))

    @functools.cached_property
    def _edge_codes(self) -> np.ndarray:
        e = np.sort(self.edges, axis=1)
        return np.sort(e[:, 0] * self.n_vertices + e[:, 1])

    def are_adjacent(self, i: int, j: int) -> bool:
        lo, hi = min(i, j), max(i, j)
        code = lo * self.n_vertices + hi
        pos = np.searchsorted(self._edge_codes, code)
        return bool(pos < len(self._edge_codes) and self._edge_codes[pos] == code)

    def to_json(self) -> dict:
        pts = self.points
        return {
            "level": self.level,
            "vertices": [
                {"id": i, "x": float(pts[i, 0]), "y": float(pts[i, 1])} for i in range(self.n_vertices)
            ],
            "edges": [[int(p), int(q)] for p, q in self.edges],
            "cells": {
                w: [int(i) for i in self.cells[c]] for c, w in enumerate(addresses(self.level))
            },
        }


def _codes(lattice: np.ndarray, level: int) -> np.ndarray:
    lattice = np.asarray(lattice, dtype=np.int64)
    return lattice[:, 1] * (2**level + 1) + lattice[:, 0]


@functools.lru_cache(maxsize=16)
def _build_level_graph(m: int) -> LevelGraph:
    corners = cell_corner_lattice(m)
    codes = _codes(corners.reshape(-1, 2), m)
    uniq, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    keys = corners.reshape(-1, 2)[first]
    cells = inverse.reshape(-1, 3).astype(np.int64)
    edges = np.stack([cells[:, list(pair)] for pair in CELL_EDGES], axis=1).reshape(-1, 2)
    for arr in (keys, cells, edges):
        arr.setflags(write=False)
    return LevelGraph(level=m, keys=keys, cells=cells, edges=edges)


def build_level_graph(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> LevelGraph:
    """Level-``m`` graph: ``3(3**m + 1)/2`` vertices, ``3**(m+1)`` edges, ``3**m`` cells."""
    return _build_level_graph(check_level(m, max_level))


def cell_boundary(g: LevelGraph, w: Address) -> tuple[Vertex, Vertex, Vertex]:
    """Corner vertices of ``K_w``; corner ``i`` is ``F_w(q_i)``."""
    return tuple(g.vertex(i) for i in g.cell_corner_ids(w))


def ifs_map(w: Address, points: Sequence[Sequence[float]]) -> np.ndarray:
    """Apply ``F_{w_1} o ... o F_{w_n}`` to Euclidean points."""
    pts = np.asarray(points, dtype=float)
    for letter in reversed(validate_address(w)):
        pts = (pts + CORNERS[int(letter)]) / 2.0
    return pts
