"""Harmonic coordinates ``Phi = (phi1, phi2)`` and the harmonic gasket ``Phi(SG)``.

The boundary values are chosen so that ``Phi`` fixes the three outer corners
of the standard triangle: ``phi1 = (0, 1, 1/2)`` and ``phi2 = (0, 0, sqrt(3)/2)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .energy import EXTENSION, PiecewiseHarmonic, cell_triples, extend_to_level, extension_matrices
from .gasket import (
    DEFAULT_MAX_LEVEL,
    SQRT3_2,
    Address,
    LevelGraph,
    Vertex,
    addresses,
    check_level,
    locate,
    validate_address,
)

__all__ = [
    "PHI1_BOUNDARY",
    "PHI2_BOUNDARY",
    "HarmonicChart",
    "build_chart",
    "cell_frame",
    "cell_frames",
    "extension_matrices",
    "phi_at",
    "phi_of_lattice",
]

PHI1_BOUNDARY = (0.0, 1.0, 0.5)
PHI2_BOUNDARY = (0.0, 0.0, SQRT3_2)

# Boundary triples of (phi1, phi2) stacked as corner points, shape (3, 2).
PHI_BOUNDARY = np.column_stack([PHI1_BOUNDARY, PHI2_BOUNDARY])


def cell_frame(w: Address) -> np.ndarray:
    """``Phi``-images of the corners of ``K_w`` as a ``(3, 2)`` array.

    The first letter's matrix is applied first: ``A_{w_n} ... A_{w_1} Phi|_boundary``.
    """
    t = PHI_BOUNDARY
    for letter in validate_address(w):
        t = EXTENSION[int(letter)] @ t
    return t


@functools.lru_cache(maxsize=16)
def _cell_frames(m: int) -> np.ndarray:
    frames = cell_triples(PHI_BOUNDARY, m)
    frames.setflags(write=False)
    return frames


def cell_frames(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> np.ndarray:
    """Frames of every level-``m`` cell in cell order, shape ``(3**m, 3, 2)``."""
    return _cell_frames(check_level(m, max_level))


def phi_of_lattice(lattice: np.ndarray, level: int) -> np.ndarray:
    """``Phi`` at level-``level`` vertices given as lattice coordinates, shape ``(n, 2)``.

    Works at any level without building the level graph: each point is
    located as ``F_w(q_i)`` and its image read off the frame of ``K_w``.
    """
    lattice = np.asarray(lattice, dtype=np.int64).reshape(-1, 2)
    words, corner = locate(lattice[:, 0], lattice[:, 1], level)
    t = np.broadcast_to(PHI_BOUNDARY, (len(lattice), 3, 2))
    for j in range(level):
        t = EXTENSION[words[:, j]] @ t
    return t[np.arange(len(lattice)), corner]


def phi_at(vertices: Iterable[Vertex]) -> np.ndarray:
    """``Phi`` at arbitrary gasket vertices, shape ``(n, 2)``."""
    vs = list(vertices)
    if not vs:
        return np.zeros((0, 2))
    level = max(v.k for v in vs)
    return phi_of_lattice(np.array([v.lattice(level) for v in vs]), level)


@dataclass(frozen=True, eq=False)
class HarmonicChart:
    """``Phi`` on every level-``m`` vertex; ``points[i] == (phi1[i], phi2[i])``."""

    level: int
    phi1: PiecewiseHarmonic
    phi2: PiecewiseHarmonic
    points: np.ndarray = field(repr=False)

    @property
    def graph(self) -> LevelGraph:
        return self.phi1.graph

    def __call__(self, v: Vertex) -> np.ndarray:
        return self.points[self.graph.index_of(v)]

    def images(self, vertices: Sequence[Vertex]) -> np.ndarray:
        return self.points[self.graph.indices_of(vertices)]

    def frames(self) -> np.ndarray:
        return self.points[self.graph.cells]

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "vertices": [
                {"id": i, "address": str(v), "x": float(p[0]), "y": float(p[1])}
                for i, (v, p) in enumerate(zip(self.graph.vertices(), self.points))
            ],
        }


def build_chart(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> HarmonicChart:
    m = check_level(m, max_level)
    phi1 = extend_to_level(PHI1_BOUNDARY, m, max_level)
    phi2 = extend_to_level(PHI2_BOUNDARY, m, max_level)
    points = np.column_stack([phi1.values, phi2.values])
    points.setflags(write=False)
    return HarmonicChart(level=m, phi1=phi1, phi2=phi2, points=points)


def frame_rows(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> list[list]:
    """Rows ``[w, x0, y0, x1, y1, x2, y2]`` for the level-``m`` cell frames."""
    frames = cell_frames(m, max_level)
    return [[w, *map(float, frames[c].reshape(-1))] for c, w in enumerate(addresses(m))]
