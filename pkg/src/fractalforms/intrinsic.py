"""Estimates of the intrinsic metric of the Kusuoka measure.

``rho(x, y) = sup{f(x) - f(y) : |grad f|_Z <= 1 almost everywhere}``.  At level
``m`` the competitors are vertex potentials affine on each ``Phi``-image cell
triangle.  For such ``f`` with constant gradient ``g_w`` on cell ``w``

    g_w^T Z(w) g_w = (5/3)**m * E0(f|_w) / nu(K_w),

so the per-cell constraint only involves the corner values.  Writing
``E0(u) = 3 |E u|**2`` with an orthonormal basis ``E`` of the sum-zero plane,
each constraint is a disk ``|E u| <= r_w``.  Replacing the disks by
circumscribed regular ``K``-gons gives a linear program whose value ``V``
satisfies ``cos(pi/K) V <= value <= V``; both ends are reported.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .energy import RENORMALIZATION
from .errors import SolverError
from .gasket import DEFAULT_MAX_LEVEL, Vertex, build_level_graph, check_level
from .paths import EdgePath
from .zfield import kusuoka_table

POLYGON_SIDES = 48

# orthonormal basis of {u : u0 + u1 + u2 = 0}
_E = np.array([[1.0, -1.0, 0.0], [1.0, 1.0, -2.0]]) / np.array([[math.sqrt(2.0)], [math.sqrt(6.0)]])


@dataclass(frozen=True)
class MetricEstimate:
    lower: float
    upper: float
    level: int

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise ValueError(f"lower estimate {self.lower} exceeds upper {self.upper}")

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def to_json(self) -> dict:
        return {"level": self.level, "lower": self.lower, "upper": self.upper}


@functools.lru_cache(maxsize=8)
def _constraints(m: int, sides: int):
    g = build_level_graph(m, max_level=m)
    theta = 2 * np.pi * np.arange(sides) / sides
    rows = np.column_stack([np.cos(theta), np.sin(theta)]) @ _E  # (sides, 3)
    nu = kusuoka_table(m, max_level=m).values
    r = np.sqrt(nu / (3.0 * RENORMALIZATION**m))
    n_cells = g.n_cells
    row_ids = np.repeat(np.arange(n_cells * sides), 3)
    col_ids = np.repeat(g.cells, sides, axis=0).reshape(-1)
    data = np.tile(rows.reshape(-1), n_cells)
    A = coo_matrix((data, (row_ids, col_ids)), shape=(n_cells * sides, g.n_vertices)).tocsr()
    return A, np.repeat(r, sides)


def intrinsic_metric(
    x: Vertex, y: Vertex, m: int, sides: int = POLYGON_SIDES, max_level: int = DEFAULT_MAX_LEVEL
) -> MetricEstimate:
    """Bracket the level-``m`` affine-per-cell program for ``rho(x, y)``."""
    m = check_level(m, max_level)
    g = build_level_graph(m, max_level)
    ix, iy = g.index_of(x), g.index_of(y)
    if ix == iy:
        return MetricEstimate(0.0, 0.0, m)
    A, b = _constraints(m, sides)
    c = np.zeros(g.n_vertices)
    c[ix] = -1.0
    bounds = [(None, None)] * g.n_vertices
    bounds[iy] = (0.0, 0.0)
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        best = -float(res.fun) if res.fun is not None else None
        raise SolverError(f"intrinsic metric program failed: {res.message}", best)
    upper = -float(res.fun)
    return MetricEstimate(math.cos(math.pi / sides) * upper, upper, m)


def intrinsic_lower_bound(x: Vertex, y: Vertex, m: int, **kwargs) -> float:
    """Value of a feasible potential of the level-``m`` program (within ``cos(pi/K)`` of optimal)."""
    return intrinsic_metric(x, y, m, **kwargs).lower


def mu_length(p: EdgePath, m: int | None = None, **kwargs) -> float:
    """Sum of intrinsic estimates between consecutive path vertices at level ``m``."""
    m = p.level if m is None else m
    vs = p.vertices
    return float(sum(intrinsic_lower_bound(a, b, m, **kwargs) for a, b in zip(vs[:-1], vs[1:])))
