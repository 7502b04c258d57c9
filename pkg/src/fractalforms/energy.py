"""Resistance form on the gasket: base energy, harmonic extension, graph energies."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError
from .gasket import DEFAULT_MAX_LEVEL, Address, LevelGraph, Vertex, _build_level_graph, check_level

#: Energy renormalization per level; harmonic extension preserves (5/3)**m * edge sums.
RENORMALIZATION = 5.0 / 3.0

BoundaryTriple = Sequence[float]

_PAIRS = ((0, 1), (0, 2), (1, 2))


def base_energy(u: BoundaryTriple, v: BoundaryTriple | None = None) -> float:
    """Polarized base form ``sum_{i<j} (u_i - u_j)(v_i - v_j)`` on a triangle."""
    if v is None:
        v = u
    return float(sum((u[i] - u[j]) * (v[i] - v[j]) for i, j in _PAIRS))


def _extension_rows(i: int) -> list[list[Fraction]]:
    # Corner i is kept; corner j of the sub-cell is the midpoint of q_i q_j,
    # which takes 2/5 from each endpoint and 1/5 from the opposite corner.
    rows = []
    for j in range(3):
        row = [Fraction(0)] * 3
        if j == i:
            row[i] = Fraction(1)
        else:
            k = 3 - i - j
            row[i] = row[j] = Fraction(2, 5)
            row[k] = Fraction(1, 5)
        rows.append(row)
    return rows


def extension_matrices(exact: bool = False):
    """Harmonic extension matrices ``(A_0, A_1, A_2)``.

    ``A_i @ u`` is the boundary triple, on sub-cell ``i``, of the harmonic
    function with boundary triple ``u``.  With ``exact=True`` the matrices are
    nested lists of :class:`fractions.Fraction`; otherwise a ``(3, 3, 3)`` float
    array.
    """
    mats = [_extension_rows(i) for i in range(3)]
    if exact:
        return tuple(mats)
    return np.array([[[float(x) for x in row] for row in m] for m in mats])


EXTENSION = extension_matrices()
EXTENSION.setflags(write=False)


def harmonic_extend(u: BoundaryTriple) -> np.ndarray:
    """Values on the six level-1 vertices: ``(u0, u1, u2, m0, m1, m2)``.

    ``m_k`` is the value at the midpoint of the edge opposite corner ``k``.
    """
    u0, u1, u2 = (float(x) for x in u)
    return np.array(
        [
            u0,
            u1,
            u2,
            (2 * u1 + 2 * u2 + u0) / 5,
            (2 * u0 + 2 * u2 + u1) / 5,
            (2 * u0 + 2 * u1 + u2) / 5,
        ]
    )


def cell_triples(u: np.ndarray, m: int) -> np.ndarray:
    """Boundary triples on every level-``m`` cell of the harmonic function with boundary ``u``.

    ``u`` has shape ``(3,)`` or ``(3, d)`` for ``d`` functions at once; the
    result has shape ``(3**m, 3)`` or ``(3**m, 3, d)``.
    """
    t = np.asarray(u, dtype=float)
    squeeze = t.ndim == 1
    t = t.reshape(1, 3, -1)
    for _ in range(m):
        t = np.einsum("ijk,ckd->cijd", EXTENSION, t).reshape(-1, 3, t.shape[-1])
    return t[..., 0] if squeeze else t


def harmonic_residual(triples: np.ndarray) -> float:
    """Largest violation of the extension rule over all levels, given finest-level cell triples."""
    t = np.asarray(triples, dtype=float)
    worst = 0.0
    while len(t) > 1:
        parents = t.reshape(-1, 3, 3)
        # corner i of parent cell c is corner i of child 3c+i
        p = parents[:, [0, 1, 2], [0, 1, 2]]
        predicted = np.einsum("ijk,ck->cij", EXTENSION, p)
        worst = max(worst, float(np.max(np.abs(predicted - parents))))
        t = p
    return worst


@dataclass(frozen=True, eq=False)
class PiecewiseHarmonic:
    """A function on the level-``m`` vertices, indexed like ``graph`` vertices."""

    level: int
    values: np.ndarray
    boundary: tuple[float, float, float]
    graph: LevelGraph = field(repr=False)

    def __call__(self, v: Vertex) -> float:
        return float(self.values[self.graph.index_of(v)])

    def triples(self) -> np.ndarray:
        return self.values[self.graph.cells]

    def cell_triple(self, w: Address) -> np.ndarray:
        return self.values[list(self.graph.cell_corner_ids(w))]

    @functools.cached_property
    def residual(self) -> float:
        return harmonic_residual(self.triples())

    def is_harmonic(self, tol: float = 1e-9) -> bool:
        return self.residual <= tol


def extend_to_level(u: BoundaryTriple, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> PiecewiseHarmonic:
    """The harmonic function on ``V_m`` with boundary triple ``u``."""
    m = check_level(m, max_level)
    u = tuple(float(x) for x in u)
    if len(u) != 3 or not np.all(np.isfinite(u)):
        raise DomainError("boundary triple must be three finite reals")
    g = _build_level_graph(m)
    values = np.empty(g.n_vertices)
    triples = cell_triples(np.array(u), m)
    values[g.cells] = triples
    values.setflags(write=False)
    return PiecewiseHarmonic(level=m, values=values, boundary=u, graph=g)


def vertex_values(f, g: LevelGraph) -> np.ndarray:
    """Coerce ``f`` (array, mapping from :class:`Vertex`, or PiecewiseHarmonic) to an id-indexed array."""
    if isinstance(f, PiecewiseHarmonic):
        if f.level != g.level:
            raise DomainError(f"function lives on level {f.level}, expected {g.level}")
        return np.asarray(f.values)
    if isinstance(f, Mapping):
        vals = np.empty(g.n_vertices)
        for i, v in enumerate(g.vertices()):
            if v not in f:
                raise DomainError(f"missing value at vertex {v}")
            vals[i] = f[v]
        return vals
    vals = np.asarray(f, dtype=float)
    if vals.shape != (g.n_vertices,):
        raise DomainError(f"expected {g.n_vertices} vertex values, got shape {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise DomainError("vertex values must be finite")
    return vals


def graph_energy(f, m: int | None = None, max_level: int = DEFAULT_MAX_LEVEL) -> float:
    """Renormalized energy ``(5/3)**m * sum over level-m edges of (f(p) - f(q))**2``."""
    if m is None:
        if not isinstance(f, PiecewiseHarmonic):
            raise DomainError("level is required unless f is a PiecewiseHarmonic")
        m = f.level
    g = _build_level_graph(check_level(m, max_level))
    vals = vertex_values(f, g)
    diff = vals[g.edges[:, 0]] - vals[g.edges[:, 1]]
    return float(RENORMALIZATION**m * np.dot(diff, diff))
