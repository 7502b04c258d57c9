"""Edge paths in the gasket and line integrals of one-forms along their images.

An edge path is a chain of level-``m`` vertices joined by graph edges.  Every
graph edge is a genuine segment of the gasket, so the path lies in the set
exactly; refining it subdivides each segment dyadically without changing the
trace.  Line integrals are midpoint Riemann sums over the ``Phi``-image of the
refined polyline.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .cotangent import Form1, ScalarField
from .embedding import HarmonicChart, phi_of_lattice
from .errors import DomainError
from .gasket import DEFAULT_MAX_LEVEL, Vertex, adjacent, build_level_graph, check_level

NAMED_PATHS = {
    "bottom": ("0", "1"),
    "left": ("0", "2"),
    "right": ("1", "2"),
}


@dataclass(frozen=True, eq=False)
class EdgePath:
    """Vertices of a level-``level`` edge path as lattice points at denominator ``2**level``."""

    level: int
    lattice: np.ndarray = field(repr=False)

    def __post_init__(self):
        lat = np.asarray(self.lattice, dtype=np.int64).reshape(-1, 2)
        if len(lat) == 0:
            raise DomainError("an edge path needs at least one vertex")
        if len(lat) > 1:
            ok = adjacent(lat[:-1], lat[1:], self.level)
            if not np.all(ok):
                bad = int(np.argmin(ok))
                raise DomainError(f"vertices {bad} and {bad + 1} of the path are not adjacent at level {self.level}")
        lat.setflags(write=False)
        object.__setattr__(self, "lattice", lat)

    @classmethod
    def from_vertices(cls, vertices: Iterable[Vertex], level: int | None = None) -> "EdgePath":
        vs = list(vertices)
        if not vs:
            raise DomainError("an edge path needs at least one vertex")
        if level is None:
            level = max(v.k for v in vs)
        return cls(level, np.array([v.lattice(level) for v in vs]))

    @classmethod
    def from_spec(cls, spec: str) -> "EdgePath":
        """``bottom``, ``left``, ``right`` or a comma list of vertex addresses such as ``0,01,1``."""
        spec = spec.strip()
        tokens = NAMED_PATHS.get(spec) or tuple(t.strip() for t in spec.split(","))
        return cls.from_vertices(Vertex.from_address(t) for t in tokens)

    def __len__(self) -> int:
        return len(self.lattice)

    @property
    def n_edges(self) -> int:
        return len(self.lattice) - 1

    @property
    def vertices(self) -> list[Vertex]:
        return [Vertex.from_lattice(a, b, self.level) for a, b in self.lattice]

    @property
    def start(self) -> Vertex:
        return Vertex.from_lattice(*self.lattice[0], self.level)

    @property
    def end(self) -> Vertex:
        return Vertex.from_lattice(*self.lattice[-1], self.level)

    def at_level(self, level: int) -> "EdgePath":
        """The same vertex chain listed at a finer level (no subdivision)."""
        if level < self.level:
            raise DomainError("cannot express a path at a coarser level")
        if level == self.level:
            return self
        # consecutive vertices are no longer adjacent, so bypass validation
        out = object.__new__(EdgePath)
        object.__setattr__(out, "level", level)
        object.__setattr__(out, "lattice", self.lattice * 2 ** (level - self.level))
        return out

    def reversed(self) -> "EdgePath":
        return EdgePath(self.level, self.lattice[::-1])

    def __add__(self, other: "EdgePath") -> "EdgePath":
        level = max(self.level, other.level)
        a = refine_path(self, level - self.level)
        b = refine_path(other, level - other.level)
        if not np.array_equal(a.lattice[-1], b.lattice[0]):
            raise DomainError("paths can only be concatenated end to start")
        return EdgePath(level, np.concatenate([a.lattice, b.lattice[1:]]))

    def spec(self) -> str:
        return ",".join(str(v) for v in self.vertices)


def refine_path(p: EdgePath, k: int, max_level: int = DEFAULT_MAX_LEVEL) -> EdgePath:
    """Replace each edge by its ``2**k`` collinear sub-edges at level ``level + k``."""
    if k < 0:
        raise DomainError("refinement must be nonnegative")
    if k == 0:
        return p
    check_level(p.level + k, max_level)
    n = 2**k
    lat = p.lattice * n
    if len(lat) == 1:
        return EdgePath(p.level + k, lat)
    t = np.arange(n)[None, :, None]
    pts = lat[:-1, None, :] + (lat[1:] - lat[:-1])[:, None, :] // n * t
    pts = np.concatenate([pts.reshape(-1, 2), lat[-1:]])
    out = object.__new__(EdgePath)
    object.__setattr__(out, "level", p.level + k)
    pts.setflags(write=False)
    object.__setattr__(out, "lattice", pts)
    return out


def path_images(p: EdgePath, chart: HarmonicChart | None = None) -> np.ndarray:
    """``Phi`` at the path vertices, shape ``(n, 2)``."""
    if chart is None:
        return phi_of_lattice(p.lattice, p.level)
    if chart.level < p.level:
        raise DomainError(f"chart level {chart.level} is coarser than the path level {p.level}")
    return chart.points[chart.graph.lookup(p.lattice * 2 ** (chart.level - p.level))]


@dataclass(frozen=True)
class PathIntegralResult:
    value: float
    refinement_level: int
    estimated_error: float

    def to_json(self) -> dict:
        err = self.estimated_error if math.isfinite(self.estimated_error) else None
        return {"integral": self.value, "refinement": self.refinement_level, "estimated_error": err}


def riemann_sum(omega: Form1, points: np.ndarray) -> float:
    """Midpoint rule ``sum omega(mid) . (b - a)`` over a polyline.

    The terms are summed with ``math.fsum``, which is order independent, so
    reversing the polyline negates the result exactly.
    """
    if len(points) < 2:
        return 0.0
    delta = np.diff(points, axis=0)
    mids = 0.5 * (points[:-1] + points[1:])
    terms = omega.at(mids) * delta
    return math.fsum(terms.sum(axis=1).tolist())


def integrate_form(
    omega: Form1,
    p: EdgePath,
    k: int,
    chart: HarmonicChart | None = None,
    max_level: int = DEFAULT_MAX_LEVEL,
) -> PathIntegralResult:
    """Line integral of ``omega`` along ``Phi o p`` after ``k`` refinements.

    ``estimated_error`` is the change from ``k - 1`` refinements (infinite at ``k = 0``).
    """
    value = riemann_sum(omega, path_images(refine_path(p, k, max_level), chart))
    if k == 0:
        return PathIntegralResult(value, 0, math.inf)
    coarse = riemann_sum(omega, path_images(refine_path(p, k - 1, max_level), chart))
    return PathIntegralResult(value, k, abs(value - coarse))


def integrate_exact(F: ScalarField, p: EdgePath, k: int, **kwargs) -> PathIntegralResult:
    return integrate_form(Form1.exact(F), p, k, **kwargs)


def endpoint_difference(F: ScalarField, p: EdgePath) -> float:
    """``F(Phi(end)) - F(Phi(start))``, the exact value of the integral of ``dF``."""
    ends = phi_of_lattice(p.lattice[[0, -1]], p.level)
    v = F.value(ends)
    return float(v[1] - v[0])


def euclidean_length(p: EdgePath, k: int = 0, chart: HarmonicChart | None = None, max_level: int = DEFAULT_MAX_LEVEL) -> float:
    """Length of the inscribed polyline through ``Phi`` of the refined path; nondecreasing in ``k``."""
    pts = path_images(refine_path(p, k, max_level), chart)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


@functools.lru_cache(maxsize=16)
def _bfs_tree(level: int, root: int) -> np.ndarray:
    g = build_level_graph(level, max_level=level)
    n = g.n_vertices
    e = g.edges
    adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()
    _, pred = breadth_first_order(adj, root, directed=False, return_predecessors=True)
    return pred


def path_between(u: Vertex, v: Vertex, level: int, max_level: int = DEFAULT_MAX_LEVEL) -> EdgePath:
    """A shortest (fewest edges) level-``level`` edge path from ``u`` to ``v``."""
    g = build_level_graph(level, max_level)
    src, dst = g.index_of(u), g.index_of(v)
    pred = _bfs_tree(level, dst)
    chain = [src]
    while chain[-1] != dst:
        chain.append(int(pred[chain[-1]]))
    return EdgePath(level, g.keys[chain])


def potential_from_form(
    omega: Form1,
    level: int,
    k: int,
    base: Vertex = Vertex(0, 0, 0),
    base_value: float = 0.0,
    max_level: int = DEFAULT_MAX_LEVEL,
) -> np.ndarray:
    """``g(x) = base_value + integral of omega along a tree path from base to x``.

    Evaluated at every level-``level`` vertex (graph order); each tree edge is
    integrated once with ``k`` refinements.
    """
    g = build_level_graph(level, max_level)
    root = g.index_of(base)
    pred = _bfs_tree(level, root)
    order, _ = breadth_first_order(
        coo_matrix((np.ones(len(g.edges)), (g.edges[:, 0], g.edges[:, 1])), shape=(g.n_vertices,) * 2).tocsr(),
        root,
        directed=False,
        return_predecessors=True,
    )
    children = order[1:]
    parents = pred[children]
    # all tree edges refined at once: (edges, 2**k + 1) chain of points
    n = 2**k
    check_level(level + k, max_level)
    a = g.keys[parents] * n
    b = g.keys[children] * n
    t = np.arange(n + 1)[None, :, None]
    pts = a[:, None, :] + (b - a)[:, None, :] // n * t
    img = phi_of_lattice(pts.reshape(-1, 2), level + k).reshape(len(children), n + 1, 2)
    delta = np.diff(img, axis=1)
    mids = 0.5 * (img[:, :-1] + img[:, 1:])
    edge_int = np.sum(omega.at(mids) * delta, axis=(1, 2))
    out = np.empty(g.n_vertices)
    out[root] = base_value
    for c, p_, val in zip(children, parents, edge_int):
        out[c] = out[p_] + val
    return out
