import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalforms.errors import DomainError, ResourceLimitError
from fractalforms.energy import (
    base_energy,
    extend_to_level,
    extension_matrices,
    graph_energy,
    harmonic_extend,
)
from fractalforms.gasket import Vertex, build_level_graph
from oracles import harmonic_solve, midpoint_minimizer

finite = st.floats(-1e3, 1e3, allow_nan=False)
triples = st.tuples(finite, finite, finite)


def test_base_energy_examples():
    assert base_energy((0, 0, 1)) == 2
    assert base_energy((3.5, 3.5, 3.5)) == 0
    assert base_energy((0, 1, 0.5), (0, 0, math.sqrt(3) / 2)) == pytest.approx(0.0, abs=1e-15)


@given(triples, triples, triples, finite)
def test_base_energy_bilinear_symmetric(u, v, w, a):
    assert base_energy(u, v) == pytest.approx(base_energy(v, u), rel=1e-12, abs=1e-9)
    uw = tuple(x + a * y for x, y in zip(u, w))
    lhs = base_energy(uw, v)
    rhs = base_energy(u, v) + a * base_energy(w, v)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-6 * (1 + abs(a)) * 1e3)
    assert base_energy(u) >= 0


@pytest.mark.parametrize("u", [(1, 0, 0), (0, 1, 0.5), (0.3, -2.0, 7.0)])
def test_harmonic_extend_minimizes_level1_energy(u):
    ext = harmonic_extend(u)
    np.testing.assert_allclose(ext[:3], u)
    np.testing.assert_allclose(ext[3:], midpoint_minimizer(u), atol=1e-15)


def test_harmonic_extend_examples():
    np.testing.assert_allclose(harmonic_extend((1, 0, 0))[3:], (1 / 5, 2 / 5, 2 / 5))
    np.testing.assert_allclose(harmonic_extend((2, 2, 2)), 2.0)
    np.testing.assert_allclose(harmonic_extend((0, 1, 0.5))[3:], (3 / 5, 2 / 5, 1 / 2))


def test_extension_matrices_exact():
    A = extension_matrices(exact=True)
    F = Fraction
    assert A[0] == [[1, 0, 0], [F(2, 5), F(2, 5), F(1, 5)], [F(2, 5), F(1, 5), F(2, 5)]]
    for Ai in A:
        assert all(sum(row) == 1 for row in Ai)


def test_extend_to_level_examples():
    f0 = extend_to_level((0.2, 0.5, 0.9), 0)
    np.testing.assert_array_equal(f0.values, (0.2, 0.5, 0.9))
    f2 = extend_to_level((1, 0, 0), 2)
    assert len(f2.values) == 15 and f2.residual < 1e-15
    f1 = extend_to_level((0, 1, 0.5), 1)
    g = build_level_graph(1)
    assert f1(Vertex.from_address("12")) == pytest.approx(3 / 5)  # opposite corner 0
    assert f1(Vertex.from_address("02")) == pytest.approx(2 / 5)
    assert f1(Vertex.from_address("01")) == pytest.approx(1 / 2)
    assert g.n_vertices == 6


@pytest.mark.parametrize("m", [2, 4, 5])
def test_extend_matches_laplacian_solve(m):
    u = (0.3, -1.2, 2.5)
    pts, vals, _ = harmonic_solve(m, u)
    f = extend_to_level(u, m)
    gp = f.graph.points
    ids = [int(np.argmin(np.linalg.norm(gp - p, axis=1))) for p in pts]
    np.testing.assert_allclose(f.values[ids], vals, atol=1e-12)


def test_graph_energy_examples():
    assert graph_energy(np.full(15, 4.0), 2) == 0
    assert graph_energy(extend_to_level((0, 0, 1), 1)) == pytest.approx(2, rel=1e-14)
    assert graph_energy(extend_to_level((0, 0, 1), 4), 4) == pytest.approx(2, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(triples, st.integers(0, 8))
def test_energy_invariance(u, m):
    e0 = base_energy(u)
    e = graph_energy(extend_to_level(u, m))
    assert e == pytest.approx(e0, rel=1e-12, abs=1e-9)


def test_markov_clamping(rng):
    for m in range(1, 5):
        n = build_level_graph(m).n_vertices
        for _ in range(20):
            f = rng.normal(0.5, 1.0, size=n)
            assert graph_energy(np.clip(f, 0, 1), m) <= graph_energy(f, m) + 1e-12


@given(triples)
def test_maximum_principle(u):
    f = extend_to_level(u, 4)
    assert min(u) - 1e-9 <= f.values.min() and f.values.max() <= max(u) + 1e-9


def test_graph_energy_inputs():
    g = build_level_graph(1)
    vals = {v: 1.0 for v in g.vertices()}
    assert graph_energy(vals, 1) == 0
    del vals[g.vertex(3)]
    with pytest.raises(DomainError):
        graph_energy(vals, 1)
    with pytest.raises(DomainError):
        graph_energy(np.zeros(5), 1)
    with pytest.raises(ResourceLimitError):
        extend_to_level((0, 0, 1), 13)
