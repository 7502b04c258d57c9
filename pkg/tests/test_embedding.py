import math

import numpy as np
import pytest
from scipy.spatial import Delaunay

from fractalforms.embedding import build_chart, cell_frame, cell_frames, extension_matrices, phi_of_lattice
from fractalforms.gasket import addresses, build_level_graph
from oracles import harmonic_solve

S3 = math.sqrt(3)


def test_matrix_examples():
    A = extension_matrices()
    np.testing.assert_allclose(A[0], [[1, 0, 0], [0.4, 0.4, 0.2], [0.4, 0.2, 0.4]])
    for Ai in A:
        np.testing.assert_allclose(Ai @ np.full(3, 2.5), 2.5)
        assert np.all(Ai >= 0)
    np.testing.assert_allclose(sorted(np.linalg.eigvals(A[0]).real), [0.2, 0.6, 1.0], atol=1e-14)


def test_cell_frame_examples():
    np.testing.assert_allclose(cell_frame(""), [[0, 0], [1, 0], [0.5, S3 / 2]], atol=1e-15)
    np.testing.assert_allclose(cell_frame("0"), [[0, 0], [0.5, S3 / 10], [0.4, S3 / 5]], atol=1e-15)


def test_diameter_ratio_tends_to_three_fifths():
    diam = [np.max(np.linalg.norm(cell_frame("0" * k)[:, None] - cell_frame("0" * k)[None], axis=-1)) for k in range(12)]
    ratios = np.array(diam[1:]) / np.array(diam[:-1])
    assert abs(ratios[-1] - 0.6) < 1e-3
    assert np.allclose(cell_frame("0" * 11)[0], 0)


def test_chart_small_levels():
    np.testing.assert_allclose(build_chart(0).points, [[0, 0], [1, 0], [0.5, S3 / 2]], atol=1e-15)
    c1 = build_chart(1)
    tri = Delaunay(build_chart(0).points)
    mids = c1.points[3:]
    assert len(c1.points) == 6 and np.all(tri.find_simplex(mids) >= 0)
    c2 = build_chart(2)
    assert len(c2.points) == 15
    np.testing.assert_allclose(c2.images(list(c2.graph.vertices()))[c2.graph.cells[1]], cell_frame("01"), atol=1e-15)


@pytest.mark.parametrize("m", range(0, 6))
def test_frames_consistent_with_chart(m):
    chart = build_chart(m)
    np.testing.assert_allclose(chart.frames(), cell_frames(m), atol=1e-14)
    for k, w in enumerate(addresses(m)[:50]):
        np.testing.assert_allclose(cell_frame(w), chart.frames()[k], atol=1e-14)


def test_chart_matches_laplacian_oracle():
    m = 4
    pts, v1, _ = harmonic_solve(m, (0, 1, 0.5))
    _, v2, _ = harmonic_solve(m, (0, 0, S3 / 2))
    chart = build_chart(m)
    ids = [int(np.argmin(np.linalg.norm(chart.graph.points - p, axis=1))) for p in pts]
    np.testing.assert_allclose(chart.points[ids], np.column_stack([v1, v2]), atol=1e-12)


@pytest.mark.parametrize("m", range(0, 7))
def test_injective(m):
    p = build_chart(m).points
    assert len(np.unique(np.round(p, 12), axis=0)) == len(p)


def test_frame_nesting():
    for w in addresses(3):
        outer = Delaunay(cell_frame(w))
        for i in "012":
            inner = cell_frame(w + i)
            assert np.all(outer.find_simplex(inner, tol=1e-12) >= 0)


def test_phi_of_lattice_agrees_with_chart():
    g = build_level_graph(5)
    np.testing.assert_allclose(phi_of_lattice(g.keys, 5), build_chart(5).points, atol=1e-15)
