"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fractalforms.bridge import (  # noqa: E402
    SimpleTensorField,
    adjointness_residual,
    barycenters,
    composed_graph_energy,
    energy_report,
    z_seminorm_sq,
)
from fractalforms.cotangent import (  # noqa: E402
    ConstraintSet,
    Constant,
    Form1,
    OmegaElement,
    omega_norm,
    omega_product,
    quotient_norm,
    tangent_projection,
)
from fractalforms.energy import base_energy, extend_to_level, graph_energy  # noqa: E402
from fractalforms.expr import parse, random_expr  # noqa: E402
from fractalforms.gasket import Vertex, build_level_graph  # noqa: E402
from fractalforms.intrinsic import mu_length  # noqa: E402
from fractalforms.paths import (  # noqa: E402
    EdgePath,
    endpoint_difference,
    euclidean_length,
    integrate_exact,
    integrate_form,
    path_between,
    refine_path,
)
from fractalforms.zfield import c_z_bound, kusuoka_table, z_field, z_matrix  # noqa: E402
from oracles import central_gradient, edge_energy_in_cell  # noqa: E402

SEED = 20240611


# collected here and printed in the pytest terminal summary (see conftest.py)
REPORT_LINES: list[str] = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}"
    REPORT_LINES.append(line)
    print(line, flush=True)
    assert ok, detail


def criterion_1():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        u = rng.normal(size=3)
        e0 = base_energy(u)
        for m in range(1, 9):
            worst = max(worst, abs(graph_energy(extend_to_level(u, m)) - e0) / e0)
    report(1, "energy invariance", worst <= 1e-12, f"max relative error {worst:.2e} over 100 triples, m=1..8")


def criterion_2():
    totals = [abs(kusuoka_table(m).total() - 3) for m in range(9)]
    level1 = kusuoka_table(1).values
    # independent route: edge sums of Laplacian-solved coordinates at level 8
    s3 = math.sqrt(3) / 2
    edge = [
        edge_energy_in_cell(1, 8, (0, 1, 0.5), (0, 1, 0.5), w) + edge_energy_in_cell(1, 8, (0, 0, s3), (0, 0, s3), w)
        for w in "012"
    ]
    ok = max(totals) <= 1e-12 and np.allclose(level1, 1, atol=1e-12) and np.allclose(edge, 1, atol=1e-3)
    report(
        2,
        "Kusuoka bookkeeping",
        ok,
        f"max |total-3| {max(totals):.1e}; level-1 nu {np.round(level1, 14).tolist()}; edge-sum route {np.round(edge, 6).tolist()}",
    )


def criterion_3():
    count, worst_sym, min_eig, worst_trace, worst_mart = 0, 0.0, np.inf, 0.0, 0.0
    for m in range(9):
        zf = z_field(m)
        z = zf.matrices
        count += len(z)
        worst_sym = max(worst_sym, float(np.max(np.abs(z - np.swapaxes(z, 1, 2)))))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(z).min()))
        worst_trace = max(worst_trace, float(np.max(np.abs(np.trace(z, axis1=1, axis2=2) - 1))))
        if m:
            fine = zf.weighted().reshape(-1, 3, 2, 2).sum(axis=1)
            worst_mart = max(worst_mart, float(np.max(np.abs(fine - z_field(m - 1).weighted()))))
    s = math.sqrt(3) / 5
    z0 = float(np.max(np.abs(z_matrix("0").matrix - [[0.7, s], [s, 0.3]])))
    ok = count == 9841 and worst_sym == 0 and min_eig >= -1e-12 and max(worst_trace, worst_mart, z0) <= 1e-12
    report(
        3,
        "Z-field laws",
        ok,
        f"{count} matrices; min eig {min_eig:.2e}; trace err {worst_trace:.1e}; martingale err {worst_mart:.1e}; Z(0) err {z0:.1e}",
    )


def criterion_4():
    worst = 0.0
    for F in (parse("x"), parse("y"), parse("0.7*x - 1.9*y + 3")):
        for m in range(9):
            s = z_seminorm_sq(Form1.exact(F), m)
            worst = max(worst, abs(s - composed_graph_energy(F, m)) / composed_graph_energy(F, m))
    gaps = [energy_report(parse("x^2"), m)["relative_gap"] for m in (4, 6, 8)]
    ok = worst <= 1e-12 and gaps[2] < 0.02 and gaps[0] > gaps[1] > gaps[2]
    report(4, "seminorm/energy identity", ok, f"linear max rel err {worst:.1e}; x^2 gaps m=4,6,8: {[f'{g:.2e}' for g in gaps]}")


def _ftli_paths():
    return [EdgePath.from_spec(s) for s in ("bottom", "left", "right", "0,02,12,1")] + [
        path_between(Vertex.from_address("01"), Vertex.from_address("2"), 2)
    ]


def criterion_5():
    rng = np.random.default_rng(SEED)
    tail = 4
    worst_final, worst_ratio = 0.0, np.inf
    for _ in range(20):
        F = random_expr(rng, 3)
        for p in _ftli_paths():
            exact = endpoint_difference(F, p)
            K = 12 - p.level
            errs = [abs(integrate_exact(F, p, k).value - exact) for k in range(K - tail, K + 1)]
            # errors already at the rounding floor count as converged
            ratios = [a / b if b > 1e-12 else np.inf for a, b in zip(errs, errs[1:])]
            worst_ratio = min(worst_ratio, min(ratios))
            worst_final = max(worst_final, errs[-1])
    ok = worst_ratio >= 2 and worst_final <= 1e-6
    report(
        5,
        "line integrals of exact forms",
        ok,
        f"20 expressions x 5 paths; min error ratio over last {tail} doublings {worst_ratio:.2f}; max final error {worst_final:.1e}",
    )


def criterion_6():
    F = parse("exp(x*y) * sin(2*x + y) + cos(3*y)")
    a = EdgePath.from_spec("0,02,12,1")
    b = refine_path(EdgePath.from_spec("bottom"), 1)
    k = 10
    ra, rb = integrate_exact(F, a, k), integrate_exact(F, b, k)
    diff = abs(ra.value - rb.value)
    tol = ra.estimated_error + rb.estimated_error
    w = Form1((parse("y*cos(x)"), parse("x^2 - y")))
    exact_neg = all(
        integrate_form(w, p.reversed(), 6).value == -integrate_form(w, p, 6).value for p in (a, b, *_ftli_paths())
    )
    report(6, "path independence and orientation", diff <= tol and exact_neg, f"|diff| {diff:.1e} <= {tol:.1e}; reversal exact: {exact_neg}")


def criterion_7():
    rng = np.random.default_rng(SEED)
    g = build_level_graph(2)
    k = 2
    worst = np.inf
    cz = c_z_bound(2 + k)
    for _ in range(10):
        i, j = rng.choice(g.n_vertices, size=2, replace=False)
        r = refine_path(path_between(g.vertex(i), g.vertex(j), 2), k)
        worst = min(worst, cz * mu_length(r) * 1.05 / euclidean_length(r))
    ok = worst >= 1 and cz <= 1 + 1e-12
    report(7, "euclidean vs intrinsic length", ok, f"10 paths at level {2 + k}; c_Z {cz:.6f}; min (c_Z * L_mu * 1.05) / L_euclid {worst:.4f}")


def criterion_8():
    circle = ConstraintSet((parse("x^2 + y^2 - 1"),))
    e1 = float(np.max(np.abs(tangent_projection(circle, (1, 0)).matrix - [[0, 0], [0, 1]])))
    P = tangent_projection(circle, (1, 0))
    e2 = abs(quotient_norm(Form1.basis(0), P)) + abs(quotient_norm(Form1.basis(1), P) - 1)
    s = 1 / math.sqrt(2)
    e3 = float(np.max(np.abs(tangent_projection(circle, (s, s)).matrix - [[0.5, -0.5], [-0.5, 0.5]])))
    rng = np.random.default_rng(SEED)
    dg = Form1.exact(circle.generators[0])
    worst = 0.0
    for _ in range(100):
        t = rng.uniform(0, 2 * np.pi)
        P = tangent_projection(circle, (np.cos(t), np.sin(t)))
        w = Form1((Constant(rng.normal()), Constant(rng.normal())))
        shifted = w + dg.scaled(Constant(rng.normal()))
        worst = max(worst, abs(quotient_norm(shifted, P) - quotient_norm(w, P)))
    ex = max(e1, e2, e3)
    report(8, "quotient machinery", ex <= 1e-12 and worst <= 1e-12, f"example err {ex:.1e}; invariance err {worst:.1e} over 100 trials")


class _CellConstant:
    """A field taking prescribed values at the level-``m`` barycenters."""

    def __init__(self, m: int, values: np.ndarray):
        self.keys = {tuple(p): v for p, v in zip(barycenters(m).tolist(), values)}

    def value(self, p):
        return np.array([self.keys[tuple(q)] for q in np.asarray(p).tolist()])

    def grad(self, p):
        return np.zeros(np.shape(p))


def criterion_9():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for m in range(7):
        c = rng.normal(size=(3**m, 2))
        w = Form1((_CellConstant(m, c[:, 0]), _CellConstant(m, c[:, 1])))
        u = SimpleTensorField(m, rng.normal(size=(3**m, 2)))
        worst = max(worst, adjointness_residual(w, u))
    smooth = Form1((parse("sin(3*x) + y"), parse("x*y - 1")))
    rms = []
    for m in range(4, 9):
        vals = [
            adjointness_residual(smooth, SimpleTensorField(m, np.random.default_rng(s).normal(size=(3**m, 2))), m + 2) ** 2
            for s in range(8)
        ]
        rms.append(math.sqrt(float(np.mean(vals))))
    dec = all(a > b for a, b in zip(rms, rms[1:]))
    report(9, "adjointness", worst <= 1e-12 and dec, f"cellwise max residual {worst:.1e}; smooth RMS m=4..8 {[f'{r:.1e}' for r in rms]}")


def criterion_10():
    rng = np.random.default_rng(SEED)
    grid = np.stack(np.meshgrid(np.linspace(-1, 1, 21), np.linspace(-1, 1, 21)), axis=-1).reshape(-1, 2)
    violations = 0
    for _ in range(1000):
        a, b = (OmegaElement(random_expr(rng, 2), Form1((random_expr(rng, 2), random_expr(rng, 2)))) for _ in range(2))
        lhs = omega_norm(omega_product(a, b), grid)
        rhs = omega_norm(a, grid) * omega_norm(b, grid)
        violations += lhs > rhs * (1 + 1e-12)
    report(10, "Banach-algebra property", violations == 0, f"{violations} violations in 1000 pairs")


def criterion_11():
    rng = np.random.default_rng(SEED)
    rt_fail = 0
    for _ in range(200):
        e = parse(random_expr(rng, 4).to_source())
        rt_fail += parse(e.to_source()) != e
    fd_fail = 0
    for _ in range(200):
        e = random_expr(rng, 3)
        p = rng.uniform(-1, 1, size=2)
        g = e.grad(p)
        fd = central_gradient(e, p)
        fd_fail += not np.all(np.abs(g - fd) <= 1e-5 * max(1.0, float(np.max(np.abs(g)))))
    report(11, "parser", rt_fail == 0 and fd_fail == 0, f"round-trip failures {rt_fail}/200; gradient mismatches {fd_fail}/200")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 12)])
def test_acceptance(criterion):
    criterion()


if __name__ == "__main__":
    failed = 0
    for c in CRITERIA:
        try:
            c()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
