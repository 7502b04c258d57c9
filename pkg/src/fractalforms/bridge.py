"""From C^1 one-forms on the harmonic gasket to the Dirichlet-form module ``H``.

``H`` is represented by simple-tensor fields ``sum_i phi^i (x) omega_i`` with
coefficients constant on each level-``m`` cell, so that

    <u, v>_H = sum_w sum_ij u_i(w) v_j(w) Gamma(phi^i, phi^j)(K_w).

Forms are sampled at cell representatives, the barycenters of the cell
frames, and the reference measure is the Kusuoka measure ``nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cotangent import Form1, QuadratureMeasure, ScalarField, l2_inner
from .embedding import build_chart, cell_frames
from .energy import graph_energy
from .errors import DomainError
from .gasket import DEFAULT_MAX_LEVEL, check_level
from .zfield import gamma_matrices, kusuoka_table, z_field


def barycenters(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> np.ndarray:
    return cell_frames(m, max_level).mean(axis=1)


def kusuoka_quadrature(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> QuadratureMeasure:
    """Barycenters weighted by ``nu(K_w)``; no constraints since ``T*SG_Phi = T*R^2``."""
    return QuadratureMeasure(barycenters(m, max_level), kusuoka_table(m, max_level).values)


@dataclass(frozen=True, eq=False)
class SimpleTensorField:
    """Cellwise coefficients ``(omega_1(w), omega_2(w))`` of ``sum_i phi^i (x) omega_i``."""

    level: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (3**self.level, 2):
            raise DomainError(f"expected coefficients of shape {(3**self.level, 2)}, got {c.shape}")
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def coordinate(cls, i: int, m: int) -> "SimpleTensorField":
        """``phi^i (x) 1``."""
        c = np.zeros((3**m, 2))
        c[:, i] = 1.0
        return cls(m, c)

    def act(self, a) -> "SimpleTensorField":
        """Module action ``a (b (x) c) = b (x) (c a)`` by cellwise scalars ``a``."""
        a = np.broadcast_to(np.asarray(a, dtype=float), (3**self.level,))
        return SimpleTensorField(self.level, self.coefficients * a[:, None])

    def __add__(self, other: "SimpleTensorField") -> "SimpleTensorField":
        _same_level(self.level, other.level)
        return SimpleTensorField(self.level, self.coefficients + other.coefficients)

    def __mul__(self, s: float) -> "SimpleTensorField":
        return SimpleTensorField(self.level, self.coefficients * s)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class CellwiseForm:
    """A one-form with coefficients constant on each level-``level`` cell."""

    level: int
    coefficients: np.ndarray = field(repr=False)


def _same_level(a: int, b: int) -> None:
    if a != b:
        raise DomainError(f"level mismatch: {a} != {b}")


def h_inner(u: SimpleTensorField, v: SimpleTensorField) -> float:
    _same_level(u.level, v.level)
    gm = gamma_matrices(u.level, max_level=u.level)
    return float(np.einsum("ci,cij,cj->", u.coefficients, gm, v.coefficients))


def pi_map(omega: Form1, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> SimpleTensorField:
    """Discrete ``pi omega = sum_i phi^i (x) (omega_i o Phi)`` sampled at barycenters."""
    if omega.dim != 2:
        raise DomainError("forms on the harmonic gasket have two coefficients")
    return SimpleTensorField(m, omega.at(barycenters(m, max_level)))


def z_seminorm_sq(omega: Form1, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> float:
    """``||omega||_Z**2 = sum_w nu(K_w) omega(p_w)^T Z(w) omega(p_w)``."""
    u = pi_map(omega, m, max_level)
    return h_inner(u, u)


def z_seminorm(omega: Form1, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> float:
    return math.sqrt(max(z_seminorm_sq(omega, m, max_level), 0.0))


def pi_star(u: SimpleTensorField) -> CellwiseForm:
    """``pi* sum_i phi^i (x) u_i = sum_ij Z^{ij} u_i dx^j`` on each cell."""
    z = z_field(u.level, max_level=u.level).matrices
    return CellwiseForm(u.level, np.einsum("cij,ci->cj", z, u.coefficients))


def adjointness_residual(omega: Form1, u: SimpleTensorField, quadrature_level: int | None = None) -> float:
    """``|<pi omega, u>_H - <omega, pi* u>_{L^2(nu)}|``.

    The right side is a ``nu``-quadrature at ``quadrature_level`` (default:
    ``u``'s level, where the identity is exact).  On a finer quadrature the
    field ``Z`` is refined as well and ``u`` is held constant on each of its
    cells, so the residual measures the sampling error of ``omega o Phi``.
    """
    m = u.level
    left = h_inner(pi_map(omega, m, max_level=m), u)
    L = m if quadrature_level is None else quadrature_level
    if L < m:
        raise DomainError("quadrature level must not be coarser than the tensor field")
    q = kusuoka_quadrature(L, max_level=L)
    u_fine = np.repeat(u.coefficients, 3 ** (L - m), axis=0)
    eta = np.einsum("cij,ci->cj", z_field(L, max_level=L).matrices, u_fine)
    right = l2_inner(omega, eta, q)
    return abs(left - right)


def composed_values(F: ScalarField, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> np.ndarray:
    """``F o Phi`` on the level-``m`` vertices."""
    return F.value(build_chart(m, max_level).points)


def composed_graph_energy(F: ScalarField, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> float:
    return graph_energy(composed_values(F, m, max_level), m, max_level)


def simple_z_integral(g, F: ScalarField, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> float:
    """``sum_w g(w)**2 grad F^T Z(w) grad F nu(K_w)`` with ``grad F`` at barycenters."""
    m = check_level(m, max_level)
    zf = z_field(m, max_level)
    g = np.broadcast_to(np.asarray(g, dtype=float), (3**m,))
    df = F.grad(barycenters(m, max_level))
    return float(np.sum(g**2 * zf.nu.values * np.einsum("ci,cij,cj->c", df, zf.matrices, df)))


def energy_report(F: ScalarField, m: int, max_level: int = DEFAULT_MAX_LEVEL) -> dict:
    """Compare ``||dF||_Z**2`` with the level-``m`` graph energy of ``F o Phi``."""
    s = z_seminorm_sq(Form1.exact(F), m, max_level)
    e = composed_graph_energy(F, m, max_level)
    gap = abs(s - e) / abs(e) if e != 0 else abs(s - e)
    return {"level": m, "seminorm2": s, "graph_energy": e, "relative_gap": gap}
