"""Energy measures of cells, the Kusuoka measure and the Z-matrix field.

For functions harmonic on every cell the energy measure of a level-``n`` cell
is exact: ``Gamma(f, g)(K_w) = (5/3)**n * B0(f_w, g_w)`` with ``f_w`` the
boundary triple on ``K_w``.  The field ``Z`` is represented by cell averages
``Gamma(phi^i, phi^j)(K_w) / nu(K_w)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .embedding import cell_frames
from .energy import RENORMALIZATION, PiecewiseHarmonic, base_energy
from .errors import DegenerateCellError, DomainError, InvariantViolation
from .gasket import DEFAULT_MAX_LEVEL, Address, address_index, addresses, cell_corner_lattice, check_level

PSD_TOL = 1e-12
TRACE_TOL = 1e-12
HARMONIC_TOL = 1e-9

_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True, eq=False)
class CellMeasureTable:
    """Masses of the level-``level`` cells, stored in cell order."""

    level: int
    values: np.ndarray = field(repr=False)

    def __getitem__(self, w: Address) -> float:
        if len(w) != self.level:
            raise DomainError(f"address {w!r} is not a level-{self.level} cell")
        return float(self.values[address_index(w)])

    def __len__(self) -> int:
        return len(self.values)

    def total(self) -> float:
        return float(np.sum(self.values))

    def coarsen(self) -> "CellMeasureTable":
        """Table one level up, by additivity."""
        if self.level == 0:
            raise DomainError("cannot coarsen a level-0 table")
        return CellMeasureTable(self.level - 1, self.values.reshape(-1, 3).sum(axis=1))

    def items(self):
        return zip(addresses(self.level), map(float, self.values))


def _require_harmonic(f: PiecewiseHarmonic, tol: float) -> None:
    if f.residual > tol:
        raise DomainError(f"function is not piecewise harmonic (re-extension residual {f.residual:.3g})")


def cell_energy_measure(f: PiecewiseHarmonic, g: PiecewiseHarmonic, w: Address, tol: float = HARMONIC_TOL) -> float:
    """``Gamma(f, g)(K_w)`` for harmonic ``f`` and ``g``."""
    _require_harmonic(f, tol)
    _require_harmonic(g, tol)
    if len(w) > min(f.level, g.level):
        raise DomainError(f"address {w!r} is finer than the functions' level")
    return RENORMALIZATION ** len(w) * base_energy(f.cell_triple(w), g.cell_triple(w))


def pair_energies(ft: np.ndarray, gt: np.ndarray, level: int) -> np.ndarray:
    """Vectorized ``(5/3)**level * B0`` over rows of triples."""
    s = sum((ft[:, i] - ft[:, j]) * (gt[:, i] - gt[:, j]) for i, j in _PAIRS)
    return RENORMALIZATION**level * s


def energy_table(f: PiecewiseHarmonic, g: PiecewiseHarmonic, m: int | None = None, tol: float = HARMONIC_TOL) -> CellMeasureTable:
    """``Gamma(f, g)`` on every level-``m`` cell (default: the functions' level)."""
    _require_harmonic(f, tol)
    _require_harmonic(g, tol)
    if f.level != g.level:
        raise DomainError("f and g must live on the same level")
    if m is None:
        m = f.level
    if not 0 <= m <= f.level:
        raise DomainError(f"table level {m} must lie in [0, {f.level}]")
    corners = cell_corner_lattice(m) * 2 ** (f.level - m)
    ids = f.graph.lookup(corners.reshape(-1, 2)).reshape(-1, 3)
    return CellMeasureTable(m, pair_energies(f.values[ids], g.values[ids], m))


@functools.lru_cache(maxsize=16)
def _gamma_matrices(m: int) -> np.ndarray:
    t = cell_frames(m, max_level=m)
    d = np.stack([t[:, i] - t[:, j] for i, j in _PAIRS], axis=1)  # (cells, pair, coord)
    out = RENORMALIZATION**m * np.einsum("cpi,cpj->cij", d, d)
    out.setflags(write=False)
    return out


def gamma_matrices(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> np.ndarray:
    """``[Gamma(phi^i, phi^j)(K_w)]_{ij}`` for every level-``m`` cell, shape ``(3**m, 2, 2)``."""
    return _gamma_matrices(check_level(m, max_level))


def kusuoka_table(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> CellMeasureTable:
    """Kusuoka measure ``nu = Gamma(phi1) + Gamma(phi2)`` of the level-``m`` cells."""
    gm = gamma_matrices(m, max_level)
    return CellMeasureTable(m, gm[:, 0, 0] + gm[:, 1, 1])


@dataclass(frozen=True, eq=False)
class ZMatrix:
    address: Address
    matrix: np.ndarray

    def __post_init__(self):
        check_z(self.matrix[None], self.address)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __matmul__(self, other):
        return self.matrix @ other


def check_z(mats: np.ndarray, where: str = "") -> None:
    """Abort if any matrix is asymmetric, indefinite or off trace one."""
    if np.max(np.abs(mats - np.swapaxes(mats, 1, 2)), initial=0.0) > PSD_TOL:
        raise InvariantViolation(f"asymmetric Z matrix {where}")
    if np.min(np.linalg.eigvalsh(mats), initial=0.0) < -PSD_TOL:
        raise InvariantViolation(f"Z matrix not positive semidefinite {where}")
    tr = mats[:, 0, 0] + mats[:, 1, 1]
    if np.max(np.abs(tr - 1.0), initial=0.0) > TRACE_TOL:
        raise InvariantViolation(f"Z matrix trace off by {np.max(np.abs(tr - 1.0)):.3g} {where}")


@dataclass(frozen=True, eq=False)
class ZField:
    """Cell-averaged ``Z`` on every level-``level`` cell together with ``nu``."""

    level: int
    matrices: np.ndarray = field(repr=False)
    nu: CellMeasureTable = field(repr=False)

    def __getitem__(self, w: Address) -> ZMatrix:
        if len(w) != self.level:
            raise DomainError(f"address {w!r} is not a level-{self.level} cell")
        return ZMatrix(w, self.matrices[address_index(w)])

    def weighted(self) -> np.ndarray:
        """``nu(K_w) Z(w)``, i.e. the Gamma matrices."""
        return self.matrices * self.nu.values[:, None, None]

    def lambda_max(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrices)[:, -1]

    def rows(self) -> list[list]:
        z = self.matrices
        return [
            [w, float(self.nu.values[c]), float(z[c, 0, 0]), float(z[c, 0, 1]), float(z[c, 1, 1])]
            for c, w in enumerate(addresses(self.level))
        ]

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "total_nu": self.nu.total(),
            "cells": [
                {"w": w, "nu": nu, "z": [[z11, z12], [z12, z22]]} for w, nu, z11, z12, z22 in self.rows()
            ],
        }


@functools.lru_cache(maxsize=16)
def _z_field(m: int) -> ZField:
    gm = _gamma_matrices(m)
    nu = gm[:, 0, 0] + gm[:, 1, 1]
    if np.any(nu <= 0):
        bad = addresses(m)[int(np.argmin(nu))]
        raise DegenerateCellError(f"cell {bad!r} has zero Kusuoka mass")
    z = gm / nu[:, None, None]
    check_z(z, f"at level {m}")
    z.setflags(write=False)
    return ZField(m, z, CellMeasureTable(m, nu))


def z_field(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> ZField:
    return _z_field(check_level(m, max_level))


def z_matrix(w: Address, max_level: int = DEFAULT_MAX_LEVEL) -> ZMatrix:
    """``Z(w)_{ij} = Gamma(phi^i, phi^j)(K_w) / nu(K_w)``."""
    return z_field(len(w), max_level)[w]


def c_z_bound(m: int, max_level: int = DEFAULT_MAX_LEVEL) -> float:
    """Largest eigenvalue of ``Z`` over the level-``m`` cells; at most the trace, 1."""
    return float(np.max(z_field(m, max_level).lambda_max()))
