"""Cotangent spaces of closed sets as quotients, realized by orthogonal projection.

For ``K`` cut out (locally) by constraint functions ``g_1, ..., g_k`` the
quotient ``T*_p U / d_p(I_K)`` is identified with the orthogonal complement of
``span{grad g_j(p)}``; the quotient norm of a class is the length of its
projected representative.  Scalar fields are any objects with ``value(p)``
and ``grad(p)`` acting on points of shape ``(..., m)`` (for instance
:class:`fractalforms.expr.Expr`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .errors import DomainError

RANK_TOL = 1e-10
CONSTRAINT_TOL = 1e-9


class ScalarField(Protocol):
    def value(self, p) -> np.ndarray: ...

    def grad(self, p) -> np.ndarray: ...


@dataclass(frozen=True)
class ConstraintSet:
    """Finitely many generators of the vanishing ideal of ``K``."""

    generators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))

    def __len__(self) -> int:
        return len(self.generators)

    def gradients(self, p) -> np.ndarray:
        """Constraint gradients at ``p``, shape ``(..., k, m)``."""
        p = np.asarray(p, dtype=float)
        if not self.generators:
            return np.zeros(p.shape[:-1] + (0, p.shape[-1]))
        return np.stack([g.grad(p) for g in self.generators], axis=-2)

    def residual(self, points) -> float:
        if not self.generators:
            return 0.0
        pts = np.asarray(points, dtype=float)
        return float(max(np.max(np.abs(g.value(pts)), initial=0.0) for g in self.generators))

    def check(self, points, tol: float = CONSTRAINT_TOL) -> None:
        r = self.residual(points)
        if r > tol:
            raise DomainError(f"sample points are not on K: constraint residual {r:.3g} > {tol:g}")


def _projector(grads: np.ndarray, dim: int) -> np.ndarray:
    if grads.shape[0] == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(grads)
    rank = int(np.sum(s > RANK_TOL * max(1.0, s[0])))
    v = vt[:rank]
    return np.eye(dim) - v.T @ v


@dataclass(frozen=True, eq=False)
class TangentProjection:
    """Orthogonal projector ``P_p`` onto the annihilator of ``d_p(I_K)``."""

    point: np.ndarray
    matrix: np.ndarray

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix)))

    def __matmul__(self, v):
        return self.matrix @ np.asarray(v, dtype=float)


def tangent_projection(c: ConstraintSet, p: Sequence[float]) -> TangentProjection:
    p = np.asarray(p, dtype=float)
    return TangentProjection(p, _projector(c.gradients(p), p.shape[-1]))


def projection_field(c: ConstraintSet | None, points) -> np.ndarray:
    """Projectors at each of ``n`` points, shape ``(n, m, m)``; identity when ``c`` is empty."""
    pts = np.asarray(points, dtype=float)
    n, m = pts.shape
    if c is None or len(c) == 0:
        return np.broadcast_to(np.eye(m), (n, m, m))
    grads = c.gradients(pts)
    return np.stack([_projector(grads[k], m) for k in range(n)])


class _Partial:
    """``d f / d x^i`` as a value-only field."""

    def __init__(self, f: ScalarField, i: int):
        self.f = f
        self.i = i

    def value(self, p):
        return self.f.grad(p)[..., self.i]

    def grad(self, p):
        raise NotImplementedError("second derivatives are not available")

    def __repr__(self) -> str:
        return f"d{self.i}({self.f})"


class _Product:
    def __init__(self, a: ScalarField, b: ScalarField):
        self.a = a
        self.b = b

    def value(self, p):
        return self.a.value(p) * self.b.value(p)

    def grad(self, p):
        return self.a.grad(p) * self.b.value(p)[..., None] + self.a.value(p)[..., None] * self.b.grad(p)


class _Sum:
    def __init__(self, a: ScalarField, b: ScalarField):
        self.a = a
        self.b = b

    def value(self, p):
        return self.a.value(p) + self.b.value(p)

    def grad(self, p):
        return self.a.grad(p) + self.b.grad(p)


class Constant:
    def __init__(self, c: float):
        self.c = float(c)

    def value(self, p):
        return np.full(np.shape(p)[:-1], self.c)

    def grad(self, p):
        return np.zeros(np.shape(p))

    def __repr__(self) -> str:
        return repr(self.c)


def _is_expr(f) -> bool:
    from .expr import Expr

    return isinstance(f, Expr)


def field_product(a: ScalarField, b: ScalarField) -> ScalarField:
    return a * b if _is_expr(a) and _is_expr(b) else _Product(a, b)


def field_sum(a: ScalarField, b: ScalarField) -> ScalarField:
    return a + b if _is_expr(a) and _is_expr(b) else _Sum(a, b)


@dataclass(frozen=True)
class Form1:
    """``omega = sum_i omega_i dx^i`` with coefficient fields ``omega_i``."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    @classmethod
    def exact(cls, f: ScalarField, dim: int = 2) -> "Form1":
        """The differential ``df``."""
        return cls(tuple(_Partial(f, i) for i in range(dim)))

    @classmethod
    def zero(cls, dim: int = 2) -> "Form1":
        return cls(tuple(Constant(0.0) for _ in range(dim)))

    @classmethod
    def basis(cls, i: int, dim: int = 2) -> "Form1":
        return cls(tuple(Constant(1.0 if j == i else 0.0) for j in range(dim)))

    def at(self, p) -> np.ndarray:
        """Coefficient vectors at ``p``, shape ``(..., m)``; raises on non-finite values."""
        p = np.asarray(p, dtype=float)
        vals = np.stack([np.broadcast_to(c.value(p), p.shape[:-1]) for c in self.coefficients], axis=-1)
        if not np.all(np.isfinite(vals)):
            raise DomainError("form coefficients are not finite at the sample points")
        return vals

    def __add__(self, other: "Form1") -> "Form1":
        return Form1(tuple(field_sum(a, b) for a, b in zip(self.coefficients, other.coefficients)))

    def scaled(self, f: ScalarField) -> "Form1":
        """Fiberwise product ``f * omega``."""
        return Form1(tuple(field_product(f, c) for c in self.coefficients))


def quotient_norm(omega: Form1, P: TangentProjection) -> float:
    """``||[omega]||_{T*_p K} = ||P omega_p||``."""
    return float(np.linalg.norm(P.matrix @ omega.at(P.point)))


@dataclass(frozen=True)
class OmegaElement:
    """An element ``(f, omega)`` of ``C^1 (+) Omega^1``."""

    f: ScalarField
    form: Form1


def omega_product(e1: OmegaElement, e2: OmegaElement) -> OmegaElement:
    """``(f1, w1)(f2, w2) = (f1 f2, f1 w2 + f2 w1)``."""
    return OmegaElement(field_product(e1.f, e2.f), e2.form.scaled(e1.f) + e1.form.scaled(e2.f))


def omega_norm(e: OmegaElement, sample, constraints: ConstraintSet | None = None) -> float:
    """Grid supremum of ``||f||_inf + sum_i ||d_i f||_inf + sup_p ||omega_p||``.

    Suprema are taken over ``sample`` only, so the result is a lower bound of
    the true norm.  With ``constraints`` the fiber norm is the quotient norm.
    """
    pts = np.atleast_2d(np.asarray(sample, dtype=float))
    if pts.size == 0:
        raise DomainError("omega_norm needs a nonempty sample")
    f_part = np.max(np.abs(e.f.value(pts))) + np.sum(np.max(np.abs(e.f.grad(pts)), axis=0))
    vals = e.form.at(pts)
    if constraints is not None and len(constraints):
        vals = np.einsum("nij,nj->ni", projection_field(constraints, pts), vals)
    return float(f_part + np.max(np.linalg.norm(vals, axis=-1)))


@dataclass(frozen=True, eq=False)
class QuadratureMeasure:
    """Finite measure ``sum_k weight_k delta_{p_k}``."""

    points: np.ndarray
    weights: np.ndarray
    constraints: ConstraintSet | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(pts) != len(w):
            raise DomainError(f"{len(pts)} quadrature points but {len(w)} weights")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("quadrature weights must be finite and nonnegative")
        if self.constraints is not None:
            self.constraints.check(pts, tol=1e-6)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @classmethod
    def circle(cls, n: int, radius: float = 1.0) -> "QuadratureMeasure":
        """Equispaced arc-length quadrature on a circle, with its constraint attached."""
        from .expr import parse

        t = 2 * np.pi * np.arange(n) / n
        pts = radius * np.column_stack([np.cos(t), np.sin(t)])
        c = ConstraintSet((parse(f"x^2 + y^2 - {float(radius) ** 2!r}"),))
        return cls(pts, np.full(n, 2 * np.pi * radius / n), c)


def _form_values(omega, q: QuadratureMeasure) -> np.ndarray:
    if isinstance(omega, Form1):
        return omega.at(q.points)
    vals = np.asarray(omega, dtype=float)
    if vals.shape != q.points.shape:
        raise DomainError(f"form values have shape {vals.shape}, expected {q.points.shape}")
    return vals


def l2_inner(omega, eta, q: QuadratureMeasure, projections=None) -> float:
    """``sum_k w_k <P_k omega(p_k), P_k eta(p_k)>``.

    ``omega`` and ``eta`` are :class:`Form1` objects or arrays of coefficient
    vectors at the quadrature points.  ``projections`` is ``None`` (use the
    measure's constraints, identity if it has none), a :class:`ConstraintSet`,
    or an ``(n, m, m)`` array.
    """
    a = _form_values(omega, q)
    b = _form_values(eta, q)
    if projections is None:
        projections = q.constraints
    if isinstance(projections, ConstraintSet) or projections is None:
        projections = projection_field(projections, q.points)
    P = np.asarray(projections, dtype=float)
    if P.shape != (len(a), a.shape[1], a.shape[1]):
        raise DomainError(f"projection field has shape {P.shape}")
    pa = np.einsum("nij,nj->ni", P, a)
    pb = np.einsum("nij,nj->ni", P, b)
    return float(np.sum(q.weights * np.sum(pa * pb, axis=1)))
