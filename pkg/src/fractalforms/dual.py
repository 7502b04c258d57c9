"""Forward-mode dual numbers with a vector of partial derivatives."""

from __future__ import annotations

import numpy as np


class Dual:
    """``val + sum_k der[k] eps_k`` with ``eps_j eps_k = 0``.

    ``val`` may be a scalar or an array; ``der`` has one leading axis per
    seed direction on top of ``val``'s shape.
    """

    __slots__ = ("val", "der")

    def __init__(self, val, der):
        self.val = val
        self.der = der

    @classmethod
    def variable(cls, val, index: int, n: int) -> "Dual":
        val = np.asarray(val, dtype=float)
        der = np.zeros((n,) + val.shape)
        der[index] = 1.0
        return cls(val, der)

    @staticmethod
    def _parts(other):
        if isinstance(other, Dual):
            return other.val, other.der
        return other, 0.0

    def __add__(self, other):
        v, d = self._parts(other)
        return Dual(self.val + v, self.der + d)

    __radd__ = __add__

    def __sub__(self, other):
        v, d = self._parts(other)
        return Dual(self.val - v, self.der - d)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __mul__(self, other):
        v, d = self._parts(other)
        return Dual(self.val * v, self.der * v + self.val * d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        v, d = self._parts(other)
        return Dual(self.val / v, (self.der * v - self.val * d) / (v * v))

    def __rtruediv__(self, other):
        return Dual(other / self.val, -other * self.der / (self.val * self.val))

    def __pow__(self, n: int):
        if n == 0:
            return Dual(np.ones_like(self.val), np.zeros_like(self.der))
        return Dual(self.val**n, n * self.val ** (n - 1) * self.der)

    def sin(self):
        return Dual(np.sin(self.val), np.cos(self.val) * self.der)

    def cos(self):
        return Dual(np.cos(self.val), -np.sin(self.val) * self.der)

    def exp(self):
        e = np.exp(self.val)
        return Dual(e, e * self.der)

    def sqrt(self):
        r = np.sqrt(self.val)
        return Dual(r, self.der / (2.0 * r))

    def __repr__(self) -> str:
        return f"Dual({self.val!r}, {self.der!r})"
