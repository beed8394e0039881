"""Truncated multivariate Taylor (jet) arithmetic through third order.

A :class:`Jet` carries the value of a scalar quantity together with all of
its partial derivatives through a requested order (at most 3) with respect
to ``m`` real variables.  Sums, products, quotients, and compositions with
analytic kernels (exp, log, trig, powers) propagate the derivative arrays
exactly; no finite differencing is involved anywhere.

Two structural guarantees matter downstream and are enforced here rather
than asserted after the fact:

* Derivative arrays are exactly symmetric under index permutations.  Rank-3
  results are canonicalized so that permuted index triples share the
  identical float; rank-2 results are symmetric because every contributing
  term is.
* Evaluation is pure.  Re-running the same operation sequence produces
  bit-identical arrays.

Complex values are supported throughout: the *variables* are always real,
so conjugation of a jet is conjugation of its arrays.
"""

from __future__ import annotations

import math
import numbers

import numpy as np

MAX_ORDER = 3


class JetOrderError(ValueError):
    """Requested derivative order is outside what a jet carries."""


def _zeros(shape, like):
    dtype = np.complex128 if np.iscomplexobj(np.asarray(like)) else np.float64
    return np.zeros(shape, dtype=dtype)


_CANON2 = {}
_CANON3 = {}


def _canon2_indices(m):
    idx = _CANON2.get(m)
    if idx is None:
        i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        idx = (np.minimum(i, j), np.maximum(i, j))
        _CANON2[m] = idx
    return idx


def _canon3_indices(m):
    idx = _CANON3.get(m)
    if idx is None:
        i, j, k = np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij")
        s = np.sort(np.stack([i, j, k]), axis=0)
        idx = (s[0], s[1], s[2])
        _CANON3[m] = idx
    return idx


def _canon2(arr):
    i, j = _canon2_indices(arr.shape[0])
    return arr[i, j]


def _canon3(arr):
    i, j, k = _canon3_indices(arr.shape[0])
    return arr[i, j, k]


class Jet:
    """Value plus derivative arrays through ``order`` in ``m`` real variables."""

    __slots__ = ("m", "order", "value", "grad", "hess", "third")

    def __init__(self, m, order, value, grad=None, hess=None, third=None):
        if not 0 <= order <= MAX_ORDER:
            raise JetOrderError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        self.m = m
        self.order = order
        self.value = complex(value) if np.iscomplexobj(np.asarray(value)) else float(value)
        self.grad = grad if order >= 1 else None
        self.hess = hess if order >= 2 else None
        self.third = third if order >= 3 else None
        if order >= 1 and self.grad is None:
            self.grad = _zeros((m,), value)
        if order >= 2 and self.hess is None:
            self.hess = _zeros((m, m), value)
        if order >= 3 and self.third is None:
            self.third = _zeros((m, m, m), value)

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def constant(cls, value, m, order):
        return cls(m, order, value)

    @classmethod
    def variable(cls, value, index, m, order):
        """Seed jet of the ``index``-th real coordinate at ``value``."""
        jet = cls(m, order, value)
        if order >= 1:
            grad = np.zeros(m)
            grad[index] = 1.0
            jet.grad = grad
        return jet

    # ------------------------------------------------------------------
    # helpers
    # ------------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.m != self.m:
                raise ValueError("jets over different variable counts")
            return other
        if isinstance(other, (numbers.Number, np.number)):
            return Jet.constant(other, self.m, self.order)
        return NotImplemented

    def conj(self):
        return Jet(
            self.m,
            self.order,
            np.conj(self.value),
            None if self.grad is None else np.conj(self.grad),
            None if self.hess is None else np.conj(self.hess),
            None if self.third is None else np.conj(self.third),
        )

    def real(self):
        return 0.5 * (self + self.conj())

    def imag(self):
        return (-0.5j) * (self - self.conj())

    def shift(self, i):
        """Jet of the partial derivative with respect to real variable ``i``.

        Drops one order: derivatives of order ``k`` of the shifted jet are
        order ``k + 1`` derivatives of the original.
        """
        if self.order < 1:
            raise JetOrderError("cannot shift an order-0 jet")
        return Jet(
            self.m,
            self.order - 1,
            self.grad[i],
            None if self.hess is None else self.hess[i].copy(),
            None if self.third is None else self.third[i].copy(),
            None,
        )

    # ------------------------------------------------------------------
    # ring operations
    # ------------------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        order = min(self.order, other.order)
        return Jet(
            self.m,
            order,
            self.value + other.value,
            self.grad + other.grad if order >= 1 else None,
            self.hess + other.hess if order >= 2 else None,
            self.third + other.third if order >= 3 else None,
        )

    __radd__ = __add__

    def __neg__(self):
        return Jet(
            self.m,
            self.order,
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
            None if self.third is None else -self.third,
        )

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (numbers.Number, np.number)):
            return Jet(
                self.m,
                self.order,
                other * self.value,
                None if self.grad is None else other * self.grad,
                None if self.hess is None else other * self.hess,
                None if self.third is None else other * self.third,
            )
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self, other
        order = min(a.order, b.order)
        value = a.value * b.value
        grad = hess = third = None
        if order >= 1:
            grad = a.value * b.grad + b.value * a.grad
        if order >= 2:
            hess = (
                a.value * b.hess
                + b.value * a.hess
                + np.multiply.outer(a.grad, b.grad)
                + np.multiply.outer(b.grad, a.grad)
            )
            hess = _canon2(hess)
        if order >= 3:
            cross = np.multiply.outer(a.hess, b.grad) + np.multiply.outer(b.hess, a.grad)
            cross = cross + cross.transpose(0, 2, 1) + cross.transpose(2, 1, 0)
            third = _canon3(a.value * b.third + b.value * a.third + cross)
        return Jet(self.m, order, value, grad, hess, third)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (numbers.Number, np.number)):
            return self * (1.0 / other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, numbers.Integral):
            p = int(p)
            if p < 0:
                return (self ** (-p)).reciprocal()
            result = Jet.constant(1.0, self.m, self.order)
            base = self
            while p:
                if p & 1:
                    result = result * base
                base = base * base
                p >>= 1
            return result
        return power(self, p)

    def reciprocal(self):
        v = self.value
        if v == 0:
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.compose([1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4])

    # ------------------------------------------------------------------
    # composition with a univariate analytic kernel
    # ------------------------------------------------------------------
    def compose(self, derivs):
        """Jet of ``phi(self)`` given ``derivs = [phi(v), phi'(v), ...]`` at ``v = self.value``."""
        if len(derivs) < self.order + 1:
            raise JetOrderError("not enough kernel derivatives for composition")
        d0 = derivs[0]
        grad = hess = third = None
        if self.order >= 1:
            d1 = derivs[1]
            grad = d1 * self.grad
        if self.order >= 2:
            d2 = derivs[2]
            hess = _canon2(d2 * np.multiply.outer(self.grad, self.grad) + d1 * self.hess)
        if self.order >= 3:
            d3 = derivs[3]
            g, h = self.grad, self.hess
            cube = np.multiply.outer(np.multiply.outer(g, g), g)
            cross = np.multiply.outer(h, g)
            cross = cross + cross.transpose(0, 2, 1) + cross.transpose(2, 1, 0)
            third = _canon3(d3 * cube + d2 * cross + d1 * self.third)
        return Jet(self.m, self.order, d0, grad, hess, third)


# ----------------------------------------------------------------------
# analytic kernels
# ----------------------------------------------------------------------

def _real_value(jet, what):
    v = jet.value
    if isinstance(v, complex):
        if abs(v.imag) > 1e-12 * (1.0 + abs(v.real)):
            raise ValueError(f"{what} requires a real-valued jet, got value {v}")
        return v.real
    return v


def exp(jet):
    e = np.exp(jet.value)
    return jet.compose([e, e, e, e])


def log(jet):
    v = _real_value(jet, "log")
    if v <= 0:
        raise ValueError(f"log requires a positive value, got {v}")
    return jet.compose([math.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3])


def sin(jet):
    s, c = np.sin(jet.value), np.cos(jet.value)
    return jet.compose([s, c, -s, -c])


def cos(jet):
    s, c = np.sin(jet.value), np.cos(jet.value)
    return jet.compose([c, -s, -c, s])


def tan(jet):
    return sin(jet) / cos(jet)


def tanh(jet):
    t = np.tanh(_real_value(jet, "tanh"))
    d1 = 1.0 - t * t
    return jet.compose([t, d1, -2.0 * t * d1, -2.0 * d1 * (1.0 - 3.0 * t * t)])


def power(jet, p):
    """``jet ** p`` for real exponent ``p``; requires a positive real value."""
    v = _real_value(jet, "power")
    if v <= 0:
        raise ValueError(f"real power requires a positive value, got {v}")
    return jet.compose(
        [v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2), p * (p - 1) * (p - 2) * v ** (p - 3)]
    )


def sqrt(jet):
    return power(jet, 0.5)


def abs2(jet):
    """|w|^2 as a jet; exact-real for any complex-valued jet."""
    return jet * jet.conj()
