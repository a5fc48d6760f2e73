r"""q-lattice arithmetic.

Everything in this package lives on the q-geometric lattice
:math:`\{a q^n : n \ge 0\} \cup \{0\}`.  A :class:`QLattice` keeps ``depth``
reported levels plus ``guard`` hidden levels underneath them; the guard levels
absorb the error of cutting the lattice off, so that operator values at the
reported nodes are not polluted by the tail model.  Beyond the last retained
level a function is replaced by its value at zero.

Functions are sampled as :class:`LatticeFn`.  Besides the node values a
sample keeps the offsets ``f(x) - f(0)``; when those are supplied directly
(for example from a series with the constant term removed) q-differences of
nearly constant functions do not lose digits to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._summation import csum

PRODUCT_CUTOFF = 1e-18
GUARD_MASS = 1e-20


class LatticeError(ValueError):
    """Invalid lattice data, index or boundary request."""


class SingularProductError(ArithmeticError):
    """An infinite q-product has a vanishing factor."""


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q!r}")


@dataclass(frozen=True)
class QLattice:
    """The truncated lattice ``a q^n``.

    ``depth`` is the number of reported levels; ``guard`` extra levels are
    kept below them (chosen automatically so that ``q**guard <= 1e-20``).
    """

    q: float
    a: float = 1.0
    depth: int = 64
    guard: Optional[int] = None

    def __post_init__(self):
        _check_q(self.q)
        if not self.a > 0.0:
            raise ValueError(f"a must be positive, got {self.a!r}")
        if int(self.depth) != self.depth or self.depth < 8:
            raise ValueError(f"depth must be an integer >= 8, got {self.depth!r}")
        if self.guard is None:
            object.__setattr__(
                self, "guard", int(math.ceil(math.log(GUARD_MASS) / math.log(self.q)))
            )
        elif self.guard < 0:
            raise ValueError("guard must be nonnegative")

    @property
    def size(self) -> int:
        """Number of retained levels (reported plus guard)."""
        return self.depth + self.guard

    @property
    def nodes(self) -> np.ndarray:
        return self.a * self.q ** np.arange(self.size, dtype=float)

    def node(self, n: int) -> float:
        return self.a * self.q**n

    @property
    def weights(self) -> np.ndarray:
        """Jackson weights ``a (1-q) q^n`` of the retained nodes."""
        return self.a * (1.0 - self.q) * self.q ** np.arange(self.size, dtype=float)

    @property
    def tail_mass(self) -> float:
        """Jackson mass of the discarded levels, ``a q^size``."""
        return self.a * self.q**self.size


@dataclass(frozen=True, eq=False)
class LatticeFn:
    """Samples ``f(a q^n)`` together with ``f(0)``.

    ``offsets`` holds ``f(a q^n) - f(0)``; when omitted it is derived from
    ``values``.  ``above`` is the optional value ``f(a/q)`` required by the
    backward q-derivative at the top node.  ``start`` marks the first node
    whose value belongs to the operator's domain (right-sided derivatives
    are only defined strictly below ``a``).
    """

    lattice: QLattice
    values: np.ndarray
    zero_value: float = 0.0
    above: Optional[float] = None
    offsets: Optional[np.ndarray] = field(default=None)
    start: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.lattice.size,):
            raise LatticeError(
                f"expected {self.lattice.size} samples, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "zero_value", float(self.zero_value))
        if self.offsets is None:
            offs = vals - self.zero_value
        else:
            offs = np.array(self.offsets, dtype=float)
            if offs.shape != vals.shape:
                raise LatticeError("offsets must match values")
        offs.setflags(write=False)
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def sample(
        cls,
        lattice: QLattice,
        fn: Callable,
        *,
        offset: Optional[Callable] = None,
        extend: bool = True,
    ) -> "LatticeFn":
        """Sample the vectorised callable ``fn`` on the lattice.

        ``offset`` may give ``fn(x) - fn(0)`` directly for better accuracy.
        With ``extend`` the value at ``a/q`` is sampled as well.
        """
        x = lattice.nodes
        vals = np.asarray(fn(x), dtype=float) * np.ones_like(x)
        zero = float(np.asarray(fn(np.zeros(1)), dtype=float).ravel()[0])
        offs = None
        if offset is not None:
            offs = np.asarray(offset(x), dtype=float) * np.ones_like(x)
        above = None
        if extend:
            above = float(np.asarray(fn(np.array([lattice.a / lattice.q])), dtype=float).ravel()[0])
        return cls(lattice, vals, zero, above, offs)

    @classmethod
    def constant(cls, lattice: QLattice, c: float) -> "LatticeFn":
        return cls(lattice, np.full(lattice.size, float(c)), c, float(c), np.zeros(lattice.size))

    def with_values(self, values, zero_value=None, **kw) -> "LatticeFn":
        zero = self.zero_value if zero_value is None else zero_value
        return LatticeFn(self.lattice, values, zero, **kw)

    def dilate(self) -> "LatticeFn":
        """The function ``x -> f(q x)`` on the same lattice."""
        vals = np.append(self.values[1:], self.zero_value)
        offs = np.append(self.offsets[1:], 0.0)
        return LatticeFn(self.lattice, vals, self.zero_value, float(self.values[0]), offs)

    def is_q_regular(self, tol: float = 1e-8) -> bool:
        return abs(self.values[-1] - self.zero_value) <= tol * (1.0 + abs(self.zero_value))

    def reported(self) -> np.ndarray:
        """Values at the reported (non-guard) nodes."""
        return self.values[: self.lattice.depth]

    def _binary(self, other, op) -> "LatticeFn":
        if isinstance(other, LatticeFn):
            _same_lattice(self, other)
            above = None if self.above is None or other.above is None else op(self.above, other.above)
            offs = op(self.offsets, other.offsets) if op in (np.add, np.subtract) else None
            return LatticeFn(
                self.lattice,
                op(self.values, other.values),
                op(self.zero_value, other.zero_value),
                above,
                offs,
                max(self.start, other.start),
            )
        c = float(other)
        above = None if self.above is None else op(self.above, c)
        offs = self.offsets if op in (np.add, np.subtract) else (
            op(self.offsets, c) if op is np.multiply else None
        )
        return LatticeFn(
            self.lattice, op(self.values, c), op(self.zero_value, c), above, offs, self.start
        )

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _same_lattice(f: LatticeFn, g: LatticeFn) -> None:
    if f.lattice != g.lattice:
        raise LatticeError("functions live on different lattices")


@dataclass(frozen=True, eq=False)
class SymLatticeFn:
    """Samples on the symmetric grid ``±a q^n`` plus the value at zero."""

    lattice: QLattice
    values_pos: np.ndarray
    values_neg: np.ndarray
    zero_value: float = 0.0

    def __post_init__(self):
        for name in ("values_pos", "values_neg"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.lattice.size,):
                raise LatticeError(f"{name} must have {self.lattice.size} samples")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "zero_value", float(self.zero_value))

    @classmethod
    def sample(cls, lattice: QLattice, fn: Callable) -> "SymLatticeFn":
        x = lattice.nodes
        pos = np.asarray(fn(x), dtype=float) * np.ones_like(x)
        neg = np.asarray(fn(-x), dtype=float) * np.ones_like(x)
        zero = float(np.asarray(fn(np.zeros(1)), dtype=float).ravel()[0])
        return cls(lattice, pos, neg, zero)

    @classmethod
    def odd(cls, f: LatticeFn) -> "SymLatticeFn":
        """Odd extension of a one-sided sample (forces ``f(0) = 0``)."""
        return cls(f.lattice, f.values, -f.values, 0.0)

    @property
    def is_odd(self) -> bool:
        return bool(np.array_equal(self.values_neg, -self.values_pos)) and self.zero_value == 0.0

    def positive_part(self) -> LatticeFn:
        return LatticeFn(self.lattice, self.values_pos, self.zero_value)

    def negative_part(self) -> LatticeFn:
        """The function ``t -> f(-t)`` as a one-sided sample."""
        return LatticeFn(self.lattice, self.values_neg, self.zero_value)


# -- q-shifted factorials and the q-gamma function ---------------------------


def qpoch_finite(a_val: float, n: int, q: float) -> float:
    """``(a; q)_n``, the product of ``1 - a q^j`` for ``j < n``."""
    _check_q(q)
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.prod(1.0 - a_val * q**j for j in range(n))


def qpoch_inf(a_val: float, q: float, cutoff: float = PRODUCT_CUTOFF) -> float:
    """``(a; q)_infinity`` truncated once ``|a q^j| < cutoff``."""
    _check_q(q)
    prod = 1.0
    term = a_val
    while abs(term) >= cutoff:
        factor = 1.0 - term
        if factor == 0.0:
            raise SingularProductError(f"({a_val}; {q})_inf has a zero factor")
        prod *= factor
        term *= q
    return prod


def qpoch_real(a_val: float, nu: float, q: float) -> float:
    """``(a; q)_nu = (a; q)_inf / (a q^nu; q)_inf`` for real ``nu``."""
    return qpoch_inf(a_val, q) / qpoch_inf(a_val * q**nu, q)


def qnumber(x: float, q: float) -> float:
    """``[x]_q = (1 - q^x) / (1 - q)``."""
    return -math.expm1(x * math.log(q)) / (1.0 - q)


def qgamma(x: float, q: float) -> float:
    """The q-gamma function ``(q;q)_inf / (q^x;q)_inf * (1-q)^(1-x)``."""
    _check_q(q)
    if x <= 0 and float(x).is_integer():
        raise SingularProductError(f"q-gamma has a pole at {x}")
    return qpoch_inf(q, q) / qpoch_inf(q**x, q) * (1.0 - q) ** (1.0 - x)


# -- Jackson integrals and q-derivatives --------------------------------------


def jackson_int(f: LatticeFn) -> float:
    """``\\int_0^a f d_q t`` including the tail mass at ``f(0)``."""
    lat = f.lattice
    return csum(np.append(lat.weights * f.values, lat.tail_mass * f.zero_value))


def jackson_int_partial(f: LatticeFn, lower_node: Optional[int], upper_node: int) -> float:
    """``\\int`` from node ``lower_node`` up to node ``upper_node``.

    Node indices count downwards from ``a`` (index 0); ``lower_node=None``
    means the point 0.
    """
    size = f.lattice.size
    if not 0 <= upper_node < size or (lower_node is not None and not 0 <= lower_node <= size):
        raise LatticeError("node index out of range")
    if lower_node is None:
        w = f.lattice.weights[upper_node:] * f.values[upper_node:]
        return csum(np.append(w, f.lattice.tail_mass * f.zero_value))
    if lower_node < upper_node:
        raise LatticeError("lower_node must not lie above upper_node")
    return csum(f.lattice.weights[upper_node:lower_node] * f.values[upper_node:lower_node])


def jackson_int_sym(f: SymLatticeFn) -> float:
    """``\\int_{-a}^{a} f d_q t`` on the symmetric grid."""
    lat = f.lattice
    parts = np.concatenate([lat.weights * f.values_pos, lat.weights * f.values_neg])
    return csum(np.append(parts, 2.0 * lat.tail_mass * f.zero_value))


def dq(f: LatticeFn) -> LatticeFn:
    """Forward Jackson derivative ``(f(x) - f(qx)) / ((1-q) x)``.

    The deepest retained node and the point 0 use the secant against
    ``f(0)`` as the surrogate for the q-regular limit.
    """
    lat = f.lattice
    x = lat.nodes
    d = np.empty(lat.size)
    d[:-1] = (f.offsets[:-1] - f.offsets[1:]) / ((1.0 - lat.q) * x[:-1])
    d[-1] = f.offsets[-1] / x[-1]
    above = None
    if f.above is not None:
        above = (f.above - f.values[0]) / ((1.0 - lat.q) * lat.a / lat.q)
    return LatticeFn(lat, d, d[-1], above)


def dq_inv(f: LatticeFn) -> LatticeFn:
    """Backward derivative ``D_{1/q} f(x) = (D_q f)(x / q)``.

    The top node needs ``f(a/q)``; a :class:`LatticeError` is raised when the
    sample carries no such extension.
    """
    if f.above is None:
        raise LatticeError("D_{1/q} at x = a needs f(a/q); supply LatticeFn.above")
    lat = f.lattice
    x = lat.nodes
    d = np.empty(lat.size)
    d[0] = (f.above - f.values[0]) / ((1.0 - lat.q) * lat.a / lat.q)
    d[1:] = (f.offsets[:-1] - f.offsets[1:]) / ((1.0 - lat.q) * x[:-1])
    # the value at zero is the limit of D_q f along the lattice
    zero = f.offsets[-1] / x[-1]
    return LatticeFn(lat, d, zero, None, start=f.start)
