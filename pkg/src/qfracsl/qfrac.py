r"""Riemann--Liouville and Caputo fractional q-operators on a :class:`QLattice`.

With ``K_b(m) = (q^{m+1}; q)_{b-1}`` the left integral at ``x = a q^n`` is

.. math::

    I^{b}_{0+} f(x) = \frac{x^{b} (1-q)}{\Gamma_q(b)}
        \sum_{m \ge 0} q^m K_b(m) f(x q^m)

and the right integral is the finite sum over the nodes ``t = a q^k``,
``k <= n``, with weight ``t^{b-1} K_b(n-k)``.  Derivatives are compositions
of these with ``dq`` / ``dq_inv``.  Order ``b = 0`` is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from ._summation import cmatvec, csum
from .qcore import (
    PRODUCT_CUTOFF,
    LatticeFn,
    QLattice,
    dq,
    dq_inv,
    qgamma,
    qpoch_inf,
    qpoch_real,
)


@dataclass(frozen=True)
class FracOrder:
    """Derivative order in ``(0, 1]``; ``1`` is the integer-order case."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")

    def __float__(self):
        return float(self.alpha)


Order = Union[float, FracOrder]


def _alpha(alpha: Order) -> float:
    return float(FracOrder(float(alpha)).alpha)


@dataclass(frozen=True)
class NormBounds:
    M_alpha_1: float
    M_alpha_2: float
    M_tilde: float
    K_alpha: float
    c_alpha_0: float


# -- kernels -------------------------------------------------------------------


@lru_cache(maxsize=256)
def kernel(q: float, order: float, count: int) -> np.ndarray:
    """``K(m) = (q^{m+1}; q)_{order-1}`` for ``m < count``."""
    out = np.array([qpoch_real(q ** (m + 1), order - 1.0, q) for m in range(count)])
    out.setflags(write=False)
    return out


def _tail_extra(q: float) -> int:
    return int(math.ceil(math.log(PRODUCT_CUTOFF) / math.log(q))) + 1


@lru_cache(maxsize=128)
def _left_tables(lat: QLattice, order: float):
    """Toeplitz weights ``q^m K(m)`` and tail sums ``T(M) = sum_{m>=M} q^m K(m)``."""
    size, q = lat.size, lat.q
    count = size + _tail_extra(q)
    w = q ** np.arange(count, dtype=float) * kernel(q, order, count)
    rest = q**count / (1.0 - q)
    tails = np.array([csum(np.append(w[m:], rest)) for m in range(size + 1)])
    idx = np.arange(size)
    diff = idx[np.newaxis, :] - idx[:, np.newaxis]
    mat = np.where(diff >= 0, w[np.clip(diff, 0, None)], 0.0)
    mat.setflags(write=False)
    tails.setflags(write=False)
    return mat, tails


@lru_cache(maxsize=128)
def _right_matrix(lat: QLattice, order: float) -> np.ndarray:
    size, q = lat.size, lat.q
    k = kernel(q, order, size)
    x = lat.nodes
    idx = np.arange(size)
    diff = idx[:, np.newaxis] - idx[np.newaxis, :]
    col = q**idx * x ** (order - 1.0)
    mat = np.where(diff >= 0, k[np.clip(diff, 0, None)] * col[np.newaxis, :], 0.0)
    mat.setflags(write=False)
    return mat


def _limit_value(values: np.ndarray) -> float:
    """q-regular limit estimate: the deepest value if the samples have settled."""
    last, prev = values[-1], values[-2]
    if np.isfinite(last) and abs(last - prev) <= 1e-6 * abs(last):
        return float(last)
    return 0.0


# -- fractional integrals --------------------------------------------------------


def ileft_order(f: LatticeFn, order: float) -> LatticeFn:
    """Left Riemann--Liouville q-integral of any order ``>= 0``."""
    if order < 0:
        raise ValueError("integration order must be nonnegative")
    if order == 0:
        return f
    lat = f.lattice
    mat, tails = _left_tables(lat, float(order))
    sums = cmatvec(mat, f.values) + f.zero_value * tails[lat.size - np.arange(lat.size)]
    scale = lat.nodes**order * (1.0 - lat.q) / qgamma(order, lat.q)
    out = scale * sums
    return LatticeFn(lat, out, _limit_value(out))


def iright_order(f: LatticeFn, order: float) -> LatticeFn:
    """Right Riemann--Liouville q-integral of any order ``>= 0`` (upper end ``a``).

    The extension value at ``a/q`` is taken equal to the value at ``a``.
    """
    if order < 0:
        raise ValueError("integration order must be nonnegative")
    if order == 0:
        return f
    lat = f.lattice
    q, a = lat.q, lat.a
    pref = a * (1.0 - q) / qgamma(order, q)
    out = pref * cmatvec(_right_matrix(lat, float(order)), f.values)
    k = np.arange(lat.size)
    head = csum(a ** (order - 1.0) * q ** (k * order) * f.values)
    tail = f.zero_value * a ** (order - 1.0) * q ** (lat.size * order) / (1.0 - q**order)
    zero = pref * (head + tail)
    return LatticeFn(lat, out, zero, float(out[0]))


def ileft(f: LatticeFn, alpha: Order) -> LatticeFn:
    """``I^alpha_{q,0+} f``; ``alpha = 1`` is the Jackson primitive."""
    return ileft_order(f, _alpha(alpha))


def iright(f: LatticeFn, alpha: Order) -> LatticeFn:
    """``I^alpha_{q,a-} f``."""
    return iright_order(f, _alpha(alpha))


# -- fractional derivatives ------------------------------------------------------


def dleft_rl(f: LatticeFn, alpha: Order) -> LatticeFn:
    """``D^alpha_{q,0+} f = D_q I^{1-alpha}_{q,0+} f``."""
    al = _alpha(alpha)
    return dq(ileft_order(f, 1.0 - al))


def dright_rl(f: LatticeFn, alpha: Order) -> LatticeFn:
    """``D^alpha_{q,a-} f = -(1/q) D_{1/q} I^{1-alpha}_{q,a-} f``.

    Defined below ``a``; the returned sample has ``start = 1`` and its top
    value depends on the ``a/q`` extension convention.
    """
    al = _alpha(alpha)
    g = iright_order(f, 1.0 - al)
    if g.above is None:
        # order 0: same a/q convention as the fractional right integral
        g = LatticeFn(g.lattice, g.values, g.zero_value, float(g.values[0]), g.offsets, g.start)
    out = dq_inv(g) * (-1.0 / f.lattice.q)
    return _from_node_one(out)


def dleft_caputo(f: LatticeFn, alpha: Order) -> LatticeFn:
    """``cD^alpha_{q,0+} f = I^{1-alpha}_{q,0+} D_q f``."""
    al = _alpha(alpha)
    return ileft_order(dq(f), 1.0 - al)


def dright_caputo(f: LatticeFn, alpha: Order) -> LatticeFn:
    """``cD^alpha_{q,a-} f = -(1/q) I^{1-alpha}_{q,a-} D_{1/q} f``; needs ``f.above``."""
    al = _alpha(alpha)
    out = iright_order(dq_inv(f), 1.0 - al) * (-1.0 / f.lattice.q)
    return _from_node_one(out)


def dright_rl_magnitude(f: LatticeFn, alpha: Order) -> np.ndarray:
    """Size of the summands that ``dright_rl`` combines at each node.

    The right integral of ``|f|`` is differenced with absolute values, which
    bounds the rounding error of ``dright_rl(f)`` up to a factor of machine
    epsilon.  Entry 0 (the excluded node ``a``) is returned as ``nan``.
    """
    al = _alpha(alpha)
    lat = f.lattice
    g = iright_order(f.with_values(np.abs(f.values), abs(f.zero_value)), 1.0 - al).values
    x = lat.nodes
    out = np.full(lat.size, np.nan)
    out[1:] = (g[:-1] + g[1:]) / ((1.0 - lat.q) * x[:-1] * lat.q)
    return out


def _from_node_one(f: LatticeFn) -> LatticeFn:
    return LatticeFn(f.lattice, f.values, f.zero_value, f.above, f.offsets, max(f.start, 1))


# -- norm constants ---------------------------------------------------------------


def kernel_square_integral(alpha: float, q: float) -> float:
    """``int_0^1 (q xi; q)^2_{alpha-1} d_q xi`` by its Jackson node sum."""
    count = 4 * _tail_extra(q)
    k = kernel(q, alpha, count)
    return (1.0 - q) * csum(q ** np.arange(count, dtype=float) * k**2)


def norm_bounds(alpha: Order, lattice: QLattice) -> NormBounds:
    """Constants of the sup/L1/L2 bounds for the left and right q-integrals."""
    al = _alpha(alpha)
    q, a = lattice.q, lattice.a
    qq = qpoch_inf(q, q)
    m1 = a**al * (1.0 - q) ** al / ((1.0 - q**al) * qq)
    xi = kernel_square_integral(al, q)
    g = qgamma(al, q)
    m2 = a**al / g * math.sqrt((1.0 - q) / (1.0 - q ** (2 * al))) * math.sqrt(xi)
    mt = a ** (al - 0.5) / g * math.sqrt(xi)
    return NormBounds(m1, m2, mt, math.sqrt(a) * m2, m1)


def sup_norm(f: LatticeFn) -> float:
    vals = f.values[f.start :]
    return float(max(np.max(np.abs(vals)), abs(f.zero_value)))


def lq_norm(f: LatticeFn, p: float = 2.0) -> float:
    from .qcore import jackson_int

    return jackson_int(f.with_values(np.abs(f.values) ** p, abs(f.zero_value) ** p)) ** (1.0 / p)
