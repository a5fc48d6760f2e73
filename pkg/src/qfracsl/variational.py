"""Euler--Lagrange and isoperimetric residuals, the Rayleigh quotient.

A functional ``J(y) = int_0^a F(x, y, cD^alpha y) d_q x`` is described by its
partial derivatives ``d2F`` and ``d3F``, each a vectorised map
``(x, y, v) -> array`` where ``v = cD^alpha_{q,0+} y``.  The extremal
condition is

    d2F + D^alpha_{q,a-} d3F = 0   on  {a q^n : n >= 1}.

Residuals are returned as :class:`Residual` objects carrying the node values
and a per-node magnitude scale built from the summands that produced them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .qcore import LatticeFn, QLattice, jackson_int
from .qfrac import _alpha, dleft_caputo, dright_rl, dright_rl_magnitude
from .qspecial import ml_E, ml_e

BOUNDARY_TOL = 1e-10
DENOM_TOL = 1e-300

GridMap = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class BoundaryError(ValueError):
    """The trial function violates y(0) = y(a) = 0."""


@dataclass(frozen=True)
class Functional:
    """Integrand ``F(x, y, v)`` through its partials in ``y`` and ``v``."""

    d2F: GridMap
    d3F: GridMap
    description: str = ""


@dataclass(frozen=True, eq=False)
class Residual:
    """Residual on the nodes ``a q^n`` with ``n >= 1``.

    ``values[0]`` is the value at node ``a``.  It is kept as a diagnostic only
    and never enters :meth:`sup` or :meth:`scaled_sup`.
    """

    values: np.ndarray
    scale: np.ndarray
    lattice: QLattice

    @property
    def at_a(self) -> float:
        return float(self.values[0])

    def reported(self) -> np.ndarray:
        return self.values[1 : self.lattice.depth]

    def sup(self) -> float:
        return float(np.max(np.abs(self.reported())))

    def scaled_sup(self) -> float:
        """``max_n |r_n| / (1 + s_n)`` with ``s_n`` the summand magnitude at node n."""
        s = self.scale[1 : self.lattice.depth]
        return float(np.max(np.abs(self.reported()) / (1.0 + s)))


def check_boundary(y: LatticeFn, expected=(0.0, 0.0), tol: float = BOUNDARY_TOL) -> None:
    """Require ``y(0)`` and ``y(a)`` to equal ``expected`` within ``tol`` (relative)."""
    scale = 1.0 + float(np.max(np.abs(y.values)))
    at_zero, at_a = expected
    if abs(y.zero_value - at_zero) > tol * scale or abs(y.values[0] - at_a) > tol * scale:
        raise BoundaryError(
            f"boundary values y(0)={y.zero_value:.3e}, y(a)={y.values[0]:.3e} "
            f"differ from {at_zero}, {at_a}"
        )


def _grid(y: LatticeFn, alpha: float):
    return y.lattice.nodes, dleft_caputo(y, alpha)


def _partials(F: Functional, y: LatticeFn, v: LatticeFn):
    x = y.lattice.nodes
    zero = np.zeros(1)
    d2 = np.asarray(F.d2F(x, y.values, v.values), dtype=float) * np.ones_like(x)
    d3 = np.asarray(F.d3F(x, y.values, v.values), dtype=float) * np.ones_like(x)
    d3_zero = float(np.ravel(F.d3F(zero, np.array([y.zero_value]), np.array([v.zero_value])))[0])
    return d2, LatticeFn(y.lattice, d3, d3_zero)


def _combine(terms, y: LatticeFn, alpha: float) -> Residual:
    """Sum ``c * (d2 + D^alpha_{a-} d3)`` over ``(c, d2, d3)`` with a matching scale."""
    lat = y.lattice
    total = np.zeros(lat.size)
    scale = np.zeros(lat.size)
    for coeff, d2, d3 in terms:
        if coeff == 0.0:
            continue
        total = total + coeff * (d2 + dright_rl(d3, alpha).values)
        scale = scale + abs(coeff) * (np.abs(d2) + dright_rl_magnitude(d3, alpha))
    return Residual(total, scale, lat)


def el_residual(
    F: Functional,
    y: LatticeFn,
    alpha,
    boundary: Optional[Tuple[float, float]] = (0.0, 0.0),
) -> Residual:
    """``d2F + D^alpha_{q,a-} d3F`` along ``y`` on the nodes below ``a``.

    With ``boundary`` set, ``y(0)`` and ``y(a)`` must match it.
    """
    al = _alpha(alpha)
    if boundary is not None:
        check_boundary(y, boundary)
    _, v = _grid(y, al)
    d2, d3 = _partials(F, y, v)
    return _combine([(1.0, d2, d3)], y, al)


def isoperimetric_residual(
    F: Functional,
    G: Functional,
    lam: float,
    y: LatticeFn,
    alpha,
    boundary: Optional[Tuple[float, float]] = None,
) -> Residual:
    """Euler--Lagrange residual of ``H = F - lam * G``.

    The worked examples carry nonzero boundary data, so the boundary check is
    off by default.
    """
    al = _alpha(alpha)
    if boundary is not None:
        check_boundary(y, boundary)
    _, v = _grid(y, al)
    f2, f3 = _partials(F, y, v)
    g2, g3 = _partials(G, y, v)
    return _combine([(1.0, f2, f3), (-float(lam), g2, g3)], y, al)


def weak_residual(res: Residual, h: LatticeFn) -> float:
    """``int_0^a r h d_q x`` over the nodes below ``a`` (the weak form)."""
    vals = np.where(np.arange(h.lattice.size) >= 1, res.values, 0.0)
    return jackson_int(h.with_values(vals * h.values, 0.0))


# -- worked examples -------------------------------------------------------------


def ml_sample(lattice: QLattice, alpha: float, damped: bool, shift: float = 1.0) -> LatticeFn:
    """``e_{alpha,1}((shift x)^alpha)`` or ``E_{alpha,1}`` with accurate offsets from 1."""
    fn = ml_E if damped else ml_e
    q = lattice.q
    return LatticeFn.sample(
        lattice,
        lambda x: fn(alpha, (shift * x) ** alpha, q),
        offset=lambda x: fn(alpha, (shift * x) ** alpha, q, start=1),
        extend=False,
    )


@dataclass(frozen=True, eq=False)
class IsoperimetricExample:
    F: Functional
    G: Functional
    lam: float
    y: LatticeFn
    alpha: float

    def residual(self, lam: Optional[float] = None) -> Residual:
        lam = self.lam if lam is None else lam
        return isoperimetric_residual(self.F, self.G, lam, self.y, self.alpha)


_ENERGY = Functional(
    d2F=lambda x, y, v: np.zeros_like(x),
    d3F=lambda x, y, v: 2.0 * v,
    description="F = (cD^alpha y)^2",
)


def example_undamped(lattice: QLattice, alpha: float) -> IsoperimetricExample:
    """Energy with constraint ``int e_{alpha,1}(x^alpha) cD^alpha y = l``.

    The extremal is ``y = e_{alpha,1}(x^alpha; q)`` with multiplier 2.  The
    series needs ``a (1 - q) < 1``.
    """
    al = _alpha(alpha)
    q, a = lattice.q, lattice.a
    if not 0 < a * (1 - q) < 1:
        raise ValueError("this example needs 0 < a (1 - q) < 1")
    G = Functional(
        d2F=lambda x, y, v: np.zeros_like(x),
        d3F=lambda x, y, v: ml_e(al, np.asarray(x) ** al, q) * np.ones_like(x),
        description="G = e_{alpha,1}(x^alpha) cD^alpha y",
    )
    return IsoperimetricExample(_ENERGY, G, 2.0, ml_sample(lattice, al, damped=False), al)


def example_damped(lattice: QLattice, alpha: float) -> IsoperimetricExample:
    """Energy with constraint ``int E_{alpha,1}((q x)^alpha) cD^alpha y = l``.

    The extremal is ``y = E_{alpha,1}(x^alpha; q)`` with multiplier 2.
    """
    al = _alpha(alpha)
    q = lattice.q
    G = Functional(
        d2F=lambda x, y, v: np.zeros_like(x),
        d3F=lambda x, y, v: ml_E(al, (q * np.asarray(x)) ** al, q) * np.ones_like(x),
        description="G = E_{alpha,1}((qx)^alpha) cD^alpha y",
    )
    return IsoperimetricExample(_ENERGY, G, 2.0, ml_sample(lattice, al, damped=True), al)


# -- Rayleigh quotient -------------------------------------------------------------


def rayleigh(y: LatticeFn, prob) -> float:
    """``[int p (cD^alpha y)^2 + r y^2] / int w y^2`` for an admissible ``y``."""
    check_boundary(y)
    lat = prob.lattice
    p, r, w = prob.coefficients()
    v = dleft_caputo(y, prob.alpha)
    num = jackson_int(
        LatticeFn(lat, p.values * v.values**2 + r.values * y.values**2,
                  p.zero_value * v.zero_value**2 + r.zero_value * y.zero_value**2)
    )
    den = jackson_int(LatticeFn(lat, w.values * y.values**2, w.zero_value * y.zero_value**2))
    if den < DENOM_TOL:
        raise ZeroDivisionError("trial function has zero weighted norm")
    return num / den
