"""Numerical checks of the operator identities on the lattice.

Every check returns :class:`Check` records.  A record passes when
``residual <= tol * scale``, where ``scale`` is ``1`` plus the largest
magnitude among the terms that were compared.  The default tolerances live in
:data:`TOLERANCES`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import product
from typing import Dict, Iterable, List, Mapping, Sequence

import numpy as np

from .qcore import (
    LatticeFn,
    QLattice,
    SymLatticeFn,
    dq,
    jackson_int,
    jackson_int_partial,
    jackson_int_sym,
    qgamma,
)
from .qfrac import (
    dleft_caputo,
    dleft_rl,
    dright_caputo,
    dright_rl,
    dright_rl_magnitude,
    ileft,
    ileft_order,
    iright,
    iright_order,
    kernel,
    sup_norm,
)
from .qspecial import TrigBasis
from .variational import example_undamped, example_damped, ml_sample

TOLERANCES: Dict[str, float] = {
    "calculus": 1e-10,
    "identity": 1e-9,
    "by_parts": 1e-8,
    "orthogonality": 1e-8,
    "eigen": 1e-8,
    "isoperimetric": 1e-7,
    "spectrum_residual": 1e-4,
}

Q_GRID = (0.3, 0.5, 0.8)
ALPHA_GRID = (0.6, 0.75, 0.9)
SEMIGROUP_ORDERS = (0.3, 0.4, 0.5)
POWERS = (0, 1, 2, 3)


@dataclass(frozen=True)
class Check:
    name: str
    params: str
    residual: float
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.tol * self.scale

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def monomial(lattice: QLattice, k: int) -> LatticeFn:
    """``x^k`` with its value at ``a/q``."""
    return LatticeFn.sample(lattice, lambda x: x**k)


def _node_check(name, params, lhs: np.ndarray, rhs: np.ndarray, tol) -> Check:
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    res = float(np.max(np.abs(lhs - rhs)))
    scale = 1.0 + float(max(np.max(np.abs(lhs)), np.max(np.abs(rhs))))
    return Check(name, params, res, scale, tol)


def _sum_check(name, params, lhs: float, terms: Sequence[float], tol) -> Check:
    res = abs(lhs - math.fsum(terms))
    scale = 1.0 + max(abs(lhs), *(abs(t) for t in terms))
    return Check(name, params, res, scale, tol)


def _product(f: LatticeFn, g: LatticeFn) -> LatticeFn:
    """Pointwise product that ignores domain markers (used inside integrals)."""
    return LatticeFn(f.lattice, f.values * g.values, f.zero_value * g.zero_value)


def _tol(tols: Mapping[str, float], key: str) -> float:
    return float(tols.get(key, TOLERANCES[key]))


# -- q-calculus ---------------------------------------------------------------------


def check_calculus(lattice: QLattice, tols: Mapping[str, float] = TOLERANCES) -> List[Check]:
    """Fundamental theorem and q-integration by parts for monomial pairs."""
    tol = _tol(tols, "calculus")
    tag = f"q={lattice.q}"
    out = []
    for i in POWERS:
        F = monomial(lattice, i)
        out.append(
            _sum_check("ftc", f"{tag} F=x^{i}", jackson_int(dq(F)), [F.values[0], -F.zero_value], tol)
        )
    # integrate over [0, a] and over the interior interval [a q^5, a q]
    for i, j in product(POWERS, POWERS):
        f, g = monomial(lattice, i), monomial(lattice, j)
        lhs_fn = _product(f, dq(g))
        rest_fn = _product(dq(f), g.dilate())
        for lo, hi in ((None, 0), (5, 1)):
            lhs = jackson_int_partial(lhs_fn, lo, hi)
            rest = jackson_int_partial(rest_fn, lo, hi)
            top = f.values[hi] * g.values[hi]
            bottom = f.zero_value * g.zero_value if lo is None else f.values[lo] * g.values[lo]
            where = "[0,a]" if lo is None else "[aq^5,aq]"
            out.append(_sum_check("q-by-parts", f"{tag} f=x^{i} g=x^{j} {where}", lhs, [top, -bottom, -rest], tol))
    return out


# -- fractional operators ------------------------------------------------------------


def check_operators(
    lattice: QLattice, alpha: float, tols: Mapping[str, float] = TOLERANCES, extended: bool = True
) -> List[Check]:
    """Composition rules of the fractional operators on ``1, x, x^2, x^3``.

    ``extended=False`` skips the two right-sided rules (right inverse, right primitive).
    """
    tol = _tol(tols, "identity")
    tol5 = _tol(tols, "by_parts")
    depth = lattice.depth
    q, a = lattice.q, lattice.a
    tag = f"q={q} alpha={alpha}"
    out = []
    corr = a ** (alpha - 1.0) / qgamma(alpha, q) * kernel(q, alpha, lattice.size)
    for i in POWERS:
        f = monomial(lattice, i)
        fr = f.reported()
        p = f"{tag} f=x^{i}"
        g = ileft(f, alpha)
        out.append(_node_check("rl-left-inverse", p, dleft_rl(g, alpha).reported(), fr, tol))
        out.append(_node_check("caputo-left-inverse", p, dleft_caputo(g, alpha).reported(), fr, tol))
        out.append(
            _node_check("left-caputo-primitive", p, ileft(dleft_caputo(f, alpha), alpha).reported(), fr - f.zero_value, tol)
        )
        f0 = LatticeFn(lattice, f.values - f.zero_value, 0.0, None, f.offsets)
        out.append(
            _node_check("caputo-rl-relation", p, dleft_caputo(f, alpha).reported(), dleft_rl(f0, alpha).reported(), tol)
        )
        if not extended:
            continue
        # a/q value of the right integral follows the extension convention
        boundary = iright_order(f, 1.0 - alpha).above
        out.append(
            _node_check(
                "right-rl-primitive",
                p,
                iright(dright_rl(f, alpha), alpha).reported(),
                fr - corr[:depth] * boundary,
                tol5,
            )
        )
        out.append(_right_inverse_check(p, f, alpha, tol))
    return out


def _right_inverse_check(params: str, f: LatticeFn, alpha: float, tol: float) -> Check:
    """``D^alpha_{a-} I^alpha_{a-} f = f`` below ``a``, node-wise relative to the summands.

    The right derivative differences right integrals that approach a constant
    near 0, so its rounding error grows like ``eps / x``.  Each node residual is
    divided by ``1 + s_n`` with ``s_n`` the summand magnitude there.
    """
    depth = f.lattice.depth
    g = iright(f, alpha)
    lhs = dright_rl(g, alpha).values[1:depth]
    s = dright_rl_magnitude(g, alpha)[1:depth] + np.abs(f.values[1:depth])
    res = float(np.max(np.abs(lhs - f.values[1:depth]) / (1.0 + s)))
    return Check("rl-right-inverse", params, res, 1.0, tol)


def check_semigroup(lattice: QLattice, tols: Mapping[str, float] = TOLERANCES) -> List[Check]:
    tol = _tol(tols, "identity")
    out = []
    for i in POWERS:
        f = monomial(lattice, i)
        for al, be in product(SEMIGROUP_ORDERS, SEMIGROUP_ORDERS):
            p = f"q={lattice.q} alpha={al} beta={be} f=x^{i}"
            left = ileft_order(ileft_order(f, be), al).reported()
            out.append(_node_check("semigroup-left", p, left, ileft_order(f, al + be).reported(), tol))
            right = iright_order(iright_order(f, be), al).reported()
            out.append(_node_check("semigroup-right", p, right, iright_order(f, al + be).reported(), tol))
    return out


def check_by_parts(lattice: QLattice, alpha: float, tols: Mapping[str, float] = TOLERANCES) -> List[Check]:
    """Fractional integration by parts for monomial pairs."""
    tol = _tol(tols, "by_parts")
    tag = f"q={lattice.q} alpha={alpha}"
    out = []
    fs = [monomial(lattice, i) for i in POWERS]
    for (i, f), (j, g) in product(enumerate(fs), enumerate(fs)):
        p = f"{tag} f=x^{i} g=x^{j}"
        lhs = jackson_int(_product(g, ileft(f, alpha)))
        out.append(_sum_check("integral-adjoint", p, lhs, [jackson_int(_product(f, iright(g, alpha)))], tol))

        # int f D^a_{0+} g = [f(x/q) I^{1-a}_{0+} g(x)]_0^a + int g cD^a_{a-} f
        h = ileft_order(g, 1.0 - alpha)
        lhs = jackson_int(_product(f, dleft_rl(g, alpha)))
        rest = jackson_int(_product(g, dright_caputo(f, alpha)))
        out.append(_sum_check("by-parts-rl", p, lhs, [f.above * h.values[0], -f.zero_value * h.zero_value, rest], tol))

        # int g cD^a_{0+} f = [(I^{1-a}_{a-} g)(x/q) f(x)]_0^a + int f D^a_{a-} g
        h = iright_order(g, 1.0 - alpha)
        lhs = jackson_int(_product(g, dleft_caputo(f, alpha)))
        rest = jackson_int(_product(f, dright_rl(g, alpha)))
        out.append(
            _sum_check("by-parts-caputo", p, lhs, [h.above * f.values[0], -h.zero_value * f.zero_value, rest], tol)
        )
    return out


def check_norm_bound(
    lattice: QLattice, alpha: float, samples: int = 50, seed: int = 0, tols: Mapping[str, float] = TOLERANCES
) -> List[Check]:
    """``sup |I^alpha f| <= a^alpha / Gamma_q(alpha + 1) sup |f|`` for random cubics."""
    rng = np.random.default_rng(seed)
    bound = lattice.a**alpha / qgamma(alpha + 1.0, lattice.q)
    worst = 0.0
    for _ in range(samples):
        c = rng.uniform(-1.0, 1.0, 4)
        f = LatticeFn.sample(lattice, lambda x: np.polyval(c, x), extend=False)
        worst = max(worst, sup_norm(ileft(f, alpha)) / sup_norm(f))
    # the ratio must not exceed the constant; residual is the excess
    excess = max(0.0, worst - bound)
    return [Check("sup-bound", f"q={lattice.q} alpha={alpha} samples={samples}", excess, 1.0 + bound, _tol(tols, "identity"))]


# -- q-trigonometric basis -----------------------------------------------------------


def check_orthogonality(lattice: QLattice, K: int = 5, tols: Mapping[str, float] = TOLERANCES) -> List[Check]:
    """Gram matrices of the sine basis on ``[0, a]`` and of ``C_q``, ``S_q`` on ``[-a, a]``."""
    tol = _tol(tols, "orthogonality")
    basis = TrigBasis.build(lattice, K, k_max=max(K, 8))
    q, a = lattice.q, lattice.a
    tag = f"q={q} K={K}"

    def half(u, v):
        return jackson_int(LatticeFn(lattice, u * v, 0.0))

    def sym(u, v, parity, zero=0.0):
        return jackson_int_sym(SymLatticeFn(lattice, u * v, parity * u * v, zero))

    cases = [
        ("gram-sine", lambda k: basis.sine_nodes(k), lambda u, v: half(u, v), a * math.sqrt(q) / 2.0),
        ("gram-sym-sine", lambda k: basis.sine_nodes(k, "q"), lambda u, v: sym(u, v, 1.0), a / math.sqrt(q)),
        ("gram-sym-cosine", lambda k: basis.cosine_nodes(k, "sqrt"), lambda u, v: sym(u, v, 1.0, 1.0), a),
    ]
    out = []
    for name, table, integral, factor in cases:
        for j in range(1, K + 1):
            for k in range(j, K + 1):
                value = integral(table(j), table(k))
                mu = max(basis.mu[j - 1], basis.mu[k - 1])
                if j == k:
                    target = factor * basis.mu[k - 1]
                    out.append(Check(name, f"{tag} k={k}", abs(value - target), abs(target), tol))
                else:
                    out.append(Check(name, f"{tag} j={j} k={k}", abs(value), factor * mu, tol))
    ones = np.ones(lattice.size)
    out.append(Check("gram-sym-cosine", f"{tag} w=0", abs(sym(ones, ones, 1.0, 1.0) - 2 * a), 2 * a, tol))
    for k in range(1, K + 1):
        value = sym(ones, basis.cosine_nodes(k, "sqrt"), 1.0, 1.0)
        out.append(Check("gram-sym-cosine", f"{tag} j=0 k={k}", abs(value), a * basis.mu[k - 1], tol))
    # sines are odd and cosines even, so the mixed block vanishes by symmetry
    for j, k in product(range(1, K + 1), range(1, K + 1)):
        s, c = basis.sine_nodes(j, "q"), basis.cosine_nodes(k, "sqrt")
        value = sym(s, c, -1.0)
        out.append(Check("gram-sym-mixed", f"{tag} j={j} k={k}", abs(value), a * basis.mu[k - 1], tol))
    return out


def check_derivative_relations(lattice: QLattice, ks: Iterable[int] = (1, 2), tols: Mapping[str, float] = TOLERANCES) -> List[Check]:
    """``D_q S_q(wx/a) = w/(a(1-q)) C_q(sqrt(q) w x/a)`` and the cosine analogue."""
    tol = _tol(tols, "identity")
    ks = list(ks)
    basis = TrigBasis.build(lattice, max(ks), k_max=max(max(ks), 8))
    q, a = lattice.q, lattice.a
    depth = lattice.depth
    out = []
    for k in ks:
        c = basis.w[k - 1] / (a * (1.0 - q))
        s = LatticeFn(lattice, basis.sine_nodes(k), 0.0)
        cos = LatticeFn(lattice, basis.cosine_nodes(k), 1.0, None, basis.cosine_offsets(k))
        p = f"q={q} w=w_{k}"
        out.append(
            _node_check("dS", p, dq(s).values[: depth], c * basis.cosine_nodes(k, "sqrt")[:depth], tol)
        )
        out.append(
            _node_check("dC", p, dq(cos).values[: depth], -c * basis.sine_nodes(k, "sqrt")[:depth], tol)
        )
    return out


# -- suites ---------------------------------------------------------------------------


def operator_suite(
    qs: Sequence[float] = Q_GRID,
    alphas: Sequence[float] = ALPHA_GRID,
    a: float = 1.0,
    depth: int = 64,
    tols: Mapping[str, float] = TOLERANCES,
) -> List[Check]:
    """Calculus, composition, semigroup, by-parts and norm checks over a grid."""
    out = []
    for q in qs:
        lat = QLattice(q, a, depth)
        out += check_calculus(lat, tols)
        out += check_semigroup(lat, tols)
        for al in alphas:
            out += check_operators(lat, al, tols)
            out += check_by_parts(lat, al, tols)
            out += check_norm_bound(lat, al, tols=tols)
    return out


def basis_suite(
    qs: Sequence[float] = Q_GRID, a: float = 1.0, depth: int = 64, tols: Mapping[str, float] = TOLERANCES
) -> List[Check]:
    out = []
    for q in qs:
        lat = QLattice(q, a, depth)
        out += check_orthogonality(lat, 5, tols)
        out += check_derivative_relations(lat, (1, 2), tols)
    return out


def summarize(checks: Sequence[Check]) -> Dict[str, dict]:
    """Worst residual ratio and pass count per check name."""
    out: Dict[str, dict] = {}
    for c in checks:
        entry = out.setdefault(c.name, {"count": 0, "failed": 0, "worst_ratio": 0.0, "tol": c.tol})
        entry["count"] += 1
        entry["failed"] += 0 if c.passed else 1
        ratio = c.residual / c.scale if np.isfinite(c.residual) else math.inf
        entry["worst_ratio"] = max(entry["worst_ratio"], ratio)
    return out



# -- Mittag-Leffler eigenfunctions and the worked variational examples ---------------


def check_mittag_leffler(lattice: QLattice, alpha: float, tols: Mapping[str, float] = TOLERANCES) -> List[Check]:
    """``cD^alpha e(x^alpha) = e(x^alpha)`` and ``cD^alpha E(x^alpha) = E((qx)^alpha)``.

    The undamped series converges only for ``x (1 - q) < 1``, so its check is
    skipped when ``a (1 - q) >= 1``.  Errors are relative, node by node.
    """
    tol = _tol(tols, "eigen")
    q, depth = lattice.q, lattice.depth
    tag = f"q={q} a={lattice.a} alpha={alpha}"
    out = []
    if lattice.a * (1.0 - q) < 1.0:
        y = ml_sample(lattice, alpha, damped=False)
        got = dleft_caputo(y, alpha).reported()
        out.append(Check("ml-eigen-undamped", tag, float(np.max(np.abs(got - y.reported()) / np.abs(y.reported()))), 1.0, tol))
    y = ml_sample(lattice, alpha, damped=True)
    target = ml_sample(lattice, alpha, damped=True, shift=q).reported()
    got = dleft_caputo(y, alpha).reported()
    out.append(Check("ml-eigen-damped", tag, float(np.max(np.abs(got - target) / np.abs(target))), 1.0, tol))
    return out


def check_isoperimetric(lattice: QLattice, alpha: float, tols: Mapping[str, float] = TOLERANCES) -> List[Check]:
    """Residuals of the two worked isoperimetric examples, relative to their summands."""
    tol = _tol(tols, "isoperimetric")
    tag = f"q={lattice.q} a={lattice.a} alpha={alpha}"
    out = []
    if 0.0 < lattice.a * (1.0 - lattice.q) < 1.0:
        out.append(Check("isoperimetric-undamped", tag, example_undamped(lattice, alpha).residual().scaled_sup(), 1.0, tol))
    out.append(Check("isoperimetric-damped", tag, example_damped(lattice, alpha).residual().scaled_sup(), 1.0, tol))
    return out


def full_suite(
    qs: Sequence[float] = Q_GRID,
    alphas: Sequence[float] = ALPHA_GRID,
    a: float = 1.0,
    depth: int = 64,
    tols: Mapping[str, float] = TOLERANCES,
) -> List[Check]:
    """Every check above over the ``(q, alpha)`` grid."""
    out = operator_suite(qs, alphas, a, depth, tols) + basis_suite(qs, a, depth, tols)
    for q in qs:
        lat = QLattice(q, a, depth)
        for al in alphas:
            out += check_mittag_leffler(lat, al, tols)
            out += check_isoperimetric(lat, al, tols)
    return out
