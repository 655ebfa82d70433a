"""Scalar layer of the modified Bethe ansatz: kernels, eigenvalues, residuals.

Kernels on C^2 spectral parameters:

    g(u, v) = c / (u - v),   f(u, v) = 1 + g(u, v),   h(u, v) = f/g.

Arguments written as sets mean products over all pairs, with the empty
product equal to 1; ubar_i and ubar_ij denote the set with one or two
entries removed.  On top of the kernels sit the inhomogeneous eigenvalue of
the twisted transfer matrix,

    Lam(u, ubar) = (kt - rho) lam1(u) f(ubar, u)
                 + (k  - rho) lam2(u) f(u, ubar)
                 + 2 rho lam1(u) lam2(u) g(u, ubar),

its off-shell residual E(u_i, ubar_i) (the Bethe equations read E = 0), the
analytic Jacobians of both, and the equivalent finite-difference-free T-Q
restatement used by the spectrum-first solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainParams, vacuum_weight_derivatives, vacuum_weights
from .twist import (
    TwistFactorization,
    TwistParams,
    diagonal_factorization,
    factorize_twist,
)

__all__ = [
    "CoincidenceError",
    "SpectralContext",
    "VariableSet",
    "bethe_jacobian",
    "bethe_residual",
    "bethe_residuals",
    "cauchy_determinant_closed",
    "diag_eigenvalue",
    "diag_residual",
    "eigenvalue_gradient",
    "eps_dist",
    "kernel_f",
    "kernel_g",
    "kernel_h",
    "onshell_scale",
    "onshell_tolerance",
    "prod_f",
    "prod_g",
    "prod_h",
    "shift_polynomial",
    "term_F",
    "term_G",
    "tq_polynomial_residual",
    "transfer_eigenvalue",
]


class CoincidenceError(ValueError):
    """Two spectral parameters collide within the distinctness tolerance."""


def eps_dist(c: complex) -> float:
    """Pairwise-distinctness tolerance used throughout the scalar layer."""
    return 1e-9 * max(1.0, abs(c))


def _values(x) -> np.ndarray:
    if isinstance(x, VariableSet):
        return x.values
    return np.atleast_1d(np.asarray(x, dtype=complex))


def kernel_g(u, v, c):
    """g(u, v) = c/(u - v); raises on near-coincident arguments."""
    diff = np.asarray(u, dtype=complex) - np.asarray(v, dtype=complex)
    if np.any(np.abs(diff) <= eps_dist(c)):
        raise CoincidenceError("kernel g evaluated at coincident parameters")
    return c / diff


def kernel_f(u, v, c):
    return 1.0 + kernel_g(u, v, c)


def kernel_h(u, v, c):
    """h(u, v) = f/g = (u - v + c)/c, regular everywhere."""
    diff = np.asarray(u, dtype=complex) - np.asarray(v, dtype=complex)
    return (diff + c) / c


def _pair_product(kernel, a, b, c) -> complex:
    va, vb = _values(a), _values(b)
    if va.size == 0 or vb.size == 0:
        return 1.0 + 0.0j
    return complex(np.prod(kernel(va[:, None], vb[None, :], c)))


def prod_g(a, b, c) -> complex:
    """Product of g over all pairs; either argument may be a set or scalar."""
    return _pair_product(kernel_g, a, b, c)


def prod_f(a, b, c) -> complex:
    return _pair_product(kernel_f, a, b, c)


def prod_h(a, b, c) -> complex:
    return _pair_product(kernel_h, a, b, c)


class VariableSet:
    """Ordered tuple of pairwise-distinct Bethe parameters.

    Centralizes the empty-set conventions and the ubar_i / ubar_ij removal
    operations so no caller reimplements them.
    """

    __slots__ = ("values", "eps")

    def __init__(self, values, eps: float = 1e-9):
        arr = np.atleast_1d(np.asarray(values, dtype=complex)).copy()
        if arr.ndim != 1:
            raise ValueError("Bethe parameters must form a flat sequence")
        if arr.size > 1:
            diffs = np.abs(arr[:, None] - arr[None, :])
            np.fill_diagonal(diffs, np.inf)
            if np.min(diffs) <= eps:
                raise CoincidenceError(
                    f"parameters closer than {eps:g}: {arr.tolist()}"
                )
        arr.setflags(write=False)
        self.values = arr
        self.eps = float(eps)

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i) -> complex:
        return complex(self.values[i])

    def __repr__(self) -> str:
        return f"VariableSet({self.values.tolist()!r})"

    def drop(self, i: int) -> "VariableSet":
        """The set with entry i removed (ubar_i)."""
        return VariableSet(np.delete(self.values, i), self.eps)

    def drop2(self, i: int, j: int) -> "VariableSet":
        """The set with entries i and j removed (ubar_ij)."""
        if i == j:
            raise ValueError("drop2 needs two distinct indices")
        return VariableSet(np.delete(self.values, [i, j]), self.eps)

    def sorted(self) -> "VariableSet":
        order = np.lexsort((self.values.imag, self.values.real))
        return VariableSet(self.values[order], self.eps)


def _as_set(x, c) -> VariableSet:
    if isinstance(x, VariableSet):
        return x
    return VariableSet(x, eps_dist(c))


@dataclass(frozen=True)
class SpectralContext:
    """Chain data plus one factorization branch of the twist."""

    chain: ChainParams
    twist: TwistParams
    fact: TwistFactorization

    @classmethod
    def create(
        cls, chain: ChainParams, twist: TwistParams, branch: str = "minus"
    ) -> "SpectralContext":
        if twist.kappa_plus == 0 and twist.kappa_minus == 0:
            fact = diagonal_factorization(twist)
        else:
            fact = factorize_twist(twist, branch)
        return cls(chain=chain, twist=twist, fact=fact)

    @property
    def c(self) -> complex:
        return self.chain.c

    @property
    def sites(self) -> int:
        return self.chain.sites

    def lam(self, u: complex) -> tuple[complex, complex]:
        return vacuum_weights(self.chain, u)

    def dlam(self, u: complex) -> tuple[complex, complex]:
        return vacuum_weight_derivatives(self.chain, u)

    def roots(self, values) -> VariableSet:
        return VariableSet(values, eps_dist(self.c))


def diag_eigenvalue(ctx: SpectralContext, u, roots, x, y) -> complex:
    """x lam1(u) f(ubar, u) + y lam2(u) f(u, ubar): the diagonal-twist shape."""
    rs = _as_set(roots, ctx.c)
    l1, l2 = ctx.lam(u)
    return x * l1 * prod_f(rs, u, ctx.c) + y * l2 * prod_f(u, rs, ctx.c)


def diag_residual(ctx: SpectralContext, i: int, roots, x, y) -> complex:
    """-x lam1(u_i) f(ubar_i, u_i) + y lam2(u_i) f(u_i, ubar_i)."""
    rs = _as_set(roots, ctx.c)
    ui = rs[i]
    rest = rs.drop(i)
    l1, l2 = ctx.lam(ui)
    return -x * l1 * prod_f(rest, ui, ctx.c) + y * l2 * prod_f(ui, rest, ctx.c)


def transfer_eigenvalue(ctx: SpectralContext, u, roots) -> complex:
    """Inhomogeneous eigenvalue Lam(u, ubar) of the twisted transfer matrix."""
    rs = _as_set(roots, ctx.c)
    t, f = ctx.twist, ctx.fact
    l1, l2 = ctx.lam(u)
    return (
        (t.kappa_tilde - f.rho) * l1 * prod_f(rs, u, ctx.c)
        + (t.kappa - f.rho) * l2 * prod_f(u, rs, ctx.c)
        + 2 * f.rho * l1 * l2 * prod_g(u, rs, ctx.c)
    )


def raising_eigenpart(ctx: SpectralContext, u, roots) -> complex:
    """2 rho lam1 lam2 g(u, ubar): the sector-raising piece of the spectrum.

    Appears both as the third term of the inhomogeneous eigenvalue and as
    the coefficient closing the oversized creation string.
    """
    rs = _as_set(roots, ctx.c)
    l1, l2 = ctx.lam(u)
    return 2 * ctx.fact.rho * l1 * l2 * prod_g(u, rs, ctx.c)


def bethe_residual(ctx: SpectralContext, i: int, roots) -> complex:
    """E(u_i, ubar_i); the inhomogeneous Bethe equations are E = 0."""
    rs = _as_set(roots, ctx.c)
    ui = rs[i]
    rest = rs.drop(i)
    t, f = ctx.twist, ctx.fact
    l1, l2 = ctx.lam(ui)
    return (
        -(t.kappa_tilde - f.rho) * l1 * prod_f(rest, ui, ctx.c)
        + (t.kappa - f.rho) * l2 * prod_f(ui, rest, ctx.c)
        + 2 * f.rho * l1 * l2 * prod_g(ui, rest, ctx.c)
    )


def bethe_residuals(ctx: SpectralContext, roots) -> np.ndarray:
    rs = _as_set(roots, ctx.c)
    return np.array([bethe_residual(ctx, i, rs) for i in range(len(rs))])


def onshell_scale(ctx: SpectralContext, roots) -> float:
    """max(1, |lam1 lam2|) over the set; normalizes on-shell tolerances."""
    rs = _as_set(roots, ctx.c)
    best = 1.0
    for u in rs:
        l1, l2 = ctx.lam(u)
        best = max(best, abs(l1 * l2))
    return best


def onshell_tolerance(ctx: SpectralContext, roots, factor: float = 1e-8) -> float:
    return factor * onshell_scale(ctx, roots)


def eigenvalue_gradient(ctx: SpectralContext, u, roots, i: int) -> complex:
    """Analytic partial derivative of Lam(u, ubar) with respect to u_i.

    d/du_i Lam(u, ubar) = g(u, u_i)^2 / c * [ -(kt - rho) lam1(u) f(ubar_i, u)
        + (k - rho) lam2(u) f(u, ubar_i) + 2 rho lam1 lam2 g(u, ubar_i) ].
    """
    rs = _as_set(roots, ctx.c)
    rest = rs.drop(i)
    t, f = ctx.twist, ctx.fact
    l1, l2 = ctx.lam(u)
    gi = kernel_g(u, rs[i], ctx.c)
    bracket = (
        -(t.kappa_tilde - f.rho) * l1 * prod_f(rest, u, ctx.c)
        + (t.kappa - f.rho) * l2 * prod_f(u, rest, ctx.c)
        + 2 * f.rho * l1 * l2 * prod_g(u, rest, ctx.c)
    )
    return gi ** 2 / ctx.c * bracket


def bethe_jacobian(ctx: SpectralContext, roots) -> np.ndarray:
    """J[i, j] = d E(u_i, ubar_i) / d u_j, exact up to rounding."""
    rs = _as_set(roots, ctx.c)
    n = len(rs)
    c = ctx.c
    t, f = ctx.twist, ctx.fact
    x = t.kappa_tilde - f.rho
    y = t.kappa - f.rho
    jac = np.zeros((n, n), dtype=complex)
    for i in range(n):
        ui = rs[i]
        rest = rs.drop(i)
        l1, l2 = ctx.lam(ui)
        d1, d2 = ctx.dlam(ui)
        for j in range(n):
            if j == i:
                p1 = prod_f(rest, ui, c)
                p2 = prod_f(ui, rest, c)
                p3 = prod_g(ui, rest, c)
                dp1 = 0.0 + 0.0j
                dp2 = 0.0 + 0.0j
                dp3 = 0.0 + 0.0j
                for k in range(n):
                    if k == i:
                        continue
                    pair = rs.drop2(i, k)
                    gik = kernel_g(ui, rs[k], c)
                    dp1 += gik ** 2 / c * prod_f(pair, ui, c)
                    dp2 -= gik ** 2 / c * prod_f(ui, pair, c)
                    dp3 -= gik ** 2 / c * prod_g(ui, pair, c)
                jac[i, i] = (
                    -x * (d1 * p1 + l1 * dp1)
                    + y * (d2 * p2 + l2 * dp2)
                    + 2 * f.rho * ((d1 * l2 + l1 * d2) * p3 + l1 * l2 * dp3)
                )
            else:
                pair = rs.drop2(i, j)
                gij = kernel_g(ui, rs[j], c)
                jac[i, j] = gij ** 2 / c * (
                    x * l1 * prod_f(pair, ui, c)
                    + y * l2 * prod_f(ui, pair, c)
                    + 2 * f.rho * l1 * l2 * prod_g(ui, pair, c)
                )
    return jac


def term_F(ctx: SpectralContext, u, i: int, roots) -> complex:
    """Two-parameter lowering coefficient in the annihilation-side action.

    In each summand, lam1 takes the argument whose f-products face the rest
    of the set from the left; the u <-> u_i mirror swaps everything at once.
    Fixed by a coefficient fit against the explicit matrix action.
    """
    rs = _as_set(roots, ctx.c)
    ui = rs[i]
    rest = rs.drop(i)
    c = ctx.c
    l1u, l2u = ctx.lam(u)
    l1i, l2i = ctx.lam(ui)
    return (
        kernel_g(u, ui, c) * l1i * l2u * prod_f(u, rest, c) * prod_f(rest, ui, c)
        + kernel_g(ui, u, c) * l1u * l2i * prod_f(ui, rest, c) * prod_f(rest, u, c)
    )


def term_G(ctx: SpectralContext, u, i: int, j: int, roots) -> complex:
    """Pairwise lowering coefficient in the annihilation-side action.

    Same lam pairing rule as term_F: lam2 rides with the argument that is
    dressed by f(., rest) from the left.  Fixed by the same coefficient fit.
    """
    rs = _as_set(roots, ctx.c)
    ui, uj = rs[i], rs[j]
    rest = rs.drop2(i, j)
    c = ctx.c
    l1i, l2i = ctx.lam(ui)
    l1j, l2j = ctx.lam(uj)
    return (
        kernel_g(u, ui, c)
        * kernel_g(uj, u, c)
        * l1j
        * l2i
        * kernel_f(ui, uj, c)
        * prod_f(ui, rest, c)
        * prod_f(rest, uj, c)
        + kernel_g(u, uj, c)
        * kernel_g(ui, u, c)
        * l1i
        * l2j
        * kernel_f(uj, ui, c)
        * prod_f(uj, rest, c)
        * prod_f(rest, ui, c)
    )


def cauchy_determinant_closed(vs, us, c) -> complex:
    """Closed form of det[ g(v_i, u_j) ]: g(vbar, ubar) over the pair gaps."""
    va, ua = _values(vs), _values(us)
    if va.size != ua.size:
        raise ValueError("Cauchy determinant needs equally sized sets")
    n = va.size
    denom = 1.0 + 0.0j
    for i in range(n):
        for j in range(i + 1, n):
            denom *= kernel_g(ua[i], ua[j], c) * kernel_g(va[j], va[i], c)
    return prod_g(va, ua, c) / denom


def shift_polynomial(coeffs, s: complex) -> np.ndarray:
    """Coefficients (low to high) of p(u + s) given those of p(u)."""
    a = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    out = np.zeros_like(a)
    for k, ck in enumerate(a):
        for m in range(k + 1):
            out[m] += ck * math.comb(k, m) * s ** (k - m)
    return out


def _lam_coeffs(ctx: SpectralContext) -> tuple[np.ndarray, np.ndarray]:
    from numpy.polynomial import polynomial as P

    n = ctx.sites
    theta = np.array(ctx.chain.theta, dtype=complex)
    l1 = P.polyfromroots(theta - ctx.c) / ctx.c ** n
    l2 = P.polyfromroots(theta) / ctx.c ** n
    return l1, l2


def tq_polynomial_residual(ctx: SpectralContext, lam_coeffs, q_coeffs) -> float:
    """Max coefficient modulus of Lam Q - (kt-rho) lam1 Q(.-c) - (k-rho) lam2 Q(.+c) - 2 rho c^N lam1 lam2.

    lam_coeffs and q_coeffs are low-to-high coefficient arrays; Q must be
    monic of degree N.
    """
    from numpy.polynomial import polynomial as P

    q = np.atleast_1d(np.asarray(q_coeffs, dtype=complex))
    n = ctx.sites
    if q.size != n + 1:
        raise ValueError(f"Q must have degree {n}, got degree {q.size - 1}")
    if abs(q[-1] - 1.0) > 1e-10:
        raise ValueError("Q must be monic")
    lam = np.atleast_1d(np.asarray(lam_coeffs, dtype=complex))
    l1, l2 = _lam_coeffs(ctx)
    t, f = ctx.twist, ctx.fact
    lhs = P.polymul(lam, q)
    rhs = (
        (t.kappa_tilde - f.rho) * P.polymul(l1, shift_polynomial(q, -ctx.c))
        + (t.kappa - f.rho) * P.polymul(l2, shift_polynomial(q, ctx.c))
    )
    rhs = P.polyadd(rhs, 2 * f.rho * ctx.c ** n * P.polymul(l1, l2))
    res = P.polysub(lhs, rhs)
    return float(np.max(np.abs(res)))
