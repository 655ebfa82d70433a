"""Twist matrix and its symmetric LDL-type factorization.

A generic 2x2 twist K = [[kappa_tilde, kappa_plus], [kappa_minus, kappa]]
with nonzero off-diagonal product factorizes as K = L D L where

    L = sqrt(mu) [[1, rho/kappa_minus], [rho/kappa_plus, 1]],
    D = diag(kappa_tilde - rho, kappa - rho),

rho is a root of rho^2 - (kappa_tilde + kappa) rho + kappa_plus kappa_minus
and mu = (kappa_tilde + kappa - rho) / (kappa_tilde + kappa - 2 rho).  The
similarity by L turns the monodromy blocks into the "modified" operators the
modified algebraic Bethe ansatz is built from.  All square roots take the
principal branch so both rho branches are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainParams, vacuum_state, vacuum_weights
from .linalg import MatrixPolynomial
from .chain import MonodromyFamily

__all__ = [
    "TwistDegeneracyError",
    "TwistFactorization",
    "TwistParams",
    "build_modified_operators",
    "diagonal_factorization",
    "factorize_twist",
    "modified_diagonal_residual",
    "twist_alpha",
    "vacuum_action_residuals",
]


class TwistDegeneracyError(ValueError):
    """The requested factorization does not exist for this twist."""


@dataclass(frozen=True)
class TwistParams:
    """Entries of the 2x2 twist matrix."""

    kappa_tilde: complex
    kappa: complex
    kappa_plus: complex
    kappa_minus: complex

    def __post_init__(self):
        for name in ("kappa_tilde", "kappa", "kappa_plus", "kappa_minus"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def gamma(self) -> complex:
        """det K = kappa_tilde kappa - kappa_plus kappa_minus."""
        return self.kappa_tilde * self.kappa - self.kappa_plus * self.kappa_minus

    @property
    def trace(self) -> complex:
        return self.kappa_tilde + self.kappa

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.kappa_tilde, self.kappa_plus], [self.kappa_minus, self.kappa]],
            dtype=complex,
        )


@dataclass(frozen=True)
class TwistFactorization:
    """One branch of the K = L D L factorization.

    ratio_plus = rho/kappa_plus and ratio_minus = rho/kappa_minus are stored
    explicitly so the diagonal (U(1)) limit, where rho and the off-diagonal
    entries vanish together, stays finite downstream.
    """

    rho: complex
    mu: complex
    alpha: complex
    ratio_plus: complex
    ratio_minus: complex
    l_factor: np.ndarray
    d_factor: np.ndarray
    branch: str


def twist_alpha(twist: TwistParams) -> complex:
    """Twist eigenvalue entering the plain-ansatz eigenvalue branch."""
    kt, k = twist.kappa_tilde, twist.kappa
    disc = (k - kt) ** 2 + 4 * twist.kappa_plus * twist.kappa_minus
    return (k + kt + np.sqrt(complex(disc))) / 2


def factorize_twist(twist: TwistParams, branch: str = "minus") -> TwistFactorization:
    """Factorize a twist with nonzero off-diagonal product.

    branch selects the root of the rho quadratic: "minus" takes
    (trace - sqrt(disc))/2 under the principal square root, "plus" the
    other one.
    """
    if branch not in ("minus", "plus"):
        raise ValueError(f"branch must be 'minus' or 'plus', got {branch!r}")
    kp, km = twist.kappa_plus, twist.kappa_minus
    if kp * km == 0:
        raise TwistDegeneracyError(
            "kappa_plus * kappa_minus = 0: the L D L factorization degenerates; "
            "use diagonal_factorization for the U(1) limit"
        )
    s = twist.trace
    disc = s ** 2 - 4 * kp * km
    root = np.sqrt(complex(disc))
    rho = (s - root) / 2 if branch == "minus" else (s + root) / 2
    denom = s - 2 * rho
    scale = max(1.0, abs(s))
    if abs(denom) <= 1e-12 * scale:
        other = "plus" if branch == "minus" else "minus"
        raise TwistDegeneracyError(
            f"kappa_tilde + kappa - 2 rho vanishes on branch {branch!r} "
            f"(mu singular); try branch {other!r}"
        )
    mu = (s - rho) / denom
    ratio_plus = rho / kp
    ratio_minus = rho / km
    sq = np.sqrt(complex(mu))
    l_factor = sq * np.array([[1.0, ratio_minus], [ratio_plus, 1.0]], dtype=complex)
    d_factor = np.diag([twist.kappa_tilde - rho, twist.kappa - rho]).astype(complex)
    return TwistFactorization(
        rho=complex(rho),
        mu=complex(mu),
        alpha=twist_alpha(twist),
        ratio_plus=complex(ratio_plus),
        ratio_minus=complex(ratio_minus),
        l_factor=l_factor,
        d_factor=d_factor,
        branch=branch,
    )


def diagonal_factorization(twist: TwistParams) -> TwistFactorization:
    """Trivial factorization of a diagonal twist (kappa_plus = kappa_minus = 0).

    rho = 0, mu = 1 and L = I, so the modified operators reduce to the bare
    monodromy blocks and the machinery degrades to the plain ansatz.
    """
    if twist.kappa_plus != 0 or twist.kappa_minus != 0:
        raise TwistDegeneracyError(
            "diagonal_factorization needs kappa_plus = kappa_minus = 0"
        )
    return TwistFactorization(
        rho=0.0 + 0.0j,
        mu=1.0 + 0.0j,
        alpha=twist_alpha(twist),
        ratio_plus=0.0 + 0.0j,
        ratio_minus=0.0 + 0.0j,
        l_factor=np.eye(2, dtype=complex),
        d_factor=np.diag([twist.kappa_tilde, twist.kappa]).astype(complex),
        branch="diagonal",
    )


def build_modified_operators(
    family: MonodromyFamily, fact: TwistFactorization
) -> MonodromyFamily:
    """Blocks of L T_a(u) L, as matrix polynomials.

    Written out with the stored ratios rho/kappa_plus and rho/kappa_minus so
    the diagonal limit (all ratios zero) returns the input family scaled by
    mu = 1, i.e. unchanged.
    """
    rp, rm, mu = fact.ratio_plus, fact.ratio_minus, fact.mu
    t11, t12, t21, t22 = family.entries()
    n11 = mu * (t11 + rp * t12 + rm * t21 + (rp * rm) * t22)
    n12 = mu * (t12 + rm * (t11 + t22) + rm ** 2 * t21)
    n21 = mu * (t21 + rp * (t11 + t22) + rp ** 2 * t12)
    n22 = mu * (t22 + rp * t12 + rm * t21 + (rp * rm) * t11)
    return MonodromyFamily(n11, n12, n21, n22)


def modified_diagonal_residual(
    modified: MonodromyFamily,
    transfer: MatrixPolynomial,
    twist: TwistParams,
    fact: TwistFactorization,
    u: complex,
) -> float:
    """|| (kt - rho) nu11(u) + (k - rho) nu22(u) - t(u) ||_F."""
    combo = (twist.kappa_tilde - fact.rho) * modified.t11(u) + (
        twist.kappa - fact.rho
    ) * modified.t22(u)
    return float(np.linalg.norm(combo - transfer(u)))


def vacuum_action_residuals(
    modified: MonodromyFamily,
    fact: TwistFactorization,
    params: ChainParams,
    u: complex,
) -> dict[str, float]:
    """Residuals of the modified-operator actions on the reference state.

    nu11 and nu22 act diagonally up to a rho/kappa_plus leak into the
    creation operator nu12; nu21 annihilates the vacuum only up to the same
    leak at second order.
    """
    v0 = vacuum_state(params.sites)
    l1, l2 = vacuum_weights(params, u)
    rp = fact.ratio_plus
    b = modified.t12(u) @ v0
    r11 = np.linalg.norm(modified.t11(u) @ v0 - l1 * v0 - rp * b)
    r22 = np.linalg.norm(modified.t22(u) @ v0 - l2 * v0 - rp * b)
    r21 = np.linalg.norm(
        modified.t21(u) @ v0 - rp * (l1 + l2) * v0 - rp ** 2 * b
    )
    return {
        "nu11_vacuum": float(r11),
        "nu22_vacuum": float(r22),
        "nu21_vacuum": float(r21),
    }
