"""Dense complex linear algebra for small spin-chain Hilbert spaces.

Everything works on plain complex numpy arrays.  The largest object the
workbench ever touches is a 2^12 x 2^12 matrix, comfortably inside LAPACK
territory, so numpy does the heavy lifting here and this module adds the
validation and the matrix-polynomial bookkeeping the transfer-matrix
machinery needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceError",
    "MatrixPolynomial",
    "MAX_EIG_DIM",
    "determinant",
    "eigenpairs",
    "kron",
    "kron_chain",
    "poly_from_samples",
]

# Dimension guard for dense eigendecompositions; beyond this the workbench
# is being used outside its desk-scale design envelope.
MAX_EIG_DIM = 2 ** 12


class ConvergenceError(RuntimeError):
    """The iterative eigensolver backend did not converge."""


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError(f"matrix must be non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _square(m) -> np.ndarray:
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product, first factor on the slow (most significant) index."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def kron_chain(ops) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left factor slowest."""
    mats = [_as_matrix(op) for op in ops]
    if not mats:
        raise ValueError("kron_chain needs at least one factor")
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def determinant(m) -> complex:
    """Determinant of a square complex matrix (LU with partial pivoting)."""
    return complex(np.linalg.det(_square(m)))


def eigenpairs(m) -> list[tuple[complex, np.ndarray]]:
    """Right eigenpairs of a dense complex matrix.

    Returns [(value, vector), ...] sorted by (Re, Im) of the value; each
    vector is normalized to unit Euclidean norm.  Delegates to LAPACK, whose
    internal iteration cap plays the role of a convergence budget.
    """
    a = _square(m)
    if a.shape[0] > MAX_EIG_DIM:
        raise ValueError(
            f"dimension {a.shape[0]} exceeds the dense-eigensolver cap {MAX_EIG_DIM}"
        )
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    order = np.lexsort((vals.imag, vals.real))
    return [(complex(vals[k]), np.array(vecs[:, k])) for k in order]


@dataclass(frozen=True)
class MatrixPolynomial:
    """Matrix-valued polynomial sum_k coeffs[k] * u**k.

    coeffs has shape (degree + 1, d, d).  Evaluation uses Horner's scheme;
    coefficients are stored exactly as given (no trimming), so the derivative
    at zero can be read off as coefficient(1).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError(f"coeffs must have shape (k, d, d), got {c.shape}")
        if c.shape[0] == 0:
            raise ValueError("need at least the constant coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def coefficient(self, k: int) -> np.ndarray:
        """k-th coefficient matrix, zero matrix beyond the stored degree."""
        if k < 0:
            raise ValueError("coefficient index must be non-negative")
        if k > self.degree:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return np.array(self.coeffs[k])

    def __call__(self, u: complex) -> np.ndarray:
        acc = np.array(self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            acc = acc * u + c
        return acc

    def derivative(self) -> "MatrixPolynomial":
        if self.degree == 0:
            return MatrixPolynomial(np.zeros((1, self.dim, self.dim), dtype=complex))
        k = np.arange(1, self.degree + 1, dtype=complex)
        return MatrixPolynomial(self.coeffs[1:] * k[:, None, None])

    def _binary(self, other: "MatrixPolynomial", sign: complex) -> "MatrixPolynomial":
        if not isinstance(other, MatrixPolynomial):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        out = np.zeros((n, self.dim, self.dim), dtype=complex)
        out[: self.coeffs.shape[0]] += self.coeffs
        out[: other.coeffs.shape[0]] += sign * other.coeffs
        return MatrixPolynomial(out)

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __mul__(self, scalar):
        return MatrixPolynomial(self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return MatrixPolynomial(-self.coeffs)


def poly_from_samples(samples, degree: int) -> MatrixPolynomial:
    """Interpolate a matrix polynomial of the given degree through samples.

    samples is an iterable of (node, matrix) pairs with pairwise distinct
    nodes; at least degree + 1 samples are required.  The entrywise fit uses
    a Vandermonde least-squares solve, which reduces to plain interpolation
    in the square case.
    """
    pairs = list(samples)
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if len(pairs) < degree + 1:
        raise ValueError(
            f"need at least {degree + 1} samples for degree {degree}, got {len(pairs)}"
        )
    nodes = np.array([u for u, _ in pairs], dtype=complex)
    mats = np.stack([_square(m) for _, m in pairs])
    if mats.shape[1] != mats.shape[2]:
        raise ValueError("sample matrices must be square")
    scale = max(1.0, float(np.max(np.abs(nodes))))
    diffs = np.abs(nodes[:, None] - nodes[None, :])
    np.fill_diagonal(diffs, np.inf)
    if np.min(diffs) <= 1e-12 * scale:
        raise ValueError("coincident interpolation nodes")
    vand = nodes[:, None] ** np.arange(degree + 1)[None, :]
    flat = mats.reshape(len(pairs), -1)
    coef, *_ = np.linalg.lstsq(vand, flat, rcond=None)
    return MatrixPolynomial(coef.reshape(degree + 1, mats.shape[1], mats.shape[2]))
