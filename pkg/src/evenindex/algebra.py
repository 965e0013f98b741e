"""Weighted block-matrix algebras with a faithful trace.

A ``TracedAlgebra`` is a finite direct sum of full matrix blocks, each block
carrying a positive trace weight.  The weighted trace

    tr_w(A) = sum_i  w_i * tr(A_i)

is faithful and tracial, and choosing incommensurable weights (say 1 and
sqrt(2)) produces an algebra with non-trivial centre whose index values are
genuinely real numbers rather than integers.  All operators are dense
per-block complex matrices; functional calculus goes through a Hermitian
eigendecomposition block by block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NotSelfAdjointError, ShapeMismatchError, SpectrumError

HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class TracedAlgebra:
    """Finite direct sum of matrix blocks with positive trace weights."""

    blocks: tuple[tuple[int, float], ...]

    def __post_init__(self):
        for dim, weight in self.blocks:
            if dim < 1:
                raise ValueError(f"block dimension must be >= 1, got {dim}")
            if weight <= 0:
                raise ValueError(f"block weight must be > 0, got {weight}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for d, _ in self.blocks)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.blocks)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def trace_of_identity(self) -> float:
        return float(sum(w * d for d, w in self.blocks))

    def doubled(self) -> "TracedAlgebra":
        """The algebra of 2x2 matrices over this one (same weights)."""
        return TracedAlgebra(tuple((2 * d, w) for d, w in self.blocks))


def _as_block_arrays(algebra: TracedAlgebra, data) -> tuple[np.ndarray, ...]:
    arrays = []
    if len(data) != len(algebra.blocks):
        raise ShapeMismatchError(
            f"expected {len(algebra.blocks)} blocks, got {len(data)}")
    for (dim, _), block in zip(algebra.blocks, data):
        arr = np.asarray(block, dtype=complex)
        if arr.shape != (dim, dim):
            raise ShapeMismatchError(
                f"block of shape {arr.shape} does not match dimension {dim}")
        arrays.append(arr)
    return tuple(arrays)


class BlockOperator:
    """An element of a :class:`TracedAlgebra`: one dense matrix per block.

    Instances are treated as immutable values; arithmetic returns new
    operators and never mutates the operands, so values may be shared
    freely between threads.
    """

    __slots__ = ("algebra", "data")

    def __init__(self, algebra: TracedAlgebra, data):
        self.algebra = algebra
        self.data = _as_block_arrays(algebra, data)

    # ------------------------------------------------------------------
    # constructors
    @classmethod
    def identity(cls, algebra: TracedAlgebra) -> "BlockOperator":
        return cls(algebra, [np.eye(d) for d in algebra.dims])

    @classmethod
    def zero(cls, algebra: TracedAlgebra) -> "BlockOperator":
        return cls(algebra, [np.zeros((d, d)) for d in algebra.dims])

    @classmethod
    def from_scalars(cls, algebra: TracedAlgebra,
                     scalars: Sequence[complex]) -> "BlockOperator":
        """Central element: one scalar per block."""
        return cls(algebra, [s * np.eye(d)
                             for s, d in zip(scalars, algebra.dims)])

    # ------------------------------------------------------------------
    # algebra
    def _check_same(self, other: "BlockOperator"):
        if self.algebra.blocks != other.algebra.blocks:
            raise ShapeMismatchError("operators live in different algebras")

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        self._check_same(other)
        return BlockOperator(self.algebra,
                             [a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        self._check_same(other)
        return BlockOperator(self.algebra,
                             [a - b for a, b in zip(self.data, other.data)])

    def __neg__(self) -> "BlockOperator":
        return BlockOperator(self.algebra, [-a for a in self.data])

    def __mul__(self, scalar) -> "BlockOperator":
        return BlockOperator(self.algebra, [scalar * a for a in self.data])

    __rmul__ = __mul__

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        self._check_same(other)
        return BlockOperator(self.algebra,
                             [a @ b for a, b in zip(self.data, other.data)])

    def adjoint(self) -> "BlockOperator":
        return BlockOperator(self.algebra,
                             [a.conj().T for a in self.data])

    def norm(self) -> float:
        """Operator norm: the largest singular value over all blocks."""
        return max(
            (float(np.linalg.norm(a, 2)) if a.size else 0.0)
            for a in self.data)

    def is_hermitian(self, rtol: float = HERMITICITY_RTOL) -> bool:
        dev = max(float(np.linalg.norm(a - a.conj().T, 2)) for a in self.data)
        # absolute floor so roundoff-level operators count as self-adjoint
        return dev <= max(rtol * self.norm(), 1e-14)

    def hermitize(self, rtol: float = HERMITICITY_RTOL) -> "BlockOperator":
        """Symmetrize an operator already within tolerance of self-adjoint.

        Operators far from Hermitian are rejected rather than silently
        symmetrized, since that would mask construction bugs.
        """
        if not self.is_hermitian(rtol):
            raise NotSelfAdjointError(
                "operator is not self-adjoint within tolerance")
        return BlockOperator(self.algebra,
                             [(a + a.conj().T) / 2 for a in self.data])

    def __repr__(self):
        return f"BlockOperator(dims={self.algebra.dims})"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Per-block Hermitian eigendata: real eigenvalues, unitary eigenvectors."""

    algebra: TracedAlgebra
    eigenvalues: tuple[np.ndarray, ...]
    eigenvectors: tuple[np.ndarray, ...]

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> BlockOperator:
        """Assemble U f(diag) U* per block; f acts on eigenvalue vectors."""
        out = []
        for vals, vecs in zip(self.eigenvalues, self.eigenvectors):
            fv = np.asarray(f(vals), dtype=complex)
            if not np.all(np.isfinite(fv)):
                raise SpectrumError("function undefined at an eigenvalue")
            out.append((vecs * fv) @ vecs.conj().T)
        return BlockOperator(self.algebra, out)

    def reconstruct(self) -> BlockOperator:
        return self.apply(lambda x: x)


def trace(algebra: TracedAlgebra, op: BlockOperator) -> complex:
    """Weighted trace sum_i w_i * tr(block_i)."""
    if op.algebra.blocks != algebra.blocks:
        raise ShapeMismatchError("operator does not belong to this algebra")
    return complex(sum(w * np.trace(a)
                       for w, a in zip(algebra.weights, op.data)))


def herm_eig(op: BlockOperator) -> SpectralDecomposition:
    """Eigendecomposition of a self-adjoint block operator.

    Raises :class:`NotSelfAdjointError` if the input is further than
    ``1e-12 * norm`` from Hermitian.
    """
    sym = op.hermitize()
    vals, vecs = [], []
    for a in sym.data:
        v, u = np.linalg.eigh(a)
        vals.append(v)
        vecs.append(u)
    return SpectralDecomposition(op.algebra, tuple(vals), tuple(vecs))


def func_calc(op: BlockOperator,
              f: Callable[[np.ndarray], np.ndarray]) -> BlockOperator:
    """f(D) for self-adjoint D via the spectral theorem, block by block."""
    return herm_eig(op).apply(f)


def complex_power(op: BlockOperator, shift: float, z: complex) -> BlockOperator:
    """(shift + D^2)^(-z) through the principal branch of the logarithm.

    The base shift + D^2 must be strictly positive; since all its
    eigenvalues are then positive reals the principal branch is the
    ordinary real power, but z may be complex.
    """
    dec = herm_eig(op)
    def power(vals):
        base = shift + vals ** 2
        if np.any(base <= 0):
            raise SpectrumError("shift + eigenvalue^2 must be positive")
        return np.exp(-z * np.log(base))
    return dec.apply(power)


def resolvent(op: BlockOperator, shift: float, lam: complex) -> BlockOperator:
    """(lam - (shift + D^2))^{-1} via the spectral decomposition of D."""
    dec = herm_eig(op)
    def res(vals):
        denom = lam - (shift + vals ** 2)
        if np.any(np.abs(denom) < 1e-12):
            raise SpectrumError(
                "resolvent parameter within 1e-12 of the spectrum")
        return 1.0 / denom
    return dec.apply(res)


def direct_sum_basis(algebra: TracedAlgebra) -> list[tuple[int, int]]:
    """(block, offset) bookkeeping for flattening block operators."""
    out, off = [], 0
    for d in algebra.dims:
        out.append((d, off))
        off += d
    return out


def to_dense(op: BlockOperator) -> np.ndarray:
    """Flatten to a single block-diagonal dense matrix (for diagnostics)."""
    n = op.algebra.total_dim
    full = np.zeros((n, n), dtype=complex)
    off = 0
    for a in op.data:
        d = a.shape[0]
        full[off:off + d, off:off + d] = a
        off += d
    return full
