"""Resolvent-word evaluation in a basis where D^2 is diagonal.

Every trace the cocycle machinery needs has the shape

    tr_w( W0 R W1 R ... Wm R ),   R = (lambda - (1 + s^2 + D^2))^{-1},

with W0 = gamma a0 and Wi = [D, ai] (possibly iterated commutators with
D^2).  Working in a basis where D^2 is diagonal makes R a diagonal
scaling, so a word trace is a chain of matrix products interleaved with
column scalings.  Two operator representations implement this:

* dense matrices in the eigenbasis of D (block models flattened to one
  full matrix; fine up to a couple hundred states), evaluated with the
  lambda axis batched;

* Pauli-decomposed operators sigma_mu (x) X_mu for geometric models whose
  D^2 is momentum-diagonal; the 2x2 Clifford factor multiplies through a
  four-entry table and the base factors stay sparse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .algebra import BlockOperator, herm_eig, to_dense
from .triples import EvenTriple

# sigma_a sigma_b = table[a][b] = (phase, c) with sigma_a sigma_b = phase * sigma_c
_PAULI_TABLE = {
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (1, 0), (1, 2): (1j, 3), (1, 3): (-1j, 2),
    (2, 0): (1, 2), (2, 1): (-1j, 3), (2, 2): (1, 0), (2, 3): (1j, 1),
    (3, 0): (1, 3), (3, 1): (1j, 2), (3, 2): (-1j, 1), (3, 3): (1, 0),
}


class PauliOp:
    """sum_mu sigma_mu (x) component[mu] with sparse or dense base factors."""

    __slots__ = ("components", "dim")

    def __init__(self, components: dict, dim: int):
        self.components = {mu: c for mu, c in components.items()
                           if _nonzero(c)}
        self.dim = dim

    def __matmul__(self, other: "PauliOp") -> "PauliOp":
        out: dict = {}
        for a, x in self.components.items():
            for b, y in other.components.items():
                phase, c = _PAULI_TABLE[(a, b)]
                prod = x @ y
                if phase != 1:
                    prod = phase * prod
                out[c] = out[c] + prod if c in out else prod
        return PauliOp(out, self.dim)

    def __add__(self, other: "PauliOp") -> "PauliOp":
        out = dict(self.components)
        for mu, c in other.components.items():
            out[mu] = out[mu] + c if mu in out else c
        return PauliOp(out, self.dim)

    def __mul__(self, scalar) -> "PauliOp":
        return PauliOp({mu: scalar * c
                        for mu, c in self.components.items()}, self.dim)

    __rmul__ = __mul__

    def scale_right(self, diag: np.ndarray) -> "PauliOp":
        """Right-multiply by a Pauli-scalar diagonal (the resolvent)."""
        out = {}
        for mu, c in self.components.items():
            if sp.issparse(c):
                out[mu] = c @ sp.diags(diag)
            else:
                out[mu] = c * diag[None, :]
        return PauliOp(out, self.dim)

    def weighted_trace(self, weights: np.ndarray) -> complex:
        """tr(sigma_mu) = 2 delta_{mu,0}: only component 0 survives."""
        c = self.components.get(0)
        if c is None:
            return 0.0 + 0.0j
        d = c.diagonal() if sp.issparse(c) else np.diagonal(c)
        return 2.0 * complex(np.sum(weights * d))

    def weighted_diag(self, weights: np.ndarray) -> np.ndarray:
        """Spinor-traced diagonal: 2 * weights * diag(component 0)."""
        c = self.components.get(0)
        if c is None:
            return np.zeros(self.dim, dtype=complex)
        d = c.diagonal() if sp.issparse(c) else np.diagonal(c)
        return 2.0 * weights * np.asarray(d, dtype=complex)


def _nonzero(c) -> bool:
    if sp.issparse(c):
        return c.nnz > 0
    return bool(np.any(c))


# ----------------------------------------------------------------------
# chain traces


def chain_trace_dense(mats: list[np.ndarray], rdiags: np.ndarray,
                      weights: np.ndarray,
                      chunk: int = 256) -> np.ndarray:
    """tr_w( M0 R M1 R ... Mm R ) for a batch of resolvent diagonals.

    rdiags has shape (L, n); the return value has shape (L,).  Batches
    are chunked so intermediate (chunk, n, n) stacks stay small.
    """
    n = mats[0].shape[0]
    out = np.empty(rdiags.shape[0], dtype=complex)
    for lo in range(0, rdiags.shape[0], chunk):
        r = rdiags[lo:lo + chunk]
        cur = mats[0][None, :, :] * r[:, None, :]
        for m in mats[1:]:
            cur = cur @ m
            cur = cur * r[:, None, :]
        out[lo:lo + chunk] = np.einsum("lii,i->l", cur, weights)
    return out


def chain_trace_pauli(ops: list[PauliOp], rdiags: np.ndarray,
                      weights: np.ndarray) -> np.ndarray:
    out = np.empty(rdiags.shape[0], dtype=complex)
    for i in range(rdiags.shape[0]):
        cur = ops[0].scale_right(rdiags[i])
        for op in ops[1:]:
            cur = (cur @ op).scale_right(rdiags[i])
        out[i] = cur.weighted_trace(weights)
    return out


# ----------------------------------------------------------------------
# models


@dataclass
class WordModel:
    """Everything needed to evaluate cochain values on algebra elements.

    ``elements`` passed to the methods are model-specific handles: dense
    chain-basis matrices for block models, Fourier data for lattice
    models.  q is the formal spectral-dimension parameter used in the
    contour exponent.
    """

    q: float
    energies: np.ndarray
    weights: np.ndarray
    one: object
    mult: Callable
    chain_factors: Callable          # ops tuple -> [W0, W1, ..., Wm]
    chain_trace: Callable            # (factors, rdiags) -> values
    zeta_diag: Callable              # (ops, kcounts) -> per-state omega
    dimension_scale: float = 1.0     # typical energy, for quadrature maps


def dense_word_model(triple: EvenTriple) -> tuple[WordModel, Callable]:
    """Chain model in the eigenbasis of D, plus a BlockOperator embedder."""
    dec = herm_eig(triple.dirac)
    dims = triple.algebra.dims
    n = triple.algebra.total_dim
    basis = np.zeros((n, n), dtype=complex)
    evals = np.concatenate(dec.eigenvalues) if dims else np.zeros(0)
    off = 0
    for u in dec.eigenvectors:
        d = u.shape[0]
        basis[off:off + d, off:off + d] = u
        off += d
    weights = np.concatenate([
        np.full(d, w) for (d, w) in triple.algebra.blocks])

    def embed(op: BlockOperator) -> np.ndarray:
        return basis.conj().T @ to_dense(op) @ basis

    gamma = embed(triple.grading)
    dvec = evals

    def commutator(a: np.ndarray) -> np.ndarray:
        return dvec[:, None] * a - a * dvec[None, :]

    def d2_commutator(a: np.ndarray) -> np.ndarray:
        d2 = dvec ** 2
        return d2[:, None] * a - a * d2[None, :]

    def chain_factors(ops) -> list[np.ndarray]:
        factors = [gamma @ ops[0]]
        factors.extend(commutator(a) for a in ops[1:])
        return factors

    def zeta_diag(ops, kcounts) -> np.ndarray:
        word = gamma @ ops[0]
        for a, kc in zip(ops[1:], kcounts):
            c = commutator(a)
            for _ in range(kc):
                c = d2_commutator(c)
            word = word @ c
        return weights * np.diagonal(word)

    model = WordModel(
        q=triple.q,
        energies=dvec ** 2,
        weights=weights,
        one=np.eye(n, dtype=complex),
        mult=lambda a, b: a @ b,
        chain_factors=chain_factors,
        chain_trace=lambda f, r: chain_trace_dense(f, r, weights),
        zeta_diag=zeta_diag,
        dimension_scale=float(np.median(dvec ** 2) + 1.0),
    )
    return model, embed
