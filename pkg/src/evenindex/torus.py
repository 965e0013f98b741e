"""Flat-torus geometry on a truncated Fourier lattice.

Modes live on the square (n1, n2), |ni| <= cutoff, with spinor rank two:
the operator is D = s1 (x) N1 + s2 (x) N2 with the momentum diagonals,
and the grading is s3.  The generators U, V act by wrap-around shifts,
so they stay exactly unitary at every cutoff; commutators with D are
computed from the shift symbols on the untruncated lattice and then
compressed (wrap entries dropped), pushing the truncation artifact into
the cutoff-stability checks rather than the algebra.

The distinguished projection is a two-by-two matrix-valued loop of the
standard bump type

    p = G(V) + F(V) U + U* F(V)*,
    G = [[g, f], [f, 1-g]],  F = [[0, h], [0, 0]],

with real profiles satisfying f h = 0 and f^2 + h^2 = g (1 - g).  Those
two constraints make p an exact projection whenever U and V commute,
which the wrap-around shifts do at deformation angle zero; a scalar
(one-by-one) loop cannot be a nontrivial projection over a commutative
torus, which is why the matrix amplification is part of the model.  Its
pairing with the momentum Dirac class is +-1, pinned numerically by the
corner kernel count rather than by an orientation convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .algebra import BlockOperator, TracedAlgebra
from .triples import EvenTriple
from .words import PauliOp, WordModel, chain_trace_pauli
from .zeta import ZetaSpec

TORUS_KERNEL_TOL = 1e-4  # relative singular-value cut for corner kernels


def _smallest_eigs(gram: sp.csc_matrix, k: int, iters: int = 30,
                   ridge: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Smallest eigenpairs of a sparse Hermitian PSD matrix.

    Inverse subspace iteration against an LU factorisation of
    gram + ridge, followed by a Rayleigh-Ritz projection.  The start
    block is a fixed seeded draw, so results are reproducible.
    """
    n = gram.shape[0]
    k = min(k, n - 1)
    lu = spla.splu(gram + ridge * sp.eye(n, dtype=complex, format="csc"))
    rng = np.random.default_rng(20240901)
    x = (rng.standard_normal((n, k + 4))
         + 1j * rng.standard_normal((n, k + 4)))
    x, _ = np.linalg.qr(x)
    for _ in range(iters):
        x = lu.solve(x)
        x, _ = np.linalg.qr(x)
    h = x.conj().T @ (gram @ x)
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    order = np.argsort(np.real(vals))[:k]
    return np.real(vals[order]), x @ vecs[:, order]


def _smoothstep(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, mollifier ratio inside."""
    def bump(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out
    x = np.clip(x, 0.0, 1.0)
    up, down = bump(x), bump(1.0 - x)
    return up / (up + down)


def bott_profiles(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(g, f, h) on [0, 2 pi): rise window, plateau, fall window.

    Built from an angle profile so that sqrt(g - g^2) is smooth:
    g = sin^2(theta), f = sin(2 theta)/2 on the rise, h the same on the
    fall; then f^2 + h^2 = g - g^2 pointwise and f h = 0.
    """
    y = np.asarray(y) / (2 * np.pi)  # normalise to [0, 1)
    rise = _smoothstep((y - 0.10) / 0.30)
    fall = _smoothstep((y - 0.55) / 0.35)
    theta = (np.pi / 2) * np.clip(rise - fall, 0.0, 1.0)
    g = np.sin(theta) ** 2
    slope = 0.5 * np.sin(2 * theta)
    f = np.where((y > 0.10) & (y < 0.40), slope, 0.0)
    h = np.where((y > 0.55) & (y < 0.90), slope, 0.0)
    return g, f, h


class TorusModel:
    """Lattice torus with generators, bump projection and index machinery."""

    def __init__(self, cutoff: int, theta: float = 0.0):
        if cutoff < 2:
            raise ValueError("cutoff must be at least 2")
        self.cutoff = int(cutoff)
        self.theta = float(theta)
        self.m = 2 * self.cutoff + 1
        self.n_modes = self.m * self.m
        grid = np.arange(-self.cutoff, self.cutoff + 1)
        self.n1 = np.repeat(grid, self.m)
        self.n2 = np.tile(grid, self.m)

    # ------------------------------------------------------------------
    # shift compilation

    def shift_matrix(self, k: int, l: int, wrap: bool) -> sp.csr_matrix:
        """The operator U^k V^l on modes; wrap keeps unitarity, the
        compressed convention drops amplitudes leaving the box."""
        m, lam = self.m, self.cutoff
        src = np.arange(self.n_modes)
        t1 = self.n1 + k
        t2 = self.n2 + l
        phase = np.ones(self.n_modes, dtype=complex)
        if self.theta != 0.0 and k:
            phase = np.exp(2j * np.pi * self.theta * k * self.n2)
        if wrap:
            i1 = (t1 + lam) % m
            i2 = (t2 + lam) % m
            rows = i1 * m + i2
            return sp.csr_matrix((phase, (rows, src)),
                                 shape=(self.n_modes, self.n_modes))
        keep = (np.abs(t1) <= lam) & (np.abs(t2) <= lam)
        rows = (t1[keep] + lam) * m + (t2[keep] + lam)
        return sp.csr_matrix((phase[keep], (rows, src[keep])),
                             shape=(self.n_modes, self.n_modes))

    def compile_scalar(self, fourier: dict, wrap: bool) -> sp.csr_matrix:
        out = sp.csr_matrix((self.n_modes, self.n_modes), dtype=complex)
        for (k, l), c in fourier.items():
            if c != 0:
                out = out + c * self.shift_matrix(k, l, wrap)
        return out.tocsr()

    def compile_amplified(self, fourier: dict, wrap: bool) -> sp.csr_matrix:
        """Elements of M_2 over the torus algebra, on modes (x) C^2."""
        out = sp.csr_matrix((2 * self.n_modes, 2 * self.n_modes),
                            dtype=complex)
        for (k, l), coeff in fourier.items():
            block = sp.csr_matrix(np.asarray(coeff, dtype=complex))
            if block.nnz:
                out = out + sp.kron(self.shift_matrix(k, l, wrap), block)
        return out.tocsr()

    # ------------------------------------------------------------------
    # generators and the bump projection

    @cached_property
    def u_matrix(self) -> sp.csr_matrix:
        return self.shift_matrix(1, 0, wrap=True)

    @cached_property
    def v_matrix(self) -> sp.csr_matrix:
        return self.shift_matrix(0, 1, wrap=True)

    def _profile_fourier(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Centered DFT coefficients of (g, f, h) on the m-point grid.

        Using the grid DFT makes functions of the wrapped V act with the
        exact grid values, so the projection identities hold to rounding.
        """
        yj = 2 * np.pi * np.arange(self.m) / self.m
        g, f, h = bott_profiles(yj)
        def centered(vals):
            co = np.fft.fft(vals) / self.m
            idx = (np.arange(-self.cutoff, self.cutoff + 1)) % self.m
            return co[idx]
        return centered(g), centered(f), centered(h)

    @cached_property
    def projection_fourier(self) -> dict:
        """Fourier data of p; requires the commutative point theta = 0."""
        if self.theta != 0.0:
            raise ValueError(
                "the bump projection is exact only at deformation zero")
        gh, fh, hh = self._profile_fourier()
        ls = np.arange(-self.cutoff, self.cutoff + 1)
        data: dict = {}
        for i, l in enumerate(ls):
            gl, fl, hl = gh[i], fh[i], hh[i]
            gmat = np.array([[gl, fl], [fl, (1.0 if l == 0 else 0.0) - gl]],
                            dtype=complex)
            data[(0, int(l))] = data.get((0, int(l)), 0) + gmat
            fmat = np.array([[0.0, hl], [0.0, 0.0]], dtype=complex)
            data[(1, int(l))] = data.get((1, int(l)), np.zeros((2, 2))) + fmat
            data[(-1, int(-l))] = data.get((-1, int(-l)), np.zeros((2, 2))) \
                + fmat.conj().T
        return data

    @cached_property
    def projection_matrix(self) -> sp.csr_matrix:
        return self.compile_amplified(self.projection_fourier, wrap=True)

    def projection_defect(self) -> float:
        p = self.projection_matrix
        d = p @ p - p
        return float(spla.norm(d, np.inf)) if d.nnz else 0.0

    def symbol_derivatives(self, fourier: dict, amplified: bool
                           ) -> tuple[sp.csr_matrix, sp.csr_matrix]:
        """([N1, a], [N2, a]) from the shift symbols, then compressed."""
        d1 = {kl: kl[0] * c for kl, c in fourier.items()}
        d2 = {kl: kl[1] * c for kl, c in fourier.items()}
        compile_ = self.compile_amplified if amplified else self.compile_scalar
        return compile_(d1, wrap=False), compile_(d2, wrap=False)

    # ------------------------------------------------------------------
    # kernel-count index of the projected Dirac corner

    def corner_kernel_data(self, rel_tol: float = TORUS_KERNEL_TOL,
                           want: int = 6, shell: int = 2) -> dict:
        """Small singular values of p D+ p restricted to range(p).

        D+ is the (down <- up) spinor block N1 + i N2; the kernel and
        cokernel counts inside range(p) give the corner index.  Smallest
        eigenvalues of T*T + (1-p) and T T* + (1-p) come from an
        LU-backed inverse subspace iteration (deterministic start).

        At any finite cutoff the raw counts are forced equal by
        rank-nullity (the corner compression is a square matrix), so the
        continuum index pairs every genuine near-zero mode with a partner
        that has no continuum counterpart.  The partners are sharply
        localised in the outer momentum shell, so near-kernel states with
        more than half their weight at |n|_inf >= cutoff - shell are
        discounted as wrap-around artifacts; the remaining bulk counts
        carry the index.
        """
        p = self.projection_matrix
        aplus = sp.kron(sp.diags((self.n1 + 1j * self.n2).astype(complex)),
                        sp.eye(2, dtype=complex, format="csr"))
        t = (p @ aplus @ p).tocsc()
        one = sp.eye(2 * self.n_modes, dtype=complex, format="csc")
        comp = one - p.tocsc()
        smax = float(spla.svds(t, k=1, return_singular_vectors=False,
                               v0=np.ones(2 * self.n_modes))[0])
        shell_mask = np.repeat(
            np.maximum(np.abs(self.n1), np.abs(self.n2))
            >= self.cutoff - shell, 2)
        cut = rel_tol * smax
        out, counts = {}, {}
        ambiguous = False
        for label, gram in (("ker", t.conj().T @ t + comp),
                            ("coker", t @ t.conj().T + comp)):
            vals, vecs = _smallest_eigs(gram.tocsc(), want)
            svs = np.sqrt(np.maximum(vals, 0.0))
            out[label] = svs
            bulk = 0
            for i, sv in enumerate(svs):
                if sv > cut:
                    continue
                w = np.abs(vecs[:, i]) ** 2
                if float(w[shell_mask].sum() / w.sum()) < 0.5:
                    bulk += 1
            counts[label] = bulk
            ambiguous = ambiguous or bool(
                np.any((svs > cut / 10) & (svs < cut * 10)))
        return {"index": float(counts["ker"] - counts["coker"]),
                "ker": counts["ker"], "coker": counts["coker"],
                "sigma_max": smax, "cut": cut, "ambiguous": ambiguous,
                "smallest_ker": out["ker"], "smallest_coker": out["coker"]}

    def corner_index(self) -> float:
        return self.corner_kernel_data()["index"]

    # ------------------------------------------------------------------
    # zeta eigendata for the pairing words

    def _amp_energies(self) -> np.ndarray:
        e = (self.n1 ** 2 + self.n2 ** 2).astype(float)
        return np.repeat(e, 2)

    def zeta_spec_degree_zero(self, two_p: bool = True) -> ZetaSpec:
        """Weights of gamma (2p) (or gamma p): identically zero here
        because D^2 is spinor-scalar, so the graded trace kills every
        spinor-diagonal word."""
        scale = 2.0 if two_p else 1.0
        word = PauliOp({3: scale * self.projection_matrix},
                       2 * self.n_modes)
        omega = word.weighted_diag(np.ones(2 * self.n_modes))
        return ZetaSpec(self._amp_energies(), omega, 0.0,
                        descriptor="gamma-2p" if two_p else "gamma-p")

    def zeta_spec_degree_two(self) -> ZetaSpec:
        """Weights of gamma (2p-1) [D,p] [D,p], exponent offset 1."""
        p = self.projection_matrix
        a, b = self.symbol_derivatives(self.projection_fourier,
                                       amplified=True)
        one = sp.eye(2 * self.n_modes, dtype=complex, format="csr")
        w0 = PauliOp({3: (2.0 * p - one).tocsr()}, 2 * self.n_modes)
        dp = PauliOp({1: a, 2: b}, 2 * self.n_modes)
        word = w0 @ dp @ dp
        omega = word.weighted_diag(np.ones(2 * self.n_modes))
        return ZetaSpec(self._amp_energies(), omega, 1.0,
                        descriptor="gamma-(2p-1)-dp-dp")

    def zeta_spec_ungraded_one(self) -> ZetaSpec:
        """tau((1+D^2)^{-z-1}) on the plain (unamplified) torus."""
        e = (self.n1 ** 2 + self.n2 ** 2).astype(float)
        return ZetaSpec(e, 2.0 * np.ones(self.n_modes), 1.0,
                        descriptor="ungraded-one")

    def poisson_heat_ungraded(self, t: np.ndarray) -> np.ndarray:
        """2 e^{-t} theta(t)^2 with Poisson-resummed theta for small t."""
        t = np.asarray(t, dtype=float)
        theta = np.sqrt(np.pi / t) * (
            1 + 2 * np.exp(-np.pi ** 2 / t) + 2 * np.exp(-4 * np.pi ** 2 / t))
        return 2.0 * np.exp(-t) * theta ** 2

    # ------------------------------------------------------------------
    # dense even triple (small cutoffs only)

    def triple(self) -> EvenTriple:
        """Dense EvenTriple on modes (x) spinor with generators (U, V).

        Intended for small cutoffs; the grading is the spinor s3 and the
        distinguished projection is not included (it needs the matrix
        amplification, see the pairing machinery).
        """
        if self.cutoff > 10:
            raise ValueError("dense triple only built for small cutoffs")
        dim = 2 * self.n_modes
        algebra = TracedAlgebra(((dim, 1.0),))
        s1 = np.array([[0, 1], [1, 0]], dtype=complex)
        s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
        s3 = np.diag([1.0, -1.0]).astype(complex)
        n1 = np.diag(self.n1.astype(complex))
        n2 = np.diag(self.n2.astype(complex))
        dmat = np.kron(s1, n1) + np.kron(s2, n2)
        gmat = np.kron(s3, np.eye(self.n_modes))
        u = np.kron(np.eye(2), self.u_matrix.toarray())
        v = np.kron(np.eye(2), self.v_matrix.toarray())
        return EvenTriple(algebra,
                          (BlockOperator(algebra, [u]),
                           BlockOperator(algebra, [v])),
                          BlockOperator(algebra, [dmat]),
                          BlockOperator(algebra, [gmat]), q=2.0)

    # ------------------------------------------------------------------
    # word model for cochain quadrature (rescaled so ||[D, a]|| < sqrt 2)

    def word_model(self) -> WordModel:
        """Pauli-sparse chain model over the scalar torus with matrix
        commutators and the standard shrink of D.

        Matrix commutators (not symbols) keep every algebraic identity
        exact at the boundary, which is what the cochain identities need;
        the shrink makes commutator norms comparable to the continuum.
        """
        n1d = self.n1.astype(float)
        n2d = self.n2.astype(float)
        u, v = self.u_matrix, self.v_matrix

        def mat_comm(diag: np.ndarray, a: sp.csr_matrix) -> sp.csr_matrix:
            return (sp.diags(diag) @ a - a @ sp.diags(diag)).tocsr()

        worst = max(
            np.abs(mat_comm(n1d, u)).max(),
            np.abs(mat_comm(n2d, v)).max())
        eps = 1.3 / worst if worst >= np.sqrt(2) else 1.0
        e1, e2 = eps * n1d, eps * n2d
        energies = e1 ** 2 + e2 ** 2
        weights = np.ones(self.n_modes)

        def chain_factors(ops):
            factors = [PauliOp({3: ops[0]}, self.n_modes)]
            for a in ops[1:]:
                factors.append(PauliOp(
                    {1: mat_comm(e1, a), 2: mat_comm(e2, a)}, self.n_modes))
            return factors

        def zeta_diag(ops, kcounts):
            word = PauliOp({3: ops[0]}, self.n_modes)
            for a, kc in zip(ops[1:], kcounts):
                c = PauliOp({1: mat_comm(e1, a), 2: mat_comm(e2, a)},
                            self.n_modes)
                for _ in range(kc):
                    c = PauliOp(
                        {mu: mat_comm(energies, x)
                         for mu, x in c.components.items()}, self.n_modes)
                word = word @ c
            return word.weighted_diag(weights)

        return WordModel(
            q=2.0,
            energies=energies,
            weights=weights,
            one=sp.eye(self.n_modes, dtype=complex, format="csr"),
            mult=lambda a, b: (a @ b).tocsr(),
            chain_factors=chain_factors,
            chain_trace=lambda f, r: chain_trace_pauli(f, r, weights),
            zeta_diag=zeta_diag,
            dimension_scale=float(np.median(energies) + 1.0),
        )
