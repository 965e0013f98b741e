"""Concrete models: random graded triples with exactly known indices,
skew-corner instance streams for the Fredholm suite, and the even circle
geometry.  The torus lives in its own module.

Random instances are built from explicit orthonormal frames and diagonal
singular-value profiles, so every kernel dimension is known by
construction and index assertions are exact rather than tolerance
fitting.  Singular values of the non-kernel part stay inside [0.5, 2],
leaving a comfortable gap for the numerical rank decisions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import BlockOperator, TracedAlgebra
from .fredholm import SkewCorner
from .triples import EvenTriple, rescaled_triple
from .words import WordModel, dense_word_model

SQRT2 = float(np.sqrt(2.0))


def _frame(rng, dim: int, rank: int) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(m)
    return q[:, :rank]


def _spread_singular_values(rng, count: int) -> np.ndarray:
    return rng.uniform(0.5, 2.0, size=count)


# ----------------------------------------------------------------------
# skew-corner instances


@dataclass(frozen=True)
class CornerInstance:
    algebra: TracedAlgebra
    t: BlockOperator
    corner: SkewCorner
    exact_index: float
    gap: float


def corner_instance(seed: int, algebra: TracedAlgebra,
                    ranks=None) -> CornerInstance:
    """T = P T Q with prescribed projection ranks and a clean kernel gap.

    ranks is a per-block triple (p_rank, q_rank, t_rank); omitted entries
    are drawn at random.  The index is sum_b w_b (q_rank - p_rank)
    independently of t_rank, by rank-nullity.
    """
    rng = np.random.default_rng(seed)
    p_blocks, q_blocks, t_blocks = [], [], []
    exact = 0.0
    gap = np.inf
    for bi, (dim, weight) in enumerate(algebra.blocks):
        if ranks is None:
            pr = int(rng.integers(0, dim + 1))
            qr = int(rng.integers(0, dim + 1))
            tr = int(rng.integers(0, min(pr, qr) + 1))
        else:
            pr, qr, tr = ranks[bi]
        up = _frame(rng, dim, pr)
        uq = _frame(rng, dim, qr)
        sv = np.zeros((pr, qr))
        vals = _spread_singular_values(rng, tr)
        sv[np.arange(tr), np.arange(tr)] = vals
        if tr:
            gap = min(gap, float(np.min(vals)))
        p_blocks.append(up @ up.conj().T)
        q_blocks.append(uq @ uq.conj().T)
        t_blocks.append(up @ sv @ uq.conj().T)
        exact += weight * (qr - pr)
    corner = SkewCorner(BlockOperator(algebra, p_blocks),
                        BlockOperator(algebra, q_blocks))
    return CornerInstance(algebra, BlockOperator(algebra, t_blocks),
                          corner, exact, float(gap))


@dataclass(frozen=True)
class ComposableInstance:
    algebra: TracedAlgebra
    s: BlockOperator
    t: BlockOperator
    g: BlockOperator
    p: BlockOperator
    q: BlockOperator
    index_s: float
    index_t: float


def composable_instance(seed: int, algebra: TracedAlgebra
                        ) -> ComposableInstance:
    """A composable pair S in G N P, T in P N Q sharing the middle frame.

    Built so ST has an exactly known rank: T lands on the first t_rank
    columns of the P frame and S is supported on its first s_rank columns.
    """
    rng = np.random.default_rng(seed)
    s_blocks, t_blocks = [], []
    g_blocks, p_blocks, q_blocks = [], [], []
    ind_s = ind_t = 0.0
    for dim, weight in algebra.blocks:
        gr = int(rng.integers(0, dim + 1))
        pr = int(rng.integers(0, dim + 1))
        qr = int(rng.integers(0, dim + 1))
        tr = int(rng.integers(0, min(pr, qr) + 1))
        sr = int(rng.integers(0, min(gr, pr) + 1))
        ug = _frame(rng, dim, gr)
        up = _frame(rng, dim, pr)
        uq = _frame(rng, dim, qr)
        mt = np.zeros((pr, qr))
        mt[np.arange(tr), np.arange(tr)] = _spread_singular_values(rng, tr)
        ms = np.zeros((gr, pr))
        ms[np.arange(sr), np.arange(sr)] = _spread_singular_values(rng, sr)
        t_blocks.append(up @ mt @ uq.conj().T)
        s_blocks.append(ug @ ms @ up.conj().T)
        g_blocks.append(ug @ ug.conj().T)
        p_blocks.append(up @ up.conj().T)
        q_blocks.append(uq @ uq.conj().T)
        ind_t += weight * (qr - pr)
        ind_s += weight * (pr - gr)
    mk = lambda blocks: BlockOperator(algebra, blocks)
    return ComposableInstance(algebra, mk(s_blocks), mk(t_blocks),
                              mk(g_blocks), mk(p_blocks), mk(q_blocks),
                              ind_s, ind_t)


def random_instance_algebra(seed: int, max_blocks: int = 2,
                            max_dim: int = 6,
                            weighted: bool = True) -> TracedAlgebra:
    rng = np.random.default_rng(seed + 977)
    nb = int(rng.integers(1, max_blocks + 1))
    blocks = []
    for b in range(nb):
        dim = int(rng.integers(2, max_dim + 1))
        weight = SQRT2 if (weighted and b == nb - 1 and nb > 1) else 1.0
        blocks.append((dim, weight))
    return TracedAlgebra(tuple(blocks))


# ----------------------------------------------------------------------
# random graded models


@dataclass(frozen=True)
class GradedModel:
    """An even triple with a distinguished projection and exact indices."""

    triple: EvenTriple
    projection: BlockOperator
    corner_index: float
    full_index: float

    def word_model(self):
        return dense_word_model(self.triple)


def build_random_even(seed: int,
                      sectors=((3, 3, 1.0),),
                      p_ranks=None,
                      generator_count: int = 2,
                      q: float = 1.0) -> GradedModel:
    """Random even triple with prescribed graded sector data.

    ``sectors`` lists (plus_dim, minus_dim, weight) per block; p_ranks
    optionally lists (rank_plus, rank_minus) for the distinguished even
    projection.  The corner index of p D^+ p is then exactly
    sum_b w_b (rank_plus - rank_minus) and the index of D^+ itself is
    sum_b w_b (plus_dim - minus_dim).
    """
    rng = np.random.default_rng(seed)
    blocks = []
    gammas, dirs, projs = [], [], []
    corner_index = 0.0
    full_index = 0.0
    for bi, (dp, dm, weight) in enumerate(sectors):
        if dp < 1 or dm < 1:
            raise ValueError("need at least one dimension per graded sector")
        dim = dp + dm
        blocks.append((dim, weight))
        gammas.append(np.diag(np.concatenate([np.ones(dp), -np.ones(dm)])))
        if p_ranks is None:
            rp = int(rng.integers(0, dp + 1))
            rm = int(rng.integers(0, dm + 1))
        else:
            rp, rm = p_ranks[bi]
        vplus = _frame(rng, dp, rp)
        vminus = _frame(rng, dm, rm)
        proj = np.zeros((dim, dim), dtype=complex)
        proj[:dp, :dp] = vplus @ vplus.conj().T
        proj[dp:, dp:] = vminus @ vminus.conj().T
        projs.append(proj)
        # corner rank of the compression p^- T p^+ inside the frames
        rho = int(rng.integers(0, min(rp, rm) + 1))
        sv = np.zeros((rm, rp))
        sv[np.arange(rho), np.arange(rho)] = _spread_singular_values(rng, rho)
        core = vminus @ sv @ vplus.conj().T
        # complement part, full rank against the orthogonal frames
        cp = np.eye(dp) - vplus @ vplus.conj().T
        cm = np.eye(dm) - vminus @ vminus.conj().T
        z = rng.standard_normal((dm, dp)) + 1j * rng.standard_normal((dm, dp))
        rest = cm @ z @ cp
        if rest.size:
            u, s, vh = np.linalg.svd(rest, full_matrices=False)
            s = np.where(s > 1e-8, np.clip(s, 0.5, 2.0), 0.0)
            rest = (u * s) @ vh
        t = core + rest
        dmat = np.zeros((dim, dim), dtype=complex)
        dmat[dp:, :dp] = t
        dmat[:dp, dp:] = t.conj().T
        dirs.append(dmat)
        corner_index += weight * (rp - rm)
        full_index += weight * (dp - dm)
    algebra = TracedAlgebra(tuple(blocks))
    gamma = BlockOperator(algebra, gammas)
    dirac = BlockOperator(algebra, dirs)
    p = BlockOperator(algebra, projs)
    gens = [p]
    for _ in range(generator_count):
        ablocks = []
        for bi, (dp, dm, _) in enumerate(sectors):
            dim = dp + dm
            a = np.zeros((dim, dim), dtype=complex)
            a[:dp, :dp] = (rng.standard_normal((dp, dp))
                           + 1j * rng.standard_normal((dp, dp))) / dp
            a[dp:, dp:] = (rng.standard_normal((dm, dm))
                           + 1j * rng.standard_normal((dm, dm))) / dm
            ablocks.append(a)
        gens.append(BlockOperator(algebra, ablocks))
    triple = rescaled_triple(algebra, gens, dirac, gamma, q=q)
    return GradedModel(triple, p, corner_index, full_index)


def graded_instance_stream(base_seed: int, count: int, max_dim: int = 8,
                           weighted: bool = True):
    """Deterministic stream of random graded models for the suites."""
    for i in range(count):
        rng = np.random.default_rng(base_seed + 131 * i)
        nb = int(rng.integers(1, 3))
        sectors = []
        for b in range(nb):
            dp = int(rng.integers(1, max_dim // 2 + 1))
            dm = int(rng.integers(1, max_dim // 2 + 1))
            weight = SQRT2 if (weighted and b == nb - 1 and nb > 1) else 1.0
            sectors.append((dp, dm, weight))
        yield build_random_even(base_seed + 131 * i + 7,
                                sectors=tuple(sectors))


# ----------------------------------------------------------------------
# the even circle geometry (spectral dimension 1)


@dataclass(frozen=True)
class CircleModel:
    """Doubled circle operator: modes -cutoff..cutoff, off-diagonal slope.

    The algebra of functions on the circle acts diagonally; its only
    projections are 0 and 1, so index pairings live entirely in the
    degree-zero strand.  The half trace weight makes the ungraded zeta
    residue at its first pole equal to 2 (one per spectral branch).
    """

    cutoff: int
    triple: EvenTriple
    shift: BlockOperator  # the unitary generator e^{ix}

    def mode_numbers(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    def word_model(self) -> tuple[WordModel, object]:
        return dense_word_model(self.triple)


def build_circle_even(cutoff: int = 32) -> CircleModel:
    m = 2 * cutoff + 1
    modes = np.arange(-cutoff, cutoff + 1)
    algebra = TracedAlgebra(((2 * m, 0.5),))
    nmat = np.diag(modes.astype(complex))
    sigma1 = np.array([[0, 1], [1, 0]], dtype=complex)
    sigma3 = np.array([[1, 0], [0, -1]], dtype=complex)
    dirac = BlockOperator(algebra, [np.kron(sigma1, nmat)])
    gamma = BlockOperator(algebra, [np.kron(sigma3, np.eye(m))])
    shift = np.zeros((m, m), dtype=complex)
    shift[np.arange(1, m), np.arange(m - 1)] = 1.0
    shift[0, m - 1] = 1.0  # wrap-around keeps the generator unitary
    u = BlockOperator(algebra, [np.kron(np.eye(2), shift)])
    one = BlockOperator.identity(algebra)
    triple = EvenTriple(algebra, (one, u), dirac, gamma, q=1.0)
    return CircleModel(cutoff, triple, u)
