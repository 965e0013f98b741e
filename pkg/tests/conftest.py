import numpy as np
import pytest

from evenindex.algebra import BlockOperator, TracedAlgebra


@pytest.fixture
def weighted_algebra():
    """Two blocks with incommensurable weights: (dim 2, w=1) + (dim 1, w=sqrt 2)."""
    return TracedAlgebra(((2, 1.0), (1, float(np.sqrt(2)))))


def random_operator(algebra: TracedAlgebra, rng) -> BlockOperator:
    blocks = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
              for d in algebra.dims]
    return BlockOperator(algebra, blocks)


def random_hermitian(algebra: TracedAlgebra, rng) -> BlockOperator:
    op = random_operator(algebra, rng)
    return (op + op.adjoint()) * 0.5


def random_projection(algebra: TracedAlgebra, rng, ranks=None) -> BlockOperator:
    """Orthogonal projection with prescribed (or random) rank per block."""
    blocks = []
    for bi, d in enumerate(algebra.dims):
        r = ranks[bi] if ranks is not None else int(rng.integers(0, d + 1))
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, _ = np.linalg.qr(m)
        v = q[:, :r]
        blocks.append(v @ v.conj().T)
    return BlockOperator(algebra, blocks)
