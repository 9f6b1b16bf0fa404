"""Shared fixtures and independent brute-force oracles.

The oracles work on the full 2^V product space, applying each bond term of
the Hamiltonian directly to bitmask basis states (bit x set = spin at x
flipped down).  They share no code with the sector-basis builders they
check.
"""

import numpy as np
import pytest

from heis.sector import MagnonBasis


def product_hamiltonian(g):
    """Dense 2^V Hamiltonian assembled bond by bond on the product space."""
    V = g.vertex_count
    idx = g.index_of()
    dim = 1 << V
    H = np.zeros((dim, dim))
    for (u, v), J in zip(g.edges, g.couplings):
        a, b = idx[u], idx[v]
        for m in range(dim):
            ai = (m >> a) & 1
            bi = (m >> b) & 1
            if ai != bi:
                H[m, m] += 0.5 * J
                H[m ^ (1 << a) ^ (1 << b), m] -= 0.5 * J
    return H


def product_spin_ops(V):
    """Total S^3 (diagonal) and S^- on the product space."""
    dim = 1 << V
    s3 = np.array([0.5 * V - bin(m).count("1") for m in range(dim)])
    sminus = np.zeros((dim, dim))
    for m in range(dim):
        for x in range(V):
            if not (m >> x) & 1:
                sminus[m | (1 << x), m] += 1.0
    return s3, sminus


def product_casimir(V):
    s3, sm = product_spin_ops(V)
    sp = sm.T
    return np.diag(s3 ** 2) + 0.5 * (sp @ sm + sm @ sp)


def sector_masks(V, n):
    """Bitmasks of the n-magnon basis states in rank order."""
    basis = MagnonBasis(V, n)
    return [sum(1 << x for x in basis.unrank(i)) for i in range(basis.dim)]


def project_sector(mat, V, n, m=None):
    """Block of a product-space matrix between the mag(m) and mag(n) bases."""
    rows = sector_masks(V, n)
    cols = sector_masks(V, m if m is not None else n)
    return mat[np.ix_(rows, cols)]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
