"""Extremal and full eigensolvers, spectral counting, and total-spin labeling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, LabelingError, SizeBudgetError
from .sector import SparseSymOp, casimir_magnon

#: Largest dimension handed to the dense eigensolver.
DENSE_BUDGET = 4096

#: Eigenvalues closer than this are treated as degenerate.
DEGENERACY_TOL = 1e-8

_LANCZOS_RESTART = 200
_LANCZOS_MAX_RESTARTS = 60


@dataclass
class EigResult:
    values: np.ndarray                  # ascending
    vectors: np.ndarray = None          # orthonormal columns, optional
    residual_norms: np.ndarray = None
    method: str = "dense"

    def multiplicities(self, tol=DEGENERACY_TOL):
        """(value, multiplicity) pairs grouped by the degeneracy threshold."""
        groups = []
        for v in self.values:
            if groups and v - groups[-1][0] <= tol:
                groups[-1][1] += 1
            else:
                groups.append([float(v), 1])
        return [(v, m) for v, m in groups]


@dataclass
class SpinLabel:
    energy: float
    n_prime: int
    multiplicity: int


@dataclass
class SpinLabeledSpectrum:
    entries: list                       # of SpinLabel, ascending energy
    vectors: np.ndarray = None          # rotated eigenvectors
    labels: np.ndarray = None           # n' per column of ``vectors``

    def energies_with_label(self, n_prime):
        return [e.energy for e in self.entries if e.n_prime == n_prime]


def _as_csr(op):
    if isinstance(op, SparseSymOp):
        return op.to_csr()
    if sp.issparse(op):
        return op.tocsr()
    return sp.csr_matrix(np.asarray(op, dtype=float))


def full_spectrum(op, with_vectors=True):
    """All eigenvalues (and optionally vectors) of a symmetric operator.

    Dense path only; raises :class:`SizeBudgetError` above ``DENSE_BUDGET``
    (use :func:`min_eig` with the Krylov method for extremal values there).
    """
    mat = _as_csr(op)
    dim = mat.shape[0]
    if mat.shape[0] != mat.shape[1]:
        raise ValueError("full_spectrum needs a square operator")
    if dim > DENSE_BUDGET:
        raise SizeBudgetError(
            f"dim {dim} exceeds dense budget {DENSE_BUDGET}; use the krylov path"
        )
    dense = mat.toarray()
    if with_vectors:
        vals, vecs = np.linalg.eigh(dense)
        res = np.linalg.norm(dense @ vecs - vecs * vals, axis=0)
        return EigResult(values=vals, vectors=vecs, residual_norms=res, method="dense")
    vals = np.linalg.eigvalsh(dense)
    return EigResult(values=vals, method="dense")


def _lanczos_min(mat, deflate, tol, rng, project=None):
    """Minimum eigenpair by restarted Lanczos with full reorthogonalization.

    Deflation is either a matrix of orthonormal columns or, via ``project``,
    an arbitrary orthogonal projector applied as a callable.
    """
    dim = mat.shape[0]

    if project is None:
        def project(x):
            if deflate is not None and deflate.shape[1]:
                x = x - deflate @ (deflate.T @ x)
            return x

    v = project(rng.standard_normal(dim))
    nv = np.linalg.norm(v)
    if nv < 1e-13:          # deflation space is everything
        raise ValueError("deflation space spans the whole operator domain")
    v /= nv
    best_val, best_vec, best_res = None, None, np.inf
    for _ in range(_LANCZOS_MAX_RESTARTS):
        Q = np.zeros((dim, min(_LANCZOS_RESTART, dim)))
        alphas, betas = [], []
        Q[:, 0] = v
        q = v
        for j in range(Q.shape[1]):
            w = project(mat @ q)
            a = float(q @ w)
            alphas.append(a)
            w -= a * q
            if j > 0:
                w -= betas[-1] * Q[:, j - 1]
            # full reorthogonalization, and purge deflation-space drift so a
            # tiny beta cannot smuggle in a spurious deflated direction
            w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
            w = project(w)
            b = np.linalg.norm(w)
            if j + 1 == Q.shape[1] or b < 1e-12:
                break
            betas.append(b)
            q = w / b
            Q[:, j + 1] = q
        k = len(alphas)
        T = np.diag(alphas)
        if betas:
            T += np.diag(betas[: k - 1], 1) + np.diag(betas[: k - 1], -1)
        tvals, tvecs = np.linalg.eigh(T)
        x = Q[:, :k] @ tvecs[:, 0]
        x = project(x)
        nx = np.linalg.norm(x)
        if nx < 1e-13:
            v = project(rng.standard_normal(dim))
            v /= np.linalg.norm(v)
            continue
        x /= nx
        val = float(x @ (mat @ x))
        res = float(np.linalg.norm(project(mat @ x) - val * x))
        if res < best_res:
            best_val, best_vec, best_res = val, x, res
        if res <= tol:
            return val, x, res
        v = x
    raise ConvergenceError(
        f"Lanczos did not reach residual {tol} (best {best_res:.2e})",
        best_value=best_val, best_vector=best_vec, residual=best_res,
    )


def min_eig(op, deflate=None, tol=1e-10, seed=0, method="auto"):
    """Minimum eigenvalue and eigenvector, optionally deflated.

    ``deflate`` is a matrix of orthonormal columns; the minimum is taken over
    their orthogonal complement (the minimum Rayleigh quotient there).
    Deterministic for a fixed seed.
    """
    mat = _as_csr(op)
    dim = mat.shape[0]
    if mat.shape[0] != mat.shape[1]:
        raise ValueError("min_eig needs a square operator")
    if deflate is not None:
        deflate = np.asarray(deflate, dtype=float)
        if deflate.size == 0:
            deflate = None
        else:
            gram = deflate.T @ deflate
            if not np.allclose(gram, np.eye(deflate.shape[1]), atol=1e-10):
                raise ValueError("deflation columns are not orthonormal to 1e-10")
    if method == "auto":
        method = "dense" if dim <= DENSE_BUDGET else "krylov"
    if method == "dense":
        dense = mat.toarray()
        if deflate is None:
            vals, vecs = np.linalg.eigh(dense)
            return float(vals[0]), vecs[:, 0]
        # restrict to the orthogonal complement of the deflation space
        q, _ = np.linalg.qr(deflate, mode="complete")
        comp = q[:, deflate.shape[1]:]
        small = comp.T @ dense @ comp
        vals, vecs = np.linalg.eigh(small)
        vec = comp @ vecs[:, 0]
        return float(vals[0]), vec / np.linalg.norm(vec)
    if method == "krylov":
        rng = np.random.default_rng(seed)
        val, vec, _ = _lanczos_min(mat, deflate, tol, rng)
        return val, vec
    raise ValueError(f"unknown method {method!r}")


def spectral_count(op, energy, degeneracy_tol=DEGENERACY_TOL, psd_tol=1e-10):
    """Dimension of the spectral subspace for energies in [0, energy].

    Counts eigenvalues at most ``energy + degeneracy_tol``.  Requires the
    operator to be positive semi-definite up to ``psd_tol``.
    """
    vals = full_spectrum(op, with_vectors=False).values
    if vals.size and vals[0] < -psd_tol:
        raise ValueError(f"operator is not PSD (min eig {vals[0]:.3e})")
    return int(np.sum(vals <= energy + degeneracy_tol))


def _spin_from_casimir(c, V, tol=1e-8):
    s = 0.5 * (-1.0 + math.sqrt(max(0.0, 1.0 + 4.0 * c)))
    n_prime = 0.5 * V - s
    n_int = int(round(n_prime))
    s_int = 0.5 * V - n_int
    if n_int < 0 or abs(s_int * (s_int + 1.0) - c) > tol:
        raise LabelingError(
            f"Casimir eigenvalue {c!r} is not near any s(s+1)", offending_value=c
        )
    return n_int


def label_spins(g, n, eig, tol=1e-8):
    """Attach an integer spin-deviate label to every eigenvector.

    Within each degenerate Hamiltonian eigenspace the restricted Casimir is
    diagonalized jointly (the two operators commute exactly), so each
    returned column has a definite total spin s = V/2 - n'.
    """
    if eig.vectors is None:
        raise ValueError("label_spins needs eigenvectors")
    V = g.vertex_count
    C = casimir_magnon(g, n).to_csr()
    values = eig.values
    vectors = eig.vectors.copy()
    labels = np.empty(len(values), dtype=int)
    entries = []
    i = 0
    while i < len(values):
        j = i + 1
        while j < len(values) and values[j] - values[j - 1] <= DEGENERACY_TOL:
            j += 1
        W = vectors[:, i:j]
        block = W.T @ (C @ W)
        cvals, cvecs = np.linalg.eigh(block)
        W = W @ cvecs
        group = np.empty(j - i, dtype=int)
        for k in range(j - i):
            measured = float(W[:, k] @ (C @ W[:, k]))
            group[k] = _spin_from_casimir(measured, V, tol)
        order = np.argsort(group, kind="stable")
        vectors[:, i:j] = W[:, order]
        labels[i:j] = group[order]
        energy = float(np.mean(values[i:j]))
        for lab in labels[i:j]:
            if entries and entries[-1].energy == energy and entries[-1].n_prime == lab:
                entries[-1].multiplicity += 1
            else:
                entries.append(SpinLabel(energy=energy, n_prime=int(lab), multiplicity=1))
        i = j
    return SpinLabeledSpectrum(entries=entries, vectors=vectors, labels=labels)
