"""Discrete Sobolev machinery: trace inequality, contraction deficit bound,
nearest-good-point extension, and distance-to-good-set diagnostics.

The "good set" for n particles on the N-vertex lattice graph inside its
surrounding box consists of the n-tuples whose points all lie in the lattice
graph and are pairwise distinct; the extension operator copies values from
the nearest good tuple (minimum l1 distance, lexicographic tie-break on the
flattened coordinate tuple).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph import lambda_spec, make_box, make_lambda
from .sector import (
    FunctionSpaceIndex,
    MagnonBasis,
    _sqrt_factorial_scales,
    contraction_T_box,
    free_laplacian,
    hamiltonian_magnon,
    highest_weight_basis,
)

_REL_SLACK = 1e-10


@dataclass(frozen=True)
class TraceResult:
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class DeficitBound:
    """Assembled constants of the contraction deficit bound."""

    L: int
    n: int
    d: int

    @property
    def kinetic_coefficient(self):
        return 2.0 * self.n * self.L / 3.0

    @property
    def mass_coefficient(self):
        return 4.0 * self.n * self.n * self.d / (self.L // 2)


@dataclass(frozen=True)
class DeficitResult:
    deficit: float
    bound: float
    holds: bool
    coefficients: DeficitBound


def trace_check(f):
    """Boundary-value trace inequality for a function on {1..L}.

    |f(1)|^2 <= (2L/3) sum |f(l)-f(l+1)|^2 + (2/L) sum |f(l)|^2.

    The mass coefficient 2/L comes from taking Cauchy-Schwarz over all L
    terms of the averaged telescoping identity; the often-quoted 2(L-1)/L^2
    is smaller than that and actually fails at L=2 (a near-constant f
    violates it), so the assembled constant is used here.
    """
    f = np.asarray(f)
    L = f.shape[0]
    if L < 2:
        raise ValueError("trace_check needs L >= 2")
    lhs = float(abs(f[0]) ** 2)
    kinetic = float(np.sum(np.abs(np.diff(f)) ** 2))
    mass = float(np.sum(np.abs(f) ** 2))
    rhs = (2.0 * L / 3.0) * kinetic + (2.0 / L) * mass
    return TraceResult(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1.0 + 1e-12))


def _check_symmetric(F, V, n, tol=1e-10):
    cube = np.asarray(F).reshape((V,) * n)
    scale = max(1.0, float(np.max(np.abs(cube))) if cube.size else 1.0)
    for k in range(n - 1):
        if np.max(np.abs(cube - np.swapaxes(cube, k, k + 1))) > tol * scale:
            raise ValueError("F is not symmetric under coordinate permutations")
    return cube


@lru_cache(maxsize=16)
def _deficit_operators(d, N, n):
    spec = lambda_spec(d, N)
    box = make_box(d, spec.L_plus)
    return (spec.L_plus, box.vertex_count,
            contraction_T_box(d, N, n).to_csr(),
            free_laplacian(box, n).to_csr())


def contraction_deficit(d, N, n, F):
    """Norm lost by the box-to-sector contraction, against the bound

    deficit = ||F||^2 - ||T F||^2 <= (2nL/3) <F, h F> + (4 n^2 d / floor(L/2)) ||F||^2

    for a symmetric function on the n-fold box, with L the ceiling box size
    and h the free n-particle Laplacian of that box.
    """
    L, box_vertices, T, h = _deficit_operators(d, N, n)
    F = np.asarray(F).ravel()
    _check_symmetric(F, box_vertices, n)
    norm2 = float(np.real(np.vdot(F, F)))
    tf = T @ F
    deficit = norm2 - float(np.real(np.vdot(tf, tf)))
    kinetic = float(np.real(np.vdot(F, h @ F)))
    coeff = DeficitBound(L=L, n=n, d=d)
    bound = coeff.kinetic_coefficient * kinetic + coeff.mass_coefficient * norm2
    return DeficitResult(deficit=deficit, bound=bound,
                         holds=deficit <= bound * (1.0 + _REL_SLACK),
                         coefficients=coeff)


def rho_max(n, d):
    """Worst-case l1 distance from any box tuple to the good set."""
    return n * d + n * max(n - 1, (n - 1) * (2 * n - 2))


class GoodSet:
    """Membership predicate for distinct-point lattice tuples inside the box."""

    def __init__(self, d, N, n):
        self.d = d
        self.N = N
        self.n = n
        spec = lambda_spec(d, N)
        self.L_plus = spec.L_plus
        self.lattice_points = frozenset(make_lambda(d, N).points)

    def contains(self, point_tuple):
        pts = tuple(tuple(p) for p in point_tuple)
        if len(pts) != self.n:
            raise ValueError(f"expected {self.n} points")
        return all(p in self.lattice_points for p in pts) and len(set(pts)) == self.n

    __contains__ = contains


class _Geometry:
    """Distances and nearest-good-point labels on the n-fold box."""

    def __init__(self, d, N, n):
        spec = lambda_spec(d, N)
        self.spec = spec
        self.box = make_box(d, spec.L_plus)
        self.lam = make_lambda(d, N)
        self.findex = FunctionSpaceIndex(self.box.vertex_count, n)
        self.basis = MagnonBasis(self.lam.vertex_count, n)
        self.n = n
        box_pos = {p: i for i, p in enumerate(self.box.points)}
        self.lam_of_box = np.full(self.box.vertex_count, -1, dtype=int)
        for lam_id, p in enumerate(self.lam.points):
            self.lam_of_box[box_pos[p]] = lam_id
        nbrs = [[] for _ in range(self.box.vertex_count)]
        for (u, v) in self.box.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.box_neighbors = nbrs
        self._solve()

    def _is_good(self, tup):
        return (all(self.lam_of_box[x] >= 0 for x in tup)
                and len(set(tup)) == self.n)

    def _neighbors(self, flat):
        tup = self.findex.decode(flat)
        V = self.box.vertex_count
        for slot in range(self.n):
            base = flat - tup[slot] * V ** (self.n - 1 - slot)
            for q in self.box_neighbors[tup[slot]]:
                yield base + q * V ** (self.n - 1 - slot)

    def _solve(self):
        dim = self.findex.dim
        dist = np.full(dim, -1, dtype=int)
        nearest = np.full(dim, -1, dtype=np.int64)
        queue = deque()
        for flat in range(dim):
            if self._is_good(self.findex.decode(flat)):
                dist[flat] = 0
                nearest[flat] = flat
                queue.append(flat)
        if not queue:
            raise ValueError("good set is empty (fewer lattice points than particles)")
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for u in self._neighbors(v):
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        # lexicographically minimal nearest good tuple: the row-major flat
        # index orders tuples exactly like the flattened coordinate order
        for v in order:
            if dist[v] == 0:
                continue
            best = None
            for u in self._neighbors(v):
                if dist[u] == dist[v] - 1:
                    cand = nearest[u]
                    if best is None or cand < best:
                        best = cand
            nearest[v] = best
        self.dist = dist
        self.nearest = nearest

    def rank_of_flat(self, flat):
        tup = self.findex.decode(flat)
        subset = sorted(self.lam_of_box[x] for x in tup)
        return self.basis.rank(subset)


@lru_cache(maxsize=32)
def _geometry(d, N, n):
    return _Geometry(d, N, n)


def rho(d, N, n, point_tuple):
    """Exact l1 distance from a box tuple to the good set (0 on the good set)."""
    geo = _geometry(d, N, n)
    box_pos = {p: i for i, p in enumerate(geo.box.points)}
    try:
        tup = tuple(box_pos[tuple(p)] for p in point_tuple)
    except KeyError as exc:
        raise ValueError(f"point {exc.args[0]} outside the surrounding box")
    if len(tup) != n:
        raise ValueError(f"expected {n} points")
    return int(geo.dist[geo.findex.encode(tup)])


def extension_Xi(d, N, n, psi):
    """Extend sector coefficients to a symmetric function on the n-fold box.

    On the good set the values invert the contraction (so that applying the
    contraction afterwards reproduces ``psi``); everywhere else the value is
    copied from the nearest good tuple, with lexicographic tie-break.
    """
    geo = _geometry(d, N, n)
    psi = np.asarray(psi)
    if psi.shape != (geo.basis.dim,):
        raise ValueError(f"psi must have length {geo.basis.dim}")
    _, inv_scale = _sqrt_factorial_scales(n)
    out = np.zeros(geo.findex.dim, dtype=psi.dtype)
    good = np.flatnonzero(geo.dist == 0)
    for flat in good:
        out[flat] = psi[geo.rank_of_flat(flat)] * inv_scale
    bad = np.flatnonzero(geo.dist != 0)
    out[bad] = out[geo.nearest[bad]]
    return out


def extension_energy_ratio(d, N, n):
    """Free-gas energy of extended highest-weight eigenvectors over their own energy.

    Returns ``(max_ratio, ratios)``, the empirical stand-in for the extension
    bound's non-constructive constant.
    """
    lam = make_lambda(d, N)
    spec = lambda_spec(d, N)
    H = hamiltonian_magnon(lam, n).to_csr()
    basis = highest_weight_basis(lam, n)
    small = basis.T @ H @ basis
    vals, vecs = np.linalg.eigh(small)
    h = free_laplacian(make_box(d, spec.L_plus), n).to_csr()
    ratios = []
    for i in range(len(vals)):
        psi = basis @ vecs[:, i]
        xi = extension_Xi(d, N, n, psi)
        num = float(xi @ (h @ xi))
        den = float(psi @ (H @ psi))
        ratios.append(num / den)
    return max(ratios), ratios
