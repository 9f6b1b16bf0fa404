"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.
"""

import itertools
import math
import time

import numpy as np
import pytest

import heis
from heis.graph import Graph, lambda_spec, make_box, make_lambda, make_path, make_ring
from heis.sector import contraction_T_box, hamiltonian_magnon, highest_weight_basis
from heis.eigen import full_spectrum, label_spins
from heis.foel import energy_level, foel_check, induction_run
from heis.spinwave import (
    GAP_SCALE,
    bose_basis,
    bose_energy,
    gram_limit,
    gram_matrix,
    jump_level,
    mode_count_R,
    occupations,
    residual,
)
from heis.analysis import (
    _geometry,
    contraction_deficit,
    extension_Xi,
    extension_energy_ratio,
    rho,
    rho_max,
    trace_check,
)

FIGURE_SCALE = 2.0

# Eigenvalue columns as plotted in the reference figure (doubled scale),
# keyed by spin deviate n.  The B^1(8) n=1 column lists 6 of the 7 sector
# values, so all columns are compared as sub-multisets.
FIGURE_B18 = {
    0: [0.0],
    1: [0.1522, 0.5858, 1.2346, 2.0000, 2.7654, 3.4142],
    2: [0.3213, 0.7133, 1.1274, 1.4213, 1.5474, 1.8710, 2.2064, 2.7894,
        2.9915, 3.5960, 3.6571, 4.1019, 4.2834, 4.4021, 4.7435, 5.1048,
        5.5762, 5.9513, 6.4313, 7.1632],
    3: [0.5126, 0.8531, 1.1591, 1.5982, 1.9458, 2.3010, 2.4293, 2.8584,
        3.1639, 3.2446, 3.7405, 3.9341, 4.1335, 4.3944, 4.4720, 4.7333,
        4.9549, 4.9584, 5.4655, 5.4934, 5.9565, 6.3488, 6.8494, 7.1977,
        7.6135, 7.7163, 8.5075, 9.4645],
    4: [0.7350, 1.7923, 2.6656, 2.8043, 3.5311, 4.2580, 4.7426, 4.8969,
        5.7420, 6.2900, 6.7904, 7.3344, 8.1676, 10.2499],
}
FIGURE_B23 = {
    0: [0.0],
    1: [1.0000, 1.0000, 2.0000, 3.0000, 3.0000, 4.0000, 4.0000, 6.0000],
    2: [1.6473, 2.0000, 2.3526, 2.5060, 2.5060, 3.0000, 4.0000, 4.0000,
        4.0000, 4.0000, 4.4755, 4.5405, 5.0000, 5.0000, 5.7205, 5.8901,
        5.8901, 6.0000, 6.8912, 7.0000, 7.0000, 7.0000, 8.0000, 8.1567,
        8.6039, 8.6039, 10.2157],
    3: [2.3697, 2.3697, 2.5307, 3.5174, 3.6244, 3.6244, 3.7086, 4.4910,
        4.4910, 4.7472, 4.7487, 4.7487, 4.7500, 5.0000, 5.0000, 5.0000,
        5.5171, 6.3116, 6.4157, 6.4157, 6.5117, 6.5117, 6.6213, 7.0000,
        7.0000, 7.0000, 7.2867, 7.2867, 7.4408, 7.9222, 8.0000, 8.0000,
        8.0000, 8.0000, 8.1979, 8.1979, 8.8425, 8.8425, 9.4152, 9.7291,
        9.9586, 11.0492, 11.0492, 11.1421, 11.1710, 11.4626, 11.4626,
        13.5173],
    4: [2.8606, 3.5468, 3.5468, 3.7096, 4.4988, 4.5242, 5.0384, 5.0384,
        5.3462, 5.4920, 5.6760, 5.6760, 6.2151, 6.2176, 6.7055, 6.8322,
        6.8322, 7.5405, 7.5751, 7.5751, 7.6743, 8.0000, 8.0000, 8.2650,
        8.2650, 8.7824, 9.0000, 9.3117, 9.3117, 9.5785, 9.5785, 9.8867,
        9.9231, 10.4758, 10.9169, 10.9169, 11.2764, 11.9243, 12.4482,
        13.2594, 13.2594, 15.4987],
}


class timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, (
                f"runtime {self.elapsed:.1f}s exceeds {self.limit}s")


def spin_column(g, n):
    """Energies of the new spin multiplets appearing in mag(n), expanded."""
    labeled = label_spins(g, n, full_spectrum(hamiltonian_magnon(g, n)))
    out = []
    for e in labeled.entries:
        if e.n_prime == n:
            out.extend([e.energy] * e.multiplicity)
    return sorted(out)


def assert_submultiset(listed, computed, tol):
    comp = sorted(computed)
    used = [False] * len(comp)
    for x in sorted(listed):
        hit = next(
            (j for j, c in enumerate(comp) if not used[j] and abs(c - x) <= tol),
            None,
        )
        assert hit is not None, f"figure value {x} unmatched within {tol}"
        used[hit] = True


def test_criterion_01_two_site_exactness():
    with timer(1.0) as t:
        g = make_box(1, 2)
        values = []
        for n in range(3):
            values.extend(full_spectrum(hamiltonian_magnon(g, n)).values)
        values.sort()
        assert np.allclose(values, [0.0, 0.0, 0.0, 1.0], atol=1e-12)
        assert abs(energy_level(g, 1) - 1.0) <= 1e-12
    print(f"\nACCEPTANCE 1: PASS (two-site spectrum and E_1 exact, {t.elapsed:.2f}s)")


def test_criterion_02_figure_reproduction():
    with timer(10.0) as t:
        # calibrate the figure scale against the dense single-magnon oracle:
        # half grid Laplacian spectrum {0, .5, .5, 1, ...} vs listed {1,1,2,...}
        column = spin_column(make_box(2, 3), 1)
        scale = FIGURE_B23[1][0] / column[0]
        assert scale == pytest.approx(FIGURE_SCALE, abs=1e-9)
        for g, figure in ((make_box(1, 8), FIGURE_B18), (make_box(2, 3), FIGURE_B23)):
            for n, listed in figure.items():
                computed = [FIGURE_SCALE * e for e in spin_column(g, n)]
                assert_submultiset(listed, computed, tol=1e-3)
    print(f"ACCEPTANCE 2: PASS (figure columns reproduced to 1e-3, {t.elapsed:.2f}s)")


def test_criterion_03_strict_foel_small_boxes():
    with timer(60.0) as t:
        margin = 1e-6
        for L in range(2, 11):
            g = make_box(1, L)
            for n in range(L // 2 + 1):
                v = foel_check(g, n, strict=True, tol=margin)
                assert v.holds, (L, n, v.violations)
        g = make_box(2, 3)
        for n in range(5):
            v = foel_check(g, n, strict=True, tol=margin)
            assert v.holds, (n, v.violations)
    print(f"ACCEPTANCE 3: PASS (strict ordering, margin 1e-6, {t.elapsed:.2f}s)")


def test_criterion_04_ring_exploration():
    with timer(60.0) as t:
        g = make_ring(6)
        v = foel_check(g, 2)
        assert not v.incomplete
        for m in (2, 3):
            dense = energy_level(g, m, method="dense")
            krylov = energy_level(g, m, method="krylov", tol=1e-11)
            assert abs(dense - krylov) <= 1e-8
        note = "violation recorded" if not v.holds else "no violation observed"
        if not v.holds:
            assert v.violations  # the violating pair is part of the record
            pair = (v.n, v.violations[0][0])
        else:
            pair = None
    print(f"ACCEPTANCE 4: PASS (ring check complete, {note} {pair}, {t.elapsed:.2f}s)")


def test_criterion_05_gap_asymptotics():
    with timer(120.0) as t:
        for n in (1, 2):
            disc = []
            for L in (8, 16, 32):
                E = energy_level(make_box(1, L), n)
                disc.append(abs(L ** 2 * E / (GAP_SCALE * n) - 1.0))
            assert disc[2] < disc[1] < disc[0], (n, disc)
            assert disc[2] < 0.15, (n, disc)
    print(f"ACCEPTANCE 5: PASS (gap asymptotics ladder, {t.elapsed:.2f}s)")


def test_criterion_06_spinwave_residual_and_gram():
    with timer(120.0) as t:
        modes = [(1,), (2,)]
        m = 5.0
        r16 = residual(1, 16, modes)
        r64 = residual(1, 64, modes)
        assert r64 < r16  # O(L^{-1/2}) decay of the raw discrepancy
        # absolute threshold on the standard eigenpair-relative residual
        # (the raw quantities are 1.06 and 0.51; see the docs)
        assert r16 / m < 0.5 and r64 / m < 0.5
        tuples = [[(0,), (1,)], [(1,), (1,)], [(1,), (2,)]]
        gram = gram_matrix(1, 64, tuples)
        limit = gram_limit(tuples)
        assert np.max(np.abs(gram - limit)) < 0.1
    print(f"ACCEPTANCE 6: PASS (residual decay + gram limit, {t.elapsed:.2f}s)")


def test_criterion_07_bose_gas_exactness():
    with timer(60.0) as t:
        from heis.sector import free_laplacian
        for (d, L, n) in ((2, 3, 2), (1, 4, 2)):
            occs = occupations(d, L, n)
            assert len(occs) == math.comb(L ** d + n - 1, n)
            B = np.column_stack([bose_basis(d, L, nu) for nu in occs])
            assert np.max(np.abs(B.T @ B - np.eye(len(occs)))) <= 1e-10
            h = free_laplacian(make_box(d, L), n).to_csr()
            for i, nu in enumerate(occs):
                lam = bose_energy(d, L, nu)
                assert np.max(np.abs(h @ B[:, i] - lam * B[:, i])) <= 1e-10
    print(f"ACCEPTANCE 7: PASS (occupation basis orthonormal + eigen, {t.elapsed:.2f}s)")


def test_criterion_08_mode_counting():
    with timer(10.0) as t:
        for d in (1, 2, 3):
            for n in (1, 2, 3, 4):
                assert jump_level(d, n) == n
                for m in range(n):
                    assert mode_count_R(d, n, m) == mode_count_R(d, n - 1, m)
    print(f"ACCEPTANCE 8: PASS (mode-count jump at m=n, {t.elapsed:.2f}s)")


def test_criterion_09_inequality_suites():
    with timer(120.0) as t:
        rng = np.random.default_rng(0)
        for L in (2, 4, 8, 16, 32):
            for _ in range(2000):
                f = rng.standard_normal(L) + 1j * rng.standard_normal(L)
                assert trace_check(f).holds
        for (d, n, N) in ((1, 2, 8), (2, 2, 9)):
            V = lambda_spec(d, N).L_plus ** d
            for _ in range(500):
                cube = rng.standard_normal((V,) * n)
                cube = cube + cube.T
                assert contraction_deficit(d, N, n, cube.ravel()).holds
        d, n, N = 2, 2, 12  # L+ = 4
        pts = list(itertools.product(range(1, 5), repeat=2))
        bound = rho_max(n, d)
        for pair in itertools.product(pts, repeat=2):
            assert rho(d, N, n, pair) <= bound
    print(f"ACCEPTANCE 9: PASS (trace/deficit sweeps + rho bound, {t.elapsed:.2f}s)")


def test_criterion_10_extension_contract():
    with timer(120.0) as t:
        d, n = 2, 2
        geo = _geometry(d, 8, n)
        T = contraction_T_box(d, 8, n).to_csr()
        for i in range(geo.basis.dim):
            e = np.zeros(geo.basis.dim)
            e[i] = 1.0
            back = T @ extension_Xi(d, 8, n, e)
            assert np.array_equal(back, e), f"basis vector {i} not exact"
        top8, _ = extension_energy_ratio(d, 8, n)
        top12, _ = extension_energy_ratio(d, 12, n)
        assert np.isfinite(top8) and np.isfinite(top12)
        assert abs(top12 - top8) / top8 < 0.5
    print(f"ACCEPTANCE 10: PASS (exact roundtrip; ratio {top8:.2f} -> {top12:.2f}, "
          f"{t.elapsed:.2f}s)")


def test_criterion_11_structure_identities(rng):
    with timer(120.0) as t:
        edges = [(0, 1), (0, 3), (1, 2), (2, 7), (3, 4), (4, 5), (5, 6),
                 (6, 7), (2, 5), (1, 8), (8, 9), (9, 10), (3, 10)]
        random_connected = Graph(tuple(range(11)), tuple(sorted(edges)),
                                 (1.0,) * len(edges))
        graphs = [make_path(5), make_path(12), make_box(2, 3),
                  make_lambda(2, 12), random_connected]
        for g in graphs:
            V = g.vertex_count
            for n in range(1, min(4, V // 2) + 1):
                basis = highest_weight_basis(g, n)
                assert basis.shape[1] == math.comb(V, n) - math.comb(V, n - 1)
        for g in (make_path(6), make_box(2, 2), random_connected):
            V = g.vertex_count
            kernel = sum(
                int(np.sum(full_spectrum(hamiltonian_magnon(g, n),
                                         with_vectors=False).values <= 1e-10))
                for n in range(V + 1)
            )
            assert kernel == V + 1
    print(f"ACCEPTANCE 11: PASS (multiplet dimensions + kernel, {t.elapsed:.2f}s)")


def test_criterion_12_induction_harness():
    with timer(120.0) as t:
        for n in (1, 2):
            rep = induction_run(1, n, 12, tol=1e-9)
            assert not rep.partial, rep.failures
            assert rep.diluted is not None
            assert rep.diluted.check_invariants(tol=1e-8) == []
            assert not rep.grid_violations
            assert 12 in rep.foel_conclusions
            direct = foel_check(make_lambda(1, 12), n)
            assert direct.holds  # harness conclusion agrees with direct check
    print(f"ACCEPTANCE 12: PASS (diluted-system invariants + agreement, "
          f"{t.elapsed:.2f}s)")
