"""Acceptance criteria, one test (and one verdict line) per criterion.

Each test records ``PASS``/``FAIL`` with the tolerance, the observed worst
deviation and the runtime against its budget.  Lines are printed and also
collected into the terminal summary.  A criterion that cannot be met by a
faithful implementation reports ``FAIL`` and is marked as an expected failure
instead of being weakened.
"""

import math
import time

import numpy as np
import pytest

from finmeas.measure import (
    PointerPartition,
    build_cnot,
    build_unb,
    check_implications,
    check_properties,
    check_state_properties,
    compose_unbiased_unitary,
    correlation,
    random_ideal_state,
    random_partition,
    random_state,
    random_unitary,
    thermal_qubit,
)
from finmeas.optimal import (
    build_optimal_general,
    build_optimal_qubit_pointer,
    c_max,
    c_max_qubit_closed_form,
    cost_curve,
    delta_E_corr_closed_form,
    delta_E_corr_numeric,
    delta_E_corr_sector_form,
    fridge_grid,
)
from finmeas.oracle import brute_min_energy
from finmeas.qmat import kron
from finmeas.states import SectoredSpectrum, qubit_pointer_spectrum
from finmeas.worked import biased_cnot_probability, counterexample_state

QP = PointerPartition(((0,), (1,)))


def record(log, n, title, ok, tol, observed, runtime, budget):
    ok = bool(ok) and runtime < budget
    line = (f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} | tol={tol:g} "
            f"observed={observed:.3g} runtime={runtime:.2f}s (budget {budget:g}s)")
    print(line)
    log.append(line)
    return ok


# 1 ----------------------------------------------------------------------------

def test_criterion_1_closed_form_c_max(acceptance_log):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for N in range(1, 11):
        spec = qubit_pointer_spectrum(N)
        for b in rng.uniform(0.01, 5, 20):
            worst = max(worst, abs(c_max_qubit_closed_form(N, b) - c_max(spec, b)))
    dt = time.perf_counter() - t0
    assert record(acceptance_log, 1, "closed-form vs general C_max, N=1..10 x 20 beta",
                  worst < 1e-12, 1e-12, worst, dt, 1.0)


# 2 ----------------------------------------------------------------------------

def test_criterion_2_perfect_correlation_cost(acceptance_log):
    t0 = time.perf_counter()
    values = [delta_E_corr_numeric(build_optimal_qubit_pointer(N, 1.0, math.inf)) for N in (1, 3, 6)]
    dt = time.perf_counter() - t0
    worst = max(abs(v - 0.5) for v in values)
    assert record(acceptance_log, 2, "beta=inf, rho=1/2: dE_II = E_P/2 for N in {1,3,6}",
                  all(v == 0.5 for v in values), 0.0, worst, dt, 1.0)


# 3 ----------------------------------------------------------------------------

def test_criterion_3_oracle_certification(acceptance_log):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for N in (2, 3):
        for b in rng.uniform(0.05, 5, 5):
            c = build_optimal_qubit_pointer(N, 1.0, float(b))
            res = brute_min_energy(c.rho_s_diag, c.pointer, float(b), construction=c)
            worst = max(worst, abs(res.best_energy - res.construction_energy))
            ok &= bool(res.matches_construction)
    for _ in range(5):
        # random 9-level pointer; system gaps drawn from [W, 2W] with W the pointer bandwidth
        ptr = SectoredSpectrum(np.sort(rng.uniform(0, 3, 9)), 3)
        width = ptr.energies[-1] - ptr.energies[0]
        sys = SectoredSpectrum(np.concatenate([[0.0], np.cumsum(rng.uniform(width, 2 * width, 2))]))
        b = float(rng.uniform(0.05, 5))
        c = build_optimal_general(sys, np.ones(3) / 3, ptr, b)
        res = brute_min_energy(c.rho_s_diag, ptr, b, construction=c)
        worst = max(worst, abs(res.best_energy - res.construction_energy))
        ok &= bool(res.matches_construction)
    dt = time.perf_counter() - t0
    assert record(acceptance_log, 3, "oracle minimum = construction (d_S=2 N=2,3; d_S=3 d_P=9)",
                  ok and worst <= 1e-12, 1e-12, worst, dt, 120.0)


# 4 ----------------------------------------------------------------------------

def test_criterion_4_worked_examples(acceptance_log):
    t0 = time.perf_counter()
    checks = []
    dev = 0.0

    r = check_properties(build_cnot(), thermal_qubit(1.0), QP, "all")
    checks.append(r.unbiased and r.faithful and r.noninvasive)

    p = 0.6
    for r00 in (0.0, 0.25, 0.5, 0.75, 1.0):
        rho = np.diag([r00, 1 - r00])
        rep = check_properties(build_cnot(), thermal_qubit(p), QP, rho)
        expected = max(abs(biased_cnot_probability(rho[i, i], p) - rho[i, i]) for i in range(2))
        dev = max(dev, abs(rep.unbiased_residual - expected))
    checks.append(dev <= 1e-12)

    b = 1.0
    inv_z = 1 / (1 + math.exp(-b))
    r = check_properties(build_unb(), thermal_qubit(inv_z), QP, "all")
    checks.append(r.unbiased)
    for r00 in (0.1, 0.5, 0.9):
        out = build_unb().apply(kron(np.diag([r00, 1 - r00]), thermal_qubit(inv_z)))
        d = abs(correlation(out, QP) - inv_z)
        dev = max(dev, d)
        checks.append(d <= 1e-12)

    rho_sp, rho_s = counterexample_state()
    rep = check_state_properties(rho_sp, rho_s, QP)
    checks.append(rep.correlation == 0.75 and rep.unbiased and rep.noninvasive and not rep.faithful)
    dt = time.perf_counter() - t0
    assert record(acceptance_log, 4, "worked examples (CNOT pure/thermal, U_unb, C=3/4 state)",
                  all(checks), 1e-12, dev, dt, 1.0)


# 5 ----------------------------------------------------------------------------

def _noninvasive_factor(part, i, rng):
    """Pointer unitary sending |0⟩ into block i, so the composed channel is ideal on |0⟩."""
    d_P = part.d_P
    v = part.block_vectors(i) @ (rng.standard_normal(len(part.blocks[i])) + 0j)
    m = np.column_stack([v, rng.standard_normal((d_P, d_P - 1)) + 1j * rng.standard_normal((d_P, d_P - 1))])
    q, r = np.linalg.qr(m)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def test_criterion_5_implications(acceptance_log):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    violations = 0
    premises_hit = 0
    n_states = 0
    for _ in range(500):
        d_S = int(rng.integers(2, 4))
        part = random_partition(d_S, d_S * int(rng.integers(1, 4)), rng, rotated=bool(rng.integers(2)))
        rho = rng.dirichlet(np.ones(d_S))
        state = random_ideal_state(rho, part, rng, rank=int(rng.integers(1, 4)))
        rep = check_state_properties(state, rho, part)
        res = check_implications(rep)
        violations += len(res.violations)
        premises_hit += rep.faithful and rep.unbiased
        n_states += 1
    n_channels = 0
    for j in range(120):
        d_S = int(rng.integers(2, 4))
        d_P = d_S * int(rng.integers(1, 3))
        part = random_partition(d_S, d_P, rng, rotated=bool(rng.integers(2)))
        if j % 2:
            ptr = random_state(d_P, rng)
            factors = [random_unitary(d_P, rng) for _ in range(d_S)]
        else:
            ptr = np.zeros((d_P, d_P), dtype=complex)
            ptr[0, 0] = 1.0
            factors = [_noninvasive_factor(part, i, rng) for i in range(d_S)]
        ch = compose_unbiased_unitary(factors, part)
        rep_all = check_properties(ch, ptr, part, "all")
        violations += len(check_implications(rep_all).violations)
        premises_hit += rep_all.unbiased and rep_all.noninvasive
        rho_s = random_state(d_S, rng)
        violations += len(check_implications(check_properties(ch, ptr, part, rho_s)).violations)
        n_channels += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and n_states >= 500 and n_channels >= 100 and premises_hit > 500
    assert record(acceptance_log, 5, f"implications over {n_states} states and {n_channels} unitaries",
                  ok, 1e-10, violations, dt, 30.0)


# 6 ----------------------------------------------------------------------------

def _fig_curve():
    return cost_curve(6, 1.0, 1 / 30, fridge_grid(1.0, 60.0, 100, "log"))


def test_criterion_6_cost_curve(acceptance_log):
    t0 = time.perf_counter()
    pts = _fig_curve()
    dt = time.perf_counter() - t0
    c = np.array([p.c_max for p in pts])
    e1 = np.array([p.dE_I for p in pts])
    e2 = np.array([p.dE_II for p in pts])
    at = {round(p.E_F, 9): p for p in cost_curve(6, 1.0, 1 / 30, [10.0, 60.0])}
    parts = {
        "c_max increasing": bool(np.all(np.diff(c) > 0)),
        "dE_I increasing": bool(np.all(np.diff(e1) > 0)),
        "dE_I > 10 dE_II when c_max > 0.9": bool(np.all(e1[c > 0.9] > 10 * e2[c > 0.9])),
        "dE_II >= 0": bool(np.all(e2 >= 0)),
        "dE_II <= E_P/2 + 1e-10": bool(np.all(e2 <= 0.5 + 1e-10)),
        "dE_I(60) > 5 dE_I(10)": at[60.0].dE_I > 5 * at[10.0].dE_I,
    }
    failed = [k for k, v in parts.items() if not v]
    title = "cost curve N=6 beta E_P=1/30, 100 log gaps" + (f" [failing: {'; '.join(failed)}]" if failed else "")
    record(acceptance_log, 6, title, not failed, 1e-10, float(e2.max() - 0.5), dt, 10.0)
    # everything except the E_P/2 ceiling must hold
    assert [k for k in failed if k != "dE_II <= E_P/2 + 1e-10"] == []
    assert dt < 10.0


@pytest.mark.xfail(strict=True, reason="the minimal correlating cost exceeds E_P/2 for intermediate beta'; "
                                        "brute force confirms no C_max channel does better")
def test_criterion_6_correlating_cost_ceiling():
    e2 = np.array([p.dE_II for p in _fig_curve()])
    assert np.all(e2 <= 0.5 + 1e-10)


def test_criterion_6_ceiling_excess_is_not_an_artifact():
    # the overshoot already appears where the exhaustive search applies
    c = build_optimal_qubit_pointer(3, 1.0, 2.29)
    res = brute_min_energy(c.rho_s_diag, c.pointer, 2.29, construction=c)
    assert res.matches_construction and res.best_energy > 0.54


# 7 ----------------------------------------------------------------------------

def test_criterion_7_c_max_state_independent(acceptance_log):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    for b in (0.1, 1.0, 4.0):
        c = build_optimal_qubit_pointer(4, 1.0, b)
        for _ in range(20):
            rho = rng.dirichlet(np.ones(2))
            worst = max(worst, abs(correlation(c.output_diagonal(rho), c.partition) - c.c_max))
    dt = time.perf_counter() - t0
    assert record(acceptance_log, 7, "C = C_max for 20 random rho_S x 3 beta (N=4)",
                  worst < 1e-12, 1e-12, worst, dt, 10.0)


# 8 ----------------------------------------------------------------------------

def test_criterion_8_dual_path_energy(acceptance_log):
    rng = np.random.default_rng(8)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        N = int(rng.integers(1, 7))
        b = float(rng.uniform(0.01, 5))
        c = build_optimal_qubit_pointer(N, 1.0, b, E_S=float(rng.uniform(0.1, 3)))
        dense = delta_E_corr_numeric(c, dense=True)
        worst = max(worst, abs(delta_E_corr_closed_form(c) - dense))
        if N >= 2:
            worst = max(worst, abs(delta_E_corr_sector_form(c) - dense))
    dt = time.perf_counter() - t0
    assert record(acceptance_log, 8, "analytic vs dense-trace dE_II on 50 instances (N<=6)",
                  worst < 1e-10, 1e-10, worst, dt, 10.0)
