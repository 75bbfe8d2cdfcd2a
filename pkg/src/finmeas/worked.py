"""Small worked examples with known verdicts, used by ``finmeas verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .measure import (
    PointerPartition,
    build_cnot,
    build_swap,
    build_u_d,
    build_unb,
    check_implications,
    check_properties,
    check_state_properties,
    correlation,
    thermal_qubit,
)
from .qmat import DEFAULT_TOL, kron

QUBIT_PARTITION = PointerPartition(((0,), (1,)))
PROBE_DIAGONALS = (0.0, 0.5, 1.0)


def biased_cnot_probability(rho_ii: float, p: float) -> float:
    """Pointer outcome probability of the CNOT coupling with a thermal pointer."""
    return rho_ii * (2 * p - 1) + 1 - p


def counterexample_state() -> tuple[np.ndarray, np.ndarray]:
    """A two-qubit state that is unbiased and non-invasive for ``diag(3/4, 1/4)``
    but only reaches ``C = 3/4``."""
    rho_sp = np.diag([5 / 8, 1 / 8, 1 / 8, 1 / 8]).astype(np.complex128)
    rho_s = np.diag([3 / 4, 1 / 4]).astype(np.complex128)
    return rho_sp, rho_s


@dataclass(frozen=True)
class CaseResult:
    name: str
    ok: bool
    detail: dict

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name} {self.detail}"


def _verdicts(report) -> tuple:
    return (report.unbiased, report.faithful, report.noninvasive)


def case_cnot_pure(tol: float) -> CaseResult:
    r = check_properties(build_cnot(), thermal_qubit(1.0), QUBIT_PARTITION, "all", tol)
    imp = check_implications(r)
    return CaseResult("cnot-pure-pointer", _verdicts(r) == (True, True, True) and imp.ok, r.to_dict())


def case_cnot_thermal(tol: float, p: float = 0.6) -> CaseResult:
    ch = build_cnot()
    ptr = thermal_qubit(p)
    r_all = check_properties(ch, ptr, QUBIT_PARTITION, "all", tol)
    worst = 0.0
    for r00 in PROBE_DIAGONALS:
        rho = np.array([r00, 1 - r00])
        rep = check_properties(ch, ptr, QUBIT_PARTITION, np.diag(rho), tol)
        expected = max(abs(biased_cnot_probability(rho[i], p) - rho[i]) for i in range(2))
        worst = max(worst, abs(rep.unbiased_residual - expected))
    ok = (not r_all.unbiased) and worst <= 1e-12
    return CaseResult(f"cnot-thermal-p={p}", ok, {"all_states": r_all.to_dict(), "formula_mismatch": float(worst)})


def case_unb_thermal(tol: float, p: float = 0.6) -> CaseResult:
    ch = build_unb()
    ptr = thermal_qubit(p)
    r = check_properties(ch, ptr, QUBIT_PARTITION, "all", tol)
    mismatch = 0.0
    for r00 in PROBE_DIAGONALS:
        out = ch.apply(kron(np.diag([r00, 1 - r00]), ptr))
        mismatch = max(mismatch, abs(correlation(out, QUBIT_PARTITION) - p))
    ok = r.unbiased and not r.faithful and mismatch <= 1e-12 and check_implications(r).ok
    return CaseResult(f"unb-thermal-p={p}", ok, {"report": r.to_dict(), "C_minus_1_over_Z": float(mismatch)})


def case_swap(tol: float) -> CaseResult:
    r = check_properties(build_swap(), thermal_qubit(1.0), QUBIT_PARTITION, "all", tol)
    ok = _verdicts(r) == (True, False, False) and check_implications(r).ok
    return CaseResult("swap-ground-pointer", ok, r.to_dict())


def case_u_d(tol: float, d: int = 3) -> CaseResult:
    ptr = np.zeros(d)
    ptr[0] = 1.0
    part = PointerPartition(tuple((i,) for i in range(d)))
    r = check_properties(build_u_d(d), ptr, part, "all", tol)
    ok = _verdicts(r) == (True, True, True) and check_implications(r).ok
    return CaseResult(f"u_d-d={d}", ok, r.to_dict())


def case_counterexample(tol: float) -> CaseResult:
    rho_sp, rho_s = counterexample_state()
    r = check_state_properties(rho_sp, rho_s, QUBIT_PARTITION, tol)
    imp = check_implications(r)
    ok = (r.unbiased and r.noninvasive and not r.faithful
          and abs(r.correlation - 0.75) <= 1e-15 and imp.ok and len(imp.exempt) == 1)
    return CaseResult("fixed-state-counterexample", ok, r.to_dict())


CASES: tuple[Callable[[float], CaseResult], ...] = (
    case_cnot_pure,
    case_cnot_thermal,
    case_unb_thermal,
    case_swap,
    case_u_d,
    case_counterexample,
)


def run_worked_examples(tol: Optional[float] = None) -> list[CaseResult]:
    t = DEFAULT_TOL if tol is None else tol
    return [case(t) for case in CASES]
