"""Maximal correlation, the energy-minimal correlating permutation and energy costs.

For a thermal pointer the best an unbiased unitary measurement can do is
``C_max``: the total weight of the ``d_P / d_S`` most populated pointer levels
(sector 0).  The constructions here reach ``C_max`` with a permutation of the
product energy basis:

* pointer index ``n`` belongs to block ``Π_{n mod d_S}`` (interleaved blocks);
* system level ``k`` keeps the sector-0 weights on ``Π_k`` (correlated part);
* the weights of sector ``s > 0`` go to the system level ``m`` with
  ``π[m, k] = s`` on the same pointer slots (non-correlated part).

Energies are in units where the caller chooses ``E_P``; nothing is rescaled.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, RankError, UsageError
from .measure import PointerPartition
from .qmat import BasisPermutation, PermutationChannel
from .states import (
    SectoredSpectrum,
    joint_energies,
    qubit_pointer_spectrum,
    thermal_weights,
)

CSV_HEADER = ("E_F_over_EP", "beta_prime", "c_max", "dE_I", "dE_II", "dE_total")


# -- C_max ---------------------------------------------------------------------

def c_max(spec: SectoredSpectrum, beta: float) -> float:
    """Sum of the ``d_P / d_S`` largest Boltzmann weights of ``spec``."""
    lam = spec.sector_size
    return float(thermal_weights(spec.energies, beta).weights[:lam].sum())


def _boltz(k: int, beta_ep: float) -> float:
    if math.isinf(beta_ep):
        return 1.0 if k == 0 else 0.0
    return math.exp(-k * beta_ep)


def c_max_qubit_closed_form(N: int, beta_EP: float) -> float:
    """Closed form of ``C_max`` for a qubit system and an ``N``-qubit pointer.

    Odd ``N``: levels ``k ≤ ⌊N/2⌋`` fill exactly half the pointer.  Even ``N``:
    the middle level ``N/2`` straddles the cut, and half of its multiplicity
    belongs to the top half.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if not beta_EP >= 0:
        raise DomainError(f"beta must be >= 0, got {beta_EP}")
    z = 1.0 + _boltz(1, beta_EP)
    total = sum(math.comb(N, k) * _boltz(k, beta_EP) for k in range((N + 1) // 2))
    if N % 2 == 0:
        total += 0.5 * math.comb(N, N // 2) * _boltz(N // 2, beta_EP)
    return total / z ** N


# -- the construction ----------------------------------------------------------

def pairing_matrix(d_S: int) -> np.ndarray:
    """``π[m, k]``: sector whose weights sit on system ``m`` in pointer block ``k``.

    ``π[m, m] = 0``; above the diagonal ``π[m, k] = m + 1``, below it ``m``.
    Every column is a permutation of ``0..d_S-1``.
    """
    m = np.arange(d_S)[:, None]
    k = np.arange(d_S)[None, :]
    return np.where(m == k, 0, np.where(m < k, m + 1, m)).astype(int)


@dataclass(frozen=True, eq=False)
class OptimalConstruction:
    """A ``C_max``-achieving permutation channel with its bookkeeping.

    ``x_star[i] = Σ_k ρ_kk (E^S_k + s_{k + d_S i})`` is the energy that the
    ``i``-th largest weight carries in the correlated subspace; for a qubit
    system this is the nearest-neighbour pairing vector.
    """

    partition: PointerPartition
    channel: PermutationChannel
    x_star: np.ndarray
    pairing_pi: np.ndarray
    c_max: float
    sector_weights: np.ndarray
    beta: float
    system: SectoredSpectrum
    pointer: SectoredSpectrum
    rho_s_diag: np.ndarray

    @property
    def d_S(self) -> int:
        return self.system.dim

    @property
    def d_P(self) -> int:
        return self.pointer.dim

    @property
    def permutation(self) -> BasisPermutation:
        return self.channel.perm

    def pointer_weights(self) -> np.ndarray:
        return self.sector_weights.reshape(-1)

    def joint_energies(self) -> np.ndarray:
        return joint_energies(self.system, self.pointer)

    def input_diagonal(self, rho_s_diag=None) -> np.ndarray:
        r = self.rho_s_diag if rho_s_diag is None else _check_rho_diag(rho_s_diag, self.d_S)
        return np.kron(r, self.pointer_weights())

    def output_diagonal(self, rho_s_diag=None) -> np.ndarray:
        return self.permutation.apply_diagonal(self.input_diagonal(rho_s_diag))


def _check_rho_diag(rho_s_diag, d_S: int) -> np.ndarray:
    r = np.asarray(rho_s_diag, dtype=float).reshape(-1)
    if r.shape != (d_S,):
        raise DomainError(f"system diagonal has {r.size} entries, expected {d_S}")
    if np.any(r < -1e-12) or abs(r.sum() - 1.0) > 1e-10:
        raise DomainError("system diagonal must be non-negative and sum to 1")
    return r


def _x_star(sys: SectoredSpectrum, ptr: SectoredSpectrum, rho: np.ndarray) -> np.ndarray:
    d_S = sys.dim
    lam = ptr.dim // d_S
    s = ptr.energies
    return np.array([sum(rho[k] * (sys.energies[k] + s[k + d_S * i]) for k in range(d_S))
                     for i in range(lam)])


def _assemble(sys, ptr, beta, rho, perm) -> OptimalConstruction:
    d_S = sys.dim
    lam = ptr.dim // d_S
    w = thermal_weights(ptr.energies, beta).weights
    sector_weights = w.reshape(d_S, lam)
    sector_weights.flags.writeable = False
    return OptimalConstruction(
        partition=PointerPartition.stride(d_S, ptr.dim),
        channel=PermutationChannel(perm),
        x_star=_x_star(sys, ptr, rho),
        pairing_pi=pairing_matrix(d_S),
        c_max=float(sector_weights[0].sum()),
        sector_weights=sector_weights,
        beta=beta,
        system=sys,
        pointer=ptr,
        rho_s_diag=rho,
    )


def build_optimal_general(sys: SectoredSpectrum, rho_s_diag, ptr: SectoredSpectrum,
                          beta: float) -> OptimalConstruction:
    """Construction for a ``d_S``-level system and any sorted pointer spectrum.

    Input ``|k⟩|n⟩`` with ``n`` at offset ``i`` of sector ``s`` is sent to
    ``|m⟩|k + d_S·i⟩`` where ``π[m, k] = s`` (``m = k`` when ``s = 0``).
    """
    d_S, d_P = sys.dim, ptr.dim
    if d_P % d_S:
        raise RankError(f"pointer dimension {d_P} is not a multiple of d_S={d_S}")
    rho = _check_rho_diag(rho_s_diag, d_S)
    ptr = ptr.with_sectors(d_S)
    lam = d_P // d_S
    pi = pairing_matrix(d_S)
    # target system for (sector s, column k)
    target = np.empty((d_S, d_S), dtype=int)
    for m in range(d_S):
        for k in range(d_S):
            target[pi[m, k], k] = m
    image = np.empty(d_S * d_P, dtype=np.int64)
    for k in range(d_S):
        for n in range(d_P):
            s, i = divmod(n, lam)
            image[k * d_P + n] = target[s, k] * d_P + k + d_S * i
    return _assemble(sys, ptr, beta, rho, BasisPermutation(image))


def build_optimal_qubit_pointer(N: int, E_P: float, beta: float, rho_s_diag=(0.5, 0.5),
                                E_S: Optional[float] = None) -> OptimalConstruction:
    """Qubit system with gap ``E_S`` (default ``E_P``) and an ``N``-qubit pointer.

    Blocks are the even and odd positions of the sorted pointer spectrum.
    Written out directly (rather than via :func:`build_optimal_general`) so the
    two paths can be cross-checked.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    rho = _check_rho_diag(rho_s_diag, 2)
    sys = SectoredSpectrum([0.0, float(E_P if E_S is None else E_S)])
    if sys.energies[1] < 0:
        raise DomainError("system gap must be non-negative")
    ptr = qubit_pointer_spectrum(N, E_P, d_S=2)
    M = ptr.dim // 2
    image = np.empty(2 * ptr.dim, dtype=np.int64)
    for k in (0, 1):
        for i in range(M):
            # top half: keep system, land on own parity slot
            image[k * ptr.dim + i] = k * ptr.dim + 2 * i + k
            # bottom half: flip system, same slot
            image[k * ptr.dim + M + i] = (1 - k) * ptr.dim + 2 * i + k
    return _assemble(sys, ptr, beta, rho, BasisPermutation(image))


def block_swap_factors(constr: OptimalConstruction) -> list[BasisPermutation]:
    """Per-outcome pointer permutations ``Ũ^(k)`` with ``U = V · Σ_k |k⟩⟨k| ⊗ Ũ^(k)``.

    ``Ũ^(k)`` sends sector ``s``, offset ``i`` to ``ψ_i^(m) = m + d_S·i`` with
    ``π[m, k] = s``; the block swap ``V`` then moves the system to ``m``.
    """
    d_S, d_P = constr.d_S, constr.d_P
    lam = d_P // d_S
    pi = constr.pairing_pi
    out = []
    for k in range(d_S):
        img = np.empty(d_P, dtype=np.int64)
        for n in range(d_P):
            s, i = divmod(n, lam)
            m = int(np.flatnonzero(pi[:, k] == s)[0])
            img[n] = m + d_S * i
        out.append(BasisPermutation(img))
    return out


def final_state_formula(constr: OptimalConstruction, rho_s_diag=None) -> np.ndarray:
    """Output diagonal written down slot by slot, independent of the permutation.

    Slot ``|m⟩ ⊗ |k + d_S·i⟩`` holds ``ρ_kk · p_i^(π[m, k])``.
    """
    d_S, d_P = constr.d_S, constr.d_P
    rho = constr.rho_s_diag if rho_s_diag is None else _check_rho_diag(rho_s_diag, d_S)
    lam = d_P // d_S
    out = np.zeros(d_S * d_P)
    for m in range(d_S):
        for k in range(d_S):
            for i in range(lam):
                out[m * d_P + k + d_S * i] = rho[k] * constr.sector_weights[constr.pairing_pi[m, k], i]
    return out


# -- correlating cost ΔE_II ------------------------------------------------------

def _same_beta(constr: OptimalConstruction, beta: Optional[float]) -> None:
    if beta is None:
        return
    if not (beta == constr.beta or (math.isinf(beta) and math.isinf(constr.beta))):
        raise UsageError(f"construction was built at beta={constr.beta}, evaluated at beta={beta}")


def delta_E_corr_numeric(constr: OptimalConstruction, beta: Optional[float] = None,
                         rho_s_diag=None, dense: bool = False) -> float:
    """``tr[H (ρ̃ − ρ)]`` with ``H = H_S ⊗ 1 + 1 ⊗ H_P``.

    The default path permutes the diagonal; ``dense=True`` builds the full
    unitary and state instead.
    """
    _same_beta(constr, beta)
    energies = constr.joint_energies()
    rho_in = constr.input_diagonal(rho_s_diag)
    if dense:
        u = constr.channel.dense()
        out = np.diagonal(u @ np.diag(rho_in) @ u.conj().T).real
    else:
        out = constr.permutation.apply_diagonal(rho_in)
    return float(energies @ out - energies @ rho_in)


def _qubit_halves(constr: OptimalConstruction):
    if constr.d_S != 2:
        raise UsageError("the two-block closed forms need a qubit system")
    s = constr.pointer.energies
    M = s.size // 2
    return s, M, constr.sector_weights[0], constr.sector_weights[1]


def delta_E_corr_closed_form(constr: OptimalConstruction, beta: Optional[float] = None) -> float:
    """Qubit system at ``ρ_S = 1/2``: the system gap drops out and

    ``ΔE = ½ Σ_i (s_2i + s_2i+1 − 2 s_i) p_i + (s_2i + s_2i+1 − 2 s_{M+i}) p_{M+i}``.
    """
    _same_beta(constr, beta)
    s, M, p0, p1 = _qubit_halves(constr)
    i = np.arange(M)
    pair = s[2 * i] + s[2 * i + 1]
    return float(0.5 * np.sum((pair - 2 * s[i]) * p0 + (pair - 2 * s[M + i]) * p1))


def delta_E_corr_sector_form(constr: OptimalConstruction, beta: Optional[float] = None) -> float:
    """Same quantity with levels labelled ``E_m^(j)`` and double sum over ``j, i``.

    Needs at least two pointer qubits (four levels).
    """
    _same_beta(constr, beta)
    s, M, p0, p1 = _qubit_halves(constr)
    if M < 2 or M % 2:
        raise UsageError("sector form needs d_P divisible by 4")
    q = M // 2
    E = s.reshape(2, M)
    total = 0.0
    for j in range(2):
        for i in range(q):
            ip = i + j * q
            pair = E[j, 2 * i] + E[j, 2 * i + 1]
            total += (pair - 2 * E[0, ip]) * p0[ip] + (pair - 2 * E[1, ip]) * p1[ip]
    return 0.5 * total


def delta_E_corr_pairing(constr: OptimalConstruction, beta: Optional[float] = None) -> float:
    """Qubit system, any diagonal ``ρ_S``: ``x*·a⁰ + (y_0 + y_1)·a¹ − E_in``.

    ``y_0[i] = ρ00 (s_2i + E_S)`` and ``y_1[i] = ρ11 s_2i+1`` are the energies
    of the non-correlated slots.
    """
    _same_beta(constr, beta)
    s, M, p0, p1 = _qubit_halves(constr)
    r0, r1 = constr.rho_s_diag
    e_s = constr.system.energies[1] - constr.system.energies[0]
    i = np.arange(M)
    y0 = r0 * (s[2 * i] + e_s)
    y1 = r1 * s[2 * i + 1]
    x = constr.x_star - constr.system.energies[0]
    e_final = x @ p0 + (y0 + y1) @ p1
    e_init = r1 * e_s + s @ np.concatenate([p0, p1])
    return float(e_final - e_init)


def delta_E_corr_formula(constr: OptimalConstruction, beta: Optional[float] = None,
                         rho_s_diag=None) -> float:
    """General ``d_S``: energy of :func:`final_state_formula` minus the input energy."""
    _same_beta(constr, beta)
    e = constr.joint_energies()
    return float(e @ final_state_formula(constr, rho_s_diag) - e @ constr.input_diagonal(rho_s_diag))


def delta_E_corr_analytic(constr: OptimalConstruction, beta: Optional[float] = None) -> float:
    """Best available formula: closed form at ``ρ_S = 1/2`` for qubits, the pairing
    vectors for other qubit states, and the slot-by-slot formula otherwise."""
    if constr.d_S == 2:
        if np.allclose(constr.rho_s_diag, 0.5, atol=0, rtol=0):
            return delta_E_corr_closed_form(constr, beta)
        return delta_E_corr_pairing(constr, beta)
    return delta_E_corr_formula(constr, beta)


def pairing_vector(ptr_energies, pairs, rho_s_diag, E_S: float) -> np.ndarray:
    """``x_i = ρ00 s_{a_i} + ρ11 (s_{b_i} + E_S)`` for pairs ``(a_i, b_i)``."""
    s = np.asarray(ptr_energies, dtype=float)
    a, b = np.asarray(pairs, dtype=int).T
    return rho_s_diag[0] * s[a] + rho_s_diag[1] * (s[b] + E_S)


def majorizes(x_star, x, tol: float = 1e-12) -> bool:
    """True if every partial sum of the ``k`` smallest entries of ``x_star`` is at
    most the corresponding partial sum of ``x``.

    Paired with non-increasing weights this is what makes ``x_star`` give the
    smallest correlated energy.
    """
    a = np.cumsum(np.sort(np.asarray(x_star, dtype=float)))
    b = np.cumsum(np.sort(np.asarray(x, dtype=float)))
    return a.shape == b.shape and bool(np.all(a <= b + tol))


# -- cooling cost and the cost curve --------------------------------------------

def _ground_population(x: float) -> float:
    if math.isinf(x):
        return 1.0
    return 1.0 / (1.0 + math.exp(-x))


def cooling_cost(N: int, E_P: float, E_F: float, beta: float) -> float:
    """Work to cool ``N`` pointer qubits by swapping with fridge qubits of gap ``E_F``.

    ``ΔE_I = N (E_F − E_P) (p₀(βE_F) − p₀(βE_P))`` with ``p₀(x) = 1/(1 + e^{−x})``.
    """
    if E_F < E_P:
        raise DomainError(f"fridge gap {E_F} below pointer gap {E_P}: heating is not modelled")
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if E_F == E_P:
        return 0.0
    return N * (E_F - E_P) * (_ground_population(beta * E_F) - _ground_population(beta * E_P))


@dataclass(frozen=True)
class CostCurvePoint:
    E_F: float
    beta_prime: float
    c_max: float
    dE_I: float
    dE_II: float

    @property
    def dE_total(self) -> float:
        return self.dE_I + self.dE_II

    def row(self, E_P: float = 1.0) -> tuple:
        return (self.E_F / E_P, self.beta_prime, self.c_max, self.dE_I, self.dE_II, self.dE_total)


def cost_point(N: int, E_P: float, beta: float, E_F: float) -> CostCurvePoint:
    beta_prime = beta * E_F / E_P
    constr = build_optimal_qubit_pointer(N, E_P, beta_prime)
    return CostCurvePoint(
        E_F=float(E_F),
        beta_prime=beta_prime,
        c_max=constr.c_max,
        dE_I=cooling_cost(N, E_P, E_F, beta),
        dE_II=delta_E_corr_numeric(constr),
    )


def cost_curve(N: int, E_P: float, beta: float, fridge_gaps: Sequence[float],
               workers: Optional[int] = None) -> list[CostCurvePoint]:
    """Cost of cooling then maximally correlating at ``ρ_S = 1/2``, per fridge gap.

    Points are independent; ``workers > 1`` evaluates them in a thread pool.
    The result is ordered by ``C_max`` (stable, so ties keep input order).
    """
    gaps = [float(g) for g in fridge_gaps]
    for g in gaps:
        if g < E_P:
            raise DomainError(f"fridge gap {g} below pointer gap {E_P}")
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda g: cost_point(N, E_P, beta, g), gaps))
    else:
        points = [cost_point(N, E_P, beta, g) for g in gaps]
    return sorted(points, key=lambda p: p.c_max)


def fridge_grid(lo: float, hi: float, count: int, spacing: str = "log") -> np.ndarray:
    if count < 1:
        raise DomainError("grid count must be >= 1")
    if hi < lo:
        raise DomainError("grid max below grid min")
    if count == 1:
        return np.array([float(lo)])
    if spacing == "log":
        if lo <= 0:
            raise DomainError("log grid needs a positive minimum")
        return np.geomspace(lo, hi, count)
    if spacing == "linear":
        return np.linspace(lo, hi, count)
    raise DomainError(f"unknown grid spacing {spacing!r}")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def cost_curve_csv(points: Sequence[CostCurvePoint], E_P: float = 1.0) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in points:
        w.writerow([format_float(v) for v in p.row(E_P)])
    return buf.getvalue()


def write_cost_curve_csv(points: Sequence[CostCurvePoint], path, E_P: float = 1.0) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(cost_curve_csv(points, E_P))
