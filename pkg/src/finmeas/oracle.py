"""Brute-force references for small instances.

Nothing here calls into the construction code: the oracle enumerates every
labelled balanced split of the pointer basis into projector blocks and every
ordering of the weights inside each block, then certifies the winner with a
dense matrix simulation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import RankError, SizeError
from .measure import PointerPartition, check_properties, correlation
from .qmat import (
    BasisPermutation,
    KrausChannel,
    MeasurementChannel,
    PermutationChannel,
    as_cmatrix,
    dagger,
    kron,
)
from .states import SectoredSpectrum

#: Largest product dimension ``d_S · d_P`` the exhaustive search accepts.
ORACLE_CAP = 64


def _boltzmann(energies: np.ndarray, beta: float) -> np.ndarray:
    shifted = energies - energies.min()
    b = (shifted == 0).astype(float) if math.isinf(beta) else np.exp(-beta * shifted)
    return b / b.sum()


def brute_c_max(spec: SectoredSpectrum, beta: float) -> float:
    """Sort the weights descending and add up the top ``d_P / d_S``."""
    if spec.dim % spec.d_S:
        raise RankError(f"pointer dimension {spec.dim} is not a multiple of d_S={spec.d_S}")
    w = np.sort(_boltzmann(np.asarray(spec.energies, dtype=float), beta))[::-1]
    return float(w[: spec.dim // spec.d_S].sum())


def simulate_channel_dense(ch: MeasurementChannel, rho_s, ptr) -> np.ndarray:
    """``U (ρ_S ⊗ ρ_P) U†`` (or the Kraus sum) with full matrices."""
    rs = np.diag(rho_s) if np.ndim(rho_s) == 1 else as_cmatrix(rho_s)
    rp = np.diag(ptr) if np.ndim(ptr) == 1 else as_cmatrix(ptr)
    rho = kron(rs, rp)
    ops = ch.kraus() if isinstance(ch, KrausChannel) else [ch.dense()]
    if any(k.shape != rho.shape for k in ops):
        raise SizeError(f"channel of dim {ops[0].shape[0]} applied to state of dim {rho.shape[0]}")
    return sum(k @ rho @ dagger(k) for k in ops)


@dataclass(frozen=True, eq=False)
class OracleResult:
    best_energy: float
    best_assignment: dict
    search_space_size: int
    candidates_evaluated: int
    permutation: BasisPermutation = field(repr=False)
    construction_energy: Optional[float] = None
    matches_construction: Optional[bool] = None
    c_max: float = 0.0


def search_space_size(d_S: int, d_P: int) -> int:
    """Labelled balanced splits times per-block orderings of correlated and
    non-correlated weights."""
    lam = d_P // d_S
    splits = math.factorial(d_P) // math.factorial(lam) ** d_S
    per_block = math.factorial(lam) * math.factorial(d_P - lam)
    return splits * per_block ** d_S


def _unique_orderings(values: np.ndarray) -> np.ndarray:
    """All distinct orderings of ``values`` (rows), duplicates removed."""
    perms = np.array(list(itertools.permutations(range(values.size))), dtype=int)
    rows = values[perms]
    _, keep = np.unique(rows, axis=0, return_index=True)
    return perms[np.sort(keep)]


def _balanced_splits(d_P: int, d_S: int):
    """Labelled splits of ``range(d_P)`` into ``d_S`` blocks of equal size."""
    lam = d_P // d_S

    def rec(remaining: tuple, k: int):
        if k == d_S - 1:
            yield (remaining,)
            return
        for block in itertools.combinations(remaining, lam):
            rest = tuple(n for n in remaining if n not in block)
            for tail in rec(rest, k + 1):
                yield (block,) + tail

    yield from rec(tuple(range(d_P)), 0)


def brute_min_energy(sys_diag, ptr: SectoredSpectrum, beta: float, sys_energies=None,
                     construction=None, tol: float = 1e-12) -> OracleResult:
    """Minimal ``ΔE_II`` over unbiased permutations that reach ``C_max``.

    For system input ``k`` all of its weight must land in pointer block ``k``
    (unbiased); the ``d_P / d_S`` largest weights sit on ``|k⟩ ⊗ Π_k``
    (``C = C_max``) and the rest on ``|m⟩ ⊗ Π_k`` for ``m ≠ k``.  Given a split,
    blocks are independent, so each (block, set) minimum is computed once by
    enumerating every ordering and reused across splits.
    """
    rho = np.asarray(sys_diag, dtype=float)
    d_S = rho.size
    s = np.asarray(ptr.energies, dtype=float)
    d_P = s.size
    if d_P % d_S:
        raise RankError(f"pointer dimension {d_P} is not a multiple of d_S={d_S}")
    if d_S * d_P > ORACLE_CAP:
        raise SizeError(f"oracle limited to d_S·d_P <= {ORACLE_CAP}, got {d_S * d_P}")
    if d_P - d_P // d_S > 7:
        raise SizeError("oracle enumerates orderings of at most 7 non-correlated weights")
    if sys_energies is None:
        sys_energies = (construction.system.energies if construction is not None else np.zeros(d_S))
    e_sys = np.asarray(sys_energies, dtype=float)
    lam = d_P // d_S
    p = _boltzmann(s, beta)
    order = np.argsort(-p, kind="stable")
    top, rest = order[:lam], order[lam:]
    corr_orders = _unique_orderings(p[top])
    nc_orders = _unique_orderings(p[rest])
    evaluated = 0

    @lru_cache(maxsize=None)
    def column(k: int, block: tuple):
        nonlocal evaluated
        blk = np.array(block)
        # correlated slots |k⟩|b⟩
        slot_e = e_sys[k] + s[blk]
        cand = (p[top][corr_orders] * slot_e).sum(axis=1) * rho[k]
        c_best = int(np.argmin(cand))
        # non-correlated slots |m⟩|b⟩, m ≠ k
        others = [m for m in range(d_S) if m != k]
        nc_slots = [(m, b) for m in others for b in block]
        nc_e = np.array([e_sys[m] + s[b] for m, b in nc_slots])
        cand_nc = (p[rest][nc_orders] * nc_e).sum(axis=1) * rho[k]
        n_best = int(np.argmin(cand_nc))
        evaluated += len(corr_orders) + len(nc_orders)
        return float(cand[c_best] + cand_nc[n_best]), c_best, n_best, tuple(nc_slots)

    best = None
    n_splits = 0
    for split in _balanced_splits(d_P, d_S):
        n_splits += 1
        total = sum(column(k, split[k])[0] for k in range(d_S))
        if best is None or total < best[0] - 1e-15:
            best = (total, split)

    _, split = best
    image = np.empty(d_S * d_P, dtype=np.int64)
    columns = []
    for k in range(d_S):
        _, c_best, n_best, nc_slots = column(k, split[k])
        corr_pairs = [(int(top[j]), int(b)) for j, b in zip(corr_orders[c_best], split[k])]
        for n, b in corr_pairs:
            image[k * d_P + n] = k * d_P + b
        nc_pairs = [(int(rest[j]), slot) for j, slot in zip(nc_orders[n_best], nc_slots)]
        for n, (m, b) in nc_pairs:
            image[k * d_P + n] = m * d_P + b
        columns.append({"block": list(split[k]), "correlated": corr_pairs,
                        "noncorrelated": [(n, int(m), int(b)) for n, (m, b) in nc_pairs]})
    perm = BasisPermutation(image)

    # dense certification of the winner
    ch = PermutationChannel(perm)
    out = simulate_channel_dense(ch, rho, p)
    h = np.diag((e_sys[:, None] + s[None, :]).reshape(-1))
    rho_in = np.diag(np.kron(rho, p))
    delta = float(np.trace(h @ (out - rho_in)).real)
    part = PointerPartition(split)
    report = check_properties(ch, p, part, "all")
    c = correlation(out, part)
    c_max = float(p[top].sum())
    if not report.unbiased or abs(c - c_max) > 1e-10:
        raise AssertionError("oracle winner is not an unbiased C_max channel")

    constr_e = None
    match = None
    if construction is not None:
        from .optimal import delta_E_corr_numeric  # local: keep oracle import-independent
        constr_e = delta_E_corr_numeric(construction, dense=True)
        match = abs(constr_e - delta) <= tol

    return OracleResult(
        best_energy=delta,
        best_assignment={"blocks": [list(b) for b in split], "columns": columns},
        search_space_size=search_space_size(d_S, d_P),
        candidates_evaluated=evaluated + n_splits,
        permutation=perm,
        construction_energy=constr_e,
        matches_construction=match,
        c_max=c_max,
    )
