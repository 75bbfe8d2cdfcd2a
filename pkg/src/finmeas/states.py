"""Sectored Hamiltonian spectra, Gibbs states and energies.

Energies are dimensionless multiples of a reference gap (``E_P = 1`` by
default); temperatures only enter through products ``beta * E``.  A spectrum is
always kept in non-decreasing order, which fixes the pointer eigenbasis used by
every construction in the package.  ``beta = math.inf`` is a first-class value
meaning "all weight on the lowest level".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, RankError, SizeError


@dataclass(frozen=True, eq=False)
class SectoredSpectrum:
    """Non-decreasing energy levels split into ``d_S`` equal sectors.

    ``level(k, i)`` is the i-th energy of sector ``k``; sector 0 holds the
    lowest ``dim / d_S`` energies.
    """

    energies: np.ndarray
    d_S: int = 1

    def __post_init__(self):
        e = np.array(self.energies, dtype=float).reshape(-1)
        if e.size == 0:
            raise DomainError("empty spectrum")
        if not np.all(np.isfinite(e)):
            raise DomainError("spectrum has non-finite energies")
        if np.any(np.diff(e) < 0):
            raise DomainError("energies must be sorted non-decreasing; use SectoredSpectrum.from_levels")
        if self.d_S < 1:
            raise DomainError("d_S must be positive")
        e.flags.writeable = False
        object.__setattr__(self, "energies", e)

    @classmethod
    def from_levels(cls, levels: Sequence[float], d_S: int = 1) -> "SectoredSpectrum":
        """Sort arbitrary levels stably by (energy, original index)."""
        lv = np.asarray(levels, dtype=float)
        return cls(lv[np.argsort(lv, kind="stable")], d_S)

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    @property
    def sector_size(self) -> int:
        if self.dim % self.d_S:
            raise RankError(f"pointer dimension {self.dim} is not a multiple of d_S={self.d_S}")
        return self.dim // self.d_S

    def sector(self, k: int) -> np.ndarray:
        s = self.sector_size
        return self.energies[k * s:(k + 1) * s]

    def level(self, k: int, i: int) -> float:
        return float(self.energies[k * self.sector_size + i])

    def with_sectors(self, d_S: int) -> "SectoredSpectrum":
        return SectoredSpectrum(self.energies, d_S)

    def hamiltonian(self) -> np.ndarray:
        """Dense diagonal Hamiltonian (a derived view)."""
        return np.diag(self.energies).astype(np.complex128)

    def to_json(self) -> str:
        return json.dumps({"energies": self.energies.tolist(), "d_S": self.d_S})

    def __eq__(self, other) -> bool:
        return (isinstance(other, SectoredSpectrum) and self.d_S == other.d_S
                and np.array_equal(self.energies, other.energies))

    def __repr__(self) -> str:
        return f"SectoredSpectrum(energies={self.energies.tolist()}, d_S={self.d_S})"


def load_spectrum(path) -> SectoredSpectrum:
    """Read ``{"energies": [...], "d_S": int}``; levels are sorted on load."""
    data = json.loads(Path(path).read_text())
    try:
        energies = data["energies"]
        d_S = int(data.get("d_S", 1))
    except (TypeError, KeyError) as exc:
        raise DomainError(f"malformed spectrum file {path}: {exc}") from exc
    return SectoredSpectrum.from_levels(energies, d_S)


@dataclass(frozen=True, eq=False)
class ThermalWeights:
    """Boltzmann weights of a sorted spectrum.

    ``Z`` is the partition function with energies measured from the lowest
    level, so it stays finite for any ``beta`` (at ``beta = inf`` it equals the
    ground-state degeneracy).  For spectra starting at zero this is the usual
    partition function.
    """

    beta: float
    weights: np.ndarray
    Z: float


def thermal_weights(energies, beta: float) -> ThermalWeights:
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise DomainError("empty spectrum")
    if not beta >= 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    shifted = e - e.min()
    if math.isinf(beta):
        boltz = (shifted == 0).astype(float)
    else:
        boltz = np.exp(-beta * shifted)
    z = float(boltz.sum())
    w = boltz / z
    w.flags.writeable = False
    return ThermalWeights(beta=beta, weights=w, Z=z)


def gibbs(spec: SectoredSpectrum, beta: float) -> tuple[np.ndarray, ThermalWeights]:
    """Thermal state, diagonal in the sorted eigenbasis, and its weights."""
    tw = thermal_weights(spec.energies, beta)
    return np.diag(tw.weights).astype(np.complex128), tw


def qubit_pointer_spectrum(N: int, E_P: float = 1.0, d_S: int = 2) -> SectoredSpectrum:
    """Sorted spectrum of N non-interacting qubits with gap ``E_P``.

    Level ``k * E_P`` appears ``C(N, k)`` times.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    levels = np.repeat(np.arange(N + 1) * float(E_P), [math.comb(N, k) for k in range(N + 1)])
    return SectoredSpectrum(levels, d_S)


def joint_energies(sys: SectoredSpectrum, ptr: SectoredSpectrum) -> np.ndarray:
    """Diagonal of ``H_S ⊗ 1 + 1 ⊗ H_P`` in product-basis order (system index major)."""
    return (sys.energies[:, None] + ptr.energies[None, :]).reshape(-1)


def joint_hamiltonian(sys: SectoredSpectrum, ptr: SectoredSpectrum) -> SectoredSpectrum:
    """Sorted joint spectrum; use :func:`joint_energies` for product order."""
    return SectoredSpectrum.from_levels(joint_energies(sys, ptr))


def energy(rho, spec) -> float:
    """``tr(H rho)`` with ``H`` diagonal.

    ``rho`` may be a matrix or just its diagonal; ``spec`` may be a
    :class:`SectoredSpectrum` or an array of diagonal energies (e.g. the output
    of :func:`joint_energies`).
    """
    e = spec.energies if isinstance(spec, SectoredSpectrum) else np.asarray(spec, dtype=float)
    r = np.asarray(rho)
    diag = np.diagonal(r) if r.ndim == 2 else r
    if diag.shape != e.shape:
        raise SizeError(f"state of dimension {diag.shape[0]} does not match spectrum of dimension {e.size}")
    return float(np.dot(e, diag.real))


def tensor_power_weights(weights, N: int) -> np.ndarray:
    """Diagonal of ``diag(weights)^{⊗N}`` in product order."""
    out = np.ones(1)
    w = np.asarray(weights, dtype=float)
    for _ in range(N):
        out = np.kron(out, w)
    return out
