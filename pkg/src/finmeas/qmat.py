"""Dense complex-matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The module adds
the few operations the rest of the package needs (tensor products with a size
cap, partial traces, permutation carriers, channels) and tolerance-based
structural predicates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ChannelError, SizeError

#: Largest total dimension for which dense matrices are built.
DENSE_CAP = 4096
#: Absolute tolerance for structural predicates and verdicts.
DEFAULT_TOL = 1e-10


def as_cmatrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise SizeError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _check_cap(dim: int) -> None:
    if dim > DENSE_CAP:
        raise SizeError(f"dense dimension {dim} exceeds cap {DENSE_CAP}")


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def kron(a, b) -> np.ndarray:
    """Tensor product ``a ⊗ b`` with the dense-size cap enforced."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    _check_cap(a.shape[0] * b.shape[0])
    _check_cap(a.shape[1] * b.shape[1])
    return np.kron(a, b)


def partial_trace(m, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``dims`` is ``(d_A, d_B)`` and ``keep`` is ``"A"`` or ``"B"`` (``"S"`` and
    ``"P"`` are accepted as aliases for system and pointer).
    """
    m = as_cmatrix(m)
    d_a, d_b = dims
    if m.shape != (d_a * d_b, d_a * d_b):
        raise SizeError(f"matrix of shape {m.shape} does not match dims {dims}")
    t = m.reshape(d_a, d_b, d_a, d_b)
    side = {"A": "A", "S": "A", "B": "B", "P": "B"}.get(str(keep).upper())
    if side == "A":
        return np.einsum("ikjk->ij", t)
    if side == "B":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def basis_projector(indices: Sequence[int], dim: int) -> np.ndarray:
    """Diagonal 0/1 projector onto the given computational basis states."""
    p = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.asarray(indices, dtype=int)
    p[idx, idx] = 1.0
    return p


# -- structural predicates ---------------------------------------------------

def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def is_unitary(m, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    eye = np.eye(m.shape[0])
    return bool(np.max(np.abs(m @ dagger(m) - eye), initial=0.0) <= tol)


def is_psd(m, tol: float = DEFAULT_TOL) -> bool:
    if not is_hermitian(m, tol):
        return False
    h = np.asarray(m)
    evals = np.linalg.eigvalsh((h + dagger(h)) / 2)
    return bool(evals.min(initial=0.0) >= -tol)


def is_trace_one(m, tol: float = DEFAULT_TOL) -> bool:
    return bool(abs(np.trace(np.asarray(m)) - 1.0) <= tol)


def is_density_matrix(m, tol: float = DEFAULT_TOL) -> bool:
    return is_trace_one(m, tol) and is_psd(m, tol)


def check_density_matrix(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate and return ``m`` as a density matrix, raising ``ValueError``."""
    m = as_cmatrix(m)
    if not is_hermitian(m, tol):
        raise ValueError("density matrix is not Hermitian")
    if not is_trace_one(m, tol):
        raise ValueError(f"density matrix has trace {np.trace(m).real!r}")
    if not is_psd(m, tol):
        raise ValueError("density matrix has negative eigenvalues")
    return m


# -- permutations and channels -----------------------------------------------

@dataclass(frozen=True, eq=False)
class BasisPermutation:
    """Sparse carrier for a permutation unitary ``U = Σ_n |image[n]⟩⟨n|``."""

    image: np.ndarray

    def __post_init__(self):
        img = np.array(self.image, dtype=np.int64).reshape(-1)
        if not np.array_equal(np.sort(img), np.arange(img.size)):
            raise ChannelError("permutation image is not a bijection on [0, size)")
        img.flags.writeable = False
        object.__setattr__(self, "image", img)

    @classmethod
    def identity(cls, size: int) -> "BasisPermutation":
        return cls(np.arange(size))

    @property
    def size(self) -> int:
        return int(self.image.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, BasisPermutation) and np.array_equal(self.image, other.image)

    def __hash__(self) -> int:
        return hash(self.image.tobytes())

    def inverse(self) -> "BasisPermutation":
        inv = np.empty_like(self.image)
        inv[self.image] = np.arange(self.size)
        return BasisPermutation(inv)

    def compose(self, first: "BasisPermutation") -> "BasisPermutation":
        """Return ``self ∘ first`` (``first`` is applied first)."""
        if first.size != self.size:
            raise SizeError("cannot compose permutations of different size")
        return BasisPermutation(self.image[first.image])

    def dense(self) -> np.ndarray:
        _check_cap(self.size)
        u = np.zeros((self.size, self.size), dtype=np.complex128)
        u[self.image, np.arange(self.size)] = 1.0
        return u

    def apply_diagonal(self, diag) -> np.ndarray:
        """Permute the diagonal of a state that is diagonal in this basis."""
        d = np.asarray(diag)
        if d.shape != (self.size,):
            raise SizeError(f"diagonal of length {d.shape} does not match permutation size {self.size}")
        out = np.empty_like(d)
        out[self.image] = d
        return out

    def apply(self, rho) -> np.ndarray:
        rho = as_cmatrix(rho)
        if rho.shape != (self.size, self.size):
            raise SizeError(f"state of shape {rho.shape} does not match permutation size {self.size}")
        inv = self.inverse().image
        return rho[np.ix_(inv, inv)]


@dataclass(frozen=True, eq=False)
class PermutationChannel:
    perm: BasisPermutation

    @property
    def dim(self) -> int:
        return self.perm.size

    def apply(self, rho) -> np.ndarray:
        return self.perm.apply(rho)

    def dense(self) -> np.ndarray:
        return self.perm.dense()

    def kraus(self) -> list[np.ndarray]:
        return [self.dense()]


@dataclass(frozen=True, eq=False)
class UnitaryChannel:
    matrix: np.ndarray

    def __post_init__(self):
        u = as_cmatrix(self.matrix)
        _check_cap(u.shape[0])
        if not is_unitary(u):
            raise ChannelError("matrix is not unitary")
        u.flags.writeable = False
        object.__setattr__(self, "matrix", u)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = as_cmatrix(rho)
        if rho.shape != self.matrix.shape:
            raise SizeError(f"state of shape {rho.shape} does not match channel dim {self.dim}")
        return self.matrix @ rho @ dagger(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix

    def kraus(self) -> list[np.ndarray]:
        return [self.matrix]


@dataclass(frozen=True, eq=False)
class KrausChannel:
    ops: tuple

    def __post_init__(self):
        ops = tuple(as_cmatrix(k) for k in self.ops)
        if not ops:
            raise ChannelError("empty Kraus set")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops) or shape[0] != shape[1]:
            raise SizeError("Kraus operators must be square and of equal shape")
        _check_cap(shape[0])
        completeness = sum(dagger(k) @ k for k in ops)
        if np.max(np.abs(completeness - np.eye(shape[0]))) > DEFAULT_TOL:
            raise ChannelError("Kraus set is not complete (Σ K†K ≠ 1)")
        for k in ops:
            k.flags.writeable = False
        object.__setattr__(self, "ops", ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = as_cmatrix(rho)
        if rho.shape != (self.dim, self.dim):
            raise SizeError(f"state of shape {rho.shape} does not match channel dim {self.dim}")
        return sum(k @ rho @ dagger(k) for k in self.ops)

    def kraus(self) -> list[np.ndarray]:
        return list(self.ops)


MeasurementChannel = Union[PermutationChannel, UnitaryChannel, KrausChannel]


def apply_channel(ch: MeasurementChannel, rho) -> np.ndarray:
    """Apply a channel to a (not necessarily Hermitian) operator."""
    return ch.apply(rho)


def channel_dense_unitary(ch: MeasurementChannel) -> np.ndarray:
    """Dense unitary of a permutation or unitary channel."""
    if isinstance(ch, KrausChannel):
        if len(ch.ops) == 1:
            return ch.ops[0]
        raise ChannelError("Kraus channel with several operators has no single unitary")
    return ch.dense()
