"""Measurement procedures as channels on system ⊗ pointer.

A measurement couples a ``d_S``-level system to a ``d_P``-level pointer and
reads the pointer with a complete set of orthogonal projectors
(:class:`PointerPartition`).  This module evaluates the three properties of an
ideal measurement (unbiased, faithful, non-invasive), the correlation function
``C``, the block "correlation matrix" of a post-interaction state, and builds
and validates the structured unbiased channels (block-supported Kraus sets and
the ``V · Ũ`` unitary factorisation).

Joint operators use the product basis ``|j⟩_S ⊗ |n⟩_P`` with the system index
major, i.e. flat index ``j * d_P + n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ChannelError, PartitionError, RankError, SizeError
from .qmat import (
    DEFAULT_TOL,
    BasisPermutation,
    KrausChannel,
    MeasurementChannel,
    PermutationChannel,
    UnitaryChannel,
    as_cmatrix,
    dagger,
    is_unitary,
    kron,
)


@dataclass(frozen=True, eq=False)
class PointerPartition:
    """``d_S`` disjoint blocks of pointer basis indices defining ``Π_i``.

    ``basis`` (optional) is a ``d_P × d_P`` unitary whose columns are the
    pointer basis vectors ``|ψ_n⟩`` written in the energy eigenbasis; block
    ``i`` collects the columns spanning ``Π_i``.  The default is the energy
    eigenbasis itself.
    """

    blocks: tuple
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        blocks = tuple(tuple(int(n) for n in b) for b in self.blocks)
        if len(blocks) < 1:
            raise PartitionError("partition needs at least one block")
        flat = [n for b in blocks for n in b]
        d_P = len(flat)
        if len(set(flat)) != d_P:
            raise PartitionError("projector blocks overlap")
        if set(flat) != set(range(d_P)):
            raise PartitionError("projector blocks do not cover the pointer space")
        object.__setattr__(self, "blocks", tuple(tuple(sorted(b)) for b in blocks))
        if self.basis is not None:
            b = as_cmatrix(self.basis)
            if b.shape != (d_P, d_P) or not is_unitary(b):
                raise PartitionError("partition basis must be a d_P × d_P unitary")
            b.flags.writeable = False
            object.__setattr__(self, "basis", b)

    @classmethod
    def stride(cls, d_S: int, d_P: int) -> "PointerPartition":
        """Interleaved blocks ``Π_j = span{|n⟩ : n ≡ j (mod d_S)}``."""
        if d_P % d_S:
            raise RankError(f"d_P={d_P} is not a multiple of d_S={d_S}")
        return cls(tuple(tuple(range(j, d_P, d_S)) for j in range(d_S)))

    @classmethod
    def contiguous(cls, d_S: int, d_P: int) -> "PointerPartition":
        if d_P % d_S:
            raise RankError(f"d_P={d_P} is not a multiple of d_S={d_S}")
        lam = d_P // d_S
        return cls(tuple(tuple(range(j * lam, (j + 1) * lam)) for j in range(d_S)))

    @property
    def d_S(self) -> int:
        return len(self.blocks)

    @property
    def d_P(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def block_dims(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    @property
    def equal_blocks(self) -> bool:
        return len(set(self.block_dims)) == 1

    @property
    def has_identity_basis(self) -> bool:
        return self.basis is None

    def basis_matrix(self) -> np.ndarray:
        return np.eye(self.d_P, dtype=np.complex128) if self.basis is None else self.basis

    def block_vectors(self, i: int) -> np.ndarray:
        """Columns spanning ``Π_i`` (``d_P × d_i``)."""
        return self.basis_matrix()[:, list(self.blocks[i])]

    def projector(self, i: int) -> np.ndarray:
        v = self.block_vectors(i)
        return v @ dagger(v)

    def block_of(self) -> np.ndarray:
        """``owner[n]`` is the block containing basis index ``n``."""
        owner = np.empty(self.d_P, dtype=int)
        for i, b in enumerate(self.blocks):
            owner[list(b)] = i
        return owner

    def to_dict(self) -> dict:
        return {"d_S": self.d_S, "blocks": [list(b) for b in self.blocks],
                "basis": "energy" if self.basis is None else "custom"}


# -- outcome tables ------------------------------------------------------------

def _is_diag_vector(rho) -> bool:
    return np.ndim(rho) == 1


def outcome_table(rho_sp, part: PointerPartition) -> np.ndarray:
    """``T[j, i] = tr[(|j⟩⟨j| ⊗ Π_i) ρ̃]`` for system level ``j``, projector ``i``.

    ``rho_sp`` may be a dense matrix or, for partitions in the energy basis,
    the diagonal of a state that is diagonal in the product energy basis.
    """
    d_S, d_P = part.d_S, part.d_P
    if _is_diag_vector(rho_sp):
        if not part.has_identity_basis:
            raise SizeError("a diagonal state needs a partition in the energy basis")
        diag = np.asarray(rho_sp)
        if diag.shape != (d_S * d_P,):
            raise SizeError(f"state of dimension {diag.shape[0]} does not match d_S·d_P = {d_S * d_P}")
        grid = diag.reshape(d_S, d_P)
        return np.stack([grid[:, list(b)].sum(axis=1) for b in part.blocks], axis=1)
    rho = as_cmatrix(rho_sp)
    if rho.shape != (d_S * d_P, d_S * d_P):
        raise SizeError(f"state of shape {rho.shape} does not match d_S·d_P = {d_S * d_P}")
    table = np.zeros((d_S, d_S), dtype=rho.dtype)
    basis = part.basis_matrix()
    for j in range(d_S):
        sl = slice(j * d_P, (j + 1) * d_P)
        block = rho[sl, sl]
        rotated_diag = np.diagonal(block) if part.has_identity_basis else np.diagonal(dagger(basis) @ block @ basis)
        for i, b in enumerate(part.blocks):
            table[j, i] = rotated_diag[list(b)].sum()
    return table


def correlation(rho_sp, part: PointerPartition) -> float:
    """``C(ρ̃) = Σ_i tr[(|i⟩⟨i| ⊗ Π_i) ρ̃]``."""
    return float(np.trace(outcome_table(rho_sp, part)).real)


def pointer_probabilities(rho_sp, part: PointerPartition) -> np.ndarray:
    return outcome_table(rho_sp, part).sum(axis=0).real


def system_probabilities(rho_sp, part: PointerPartition) -> np.ndarray:
    return outcome_table(rho_sp, part).sum(axis=1).real


# -- property reports ----------------------------------------------------------

@dataclass(frozen=True)
class PropertyReport:
    unbiased_residual: float
    faithful_residual: float
    noninvasive_residual: float
    mode: str
    tol: float = DEFAULT_TOL
    d_S: int = 2
    correlation: Optional[float] = None

    @property
    def all_states(self) -> bool:
        return self.mode == "all"

    @property
    def unbiased(self) -> bool:
        return self.unbiased_residual <= self.tol

    @property
    def faithful(self) -> bool:
        return self.faithful_residual <= self.tol

    @property
    def noninvasive(self) -> bool:
        return self.noninvasive_residual <= self.tol

    def to_dict(self) -> dict:
        out = {
            "unbiased": self.unbiased,
            "faithful": self.faithful,
            "noninvasive": self.noninvasive,
            "residuals": {
                "unbiased": self.unbiased_residual,
                "faithful": self.faithful_residual,
                "noninvasive": self.noninvasive_residual,
            },
            "mode": self.mode,
        }
        if self.correlation is not None:
            out["correlation"] = self.correlation
        return out


def _residuals(table: np.ndarray, target_diag: np.ndarray, target_trace: complex) -> tuple[float, float, float]:
    q = table.sum(axis=0)
    n = table.sum(axis=1)
    unb = float(np.max(np.abs(q - target_diag)))
    non = float(np.max(np.abs(n - target_diag)))
    fai = float(abs(np.trace(table) - target_trace))
    return unb, fai, non


def check_state_properties(rho_sp, rho_s, part: PointerPartition, tol: float = DEFAULT_TOL) -> PropertyReport:
    """Fixed-state check of a given post-interaction state against ``ρ_S``."""
    rho_s = np.asarray(rho_s)
    diag = rho_s if rho_s.ndim == 1 else np.diagonal(rho_s)
    table = outcome_table(rho_sp, part)
    unb, fai, non = _residuals(table, diag, 1.0)
    return PropertyReport(unb, fai, non, "fixed", tol, part.d_S, float(np.trace(table).real))


def _pointer_diag(ptr) -> Optional[np.ndarray]:
    p = np.asarray(ptr)
    if p.ndim == 1:
        return p
    off = p - np.diag(np.diagonal(p))
    if np.max(np.abs(off), initial=0.0) == 0.0:
        return np.diagonal(p)
    return None


def _channel_output(ch: MeasurementChannel, rho_s, ptr, part: PointerPartition):
    """Output state, using the diagonal fast path where it is exact."""
    p_diag = _pointer_diag(ptr)
    s = np.asarray(rho_s)
    if (isinstance(ch, PermutationChannel) and p_diag is not None and part.has_identity_basis
            and (s.ndim == 1 or np.count_nonzero(s - np.diag(np.diagonal(s))) == 0)):
        s_diag = s if s.ndim == 1 else np.diagonal(s)
        return ch.perm.apply_diagonal(np.kron(s_diag, p_diag))
    ptr_m = np.diag(p_diag) if np.ndim(ptr) == 1 else ptr
    s_m = np.diag(s) if s.ndim == 1 else s
    return ch.apply(kron(s_m, ptr_m))


def check_properties(ch: MeasurementChannel, ptr, part: PointerPartition,
                     probe: Union[str, np.ndarray, Sequence[float]] = "all",
                     tol: float = DEFAULT_TOL) -> PropertyReport:
    """Evaluate unbiasedness, faithfulness and non-invasiveness of a channel.

    ``probe="all"`` checks every input state: the three properties are affine
    in ``ρ_S``, so it suffices to check the linear functionals on the ``d_S²``
    matrix units ``|j⟩⟨k|``.  Any other ``probe`` is taken as a fixed system
    state (matrix or diagonal).
    """
    d_S, d_P = part.d_S, part.d_P
    if ch.dim != d_S * d_P:
        raise SizeError(f"channel dimension {ch.dim} does not match d_S·d_P = {d_S * d_P}")
    if not (isinstance(probe, str) and probe == "all"):
        out = _channel_output(ch, probe, ptr, part)
        return check_state_properties(out, probe, part, tol)

    diag_only = (isinstance(ch, PermutationChannel) and part.has_identity_basis
                 and _pointer_diag(ptr) is not None)
    worst = np.zeros(3)
    for j in range(d_S):
        for k in range(d_S):
            if diag_only and j != k:
                # permutation of an off-diagonal unit has an all-zero diagonal
                continue
            unit = np.zeros((d_S, d_S), dtype=np.complex128)
            unit[j, k] = 1.0
            out = _channel_output(ch, np.diagonal(unit).real if j == k and diag_only else unit, ptr, part)
            table = outcome_table(out, part)
            worst = np.maximum(worst, _residuals(table, np.diagonal(unit), unit.trace()))
    return PropertyReport(float(worst[0]), float(worst[1]), float(worst[2]), "all", tol, d_S)


def average_correlation(ch: MeasurementChannel, ptr, part: PointerPartition) -> float:
    """Correlation averaged over system states: ``(1/d_S) Σ_i C(E(|i⟩⟨i| ⊗ ptr))``."""
    d_S = part.d_S
    total = 0.0
    for i in range(d_S):
        e = np.zeros(d_S)
        e[i] = 1.0
        total += correlation(_channel_output(ch, e, ptr, part), part)
    return total / d_S


# -- implications between the properties ---------------------------------------

@dataclass(frozen=True)
class ImplicationViolation:
    implication: str
    report: PropertyReport


@dataclass(frozen=True)
class ImplicationResult:
    report: PropertyReport
    violations: tuple = ()
    exempt: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def check_implications(report: PropertyReport, slack: Optional[float] = None) -> ImplicationResult:
    """Check the pairwise implications on a report.

    Premises are judged at ``report.tol``; conclusions at ``slack``
    (default ``2·d_S·tol``), since a premise residual ε can propagate to a
    conclusion residual of a few ε.  The implication
    "unbiased ∧ non-invasive ⇒ faithful" only holds for all input states and is
    exempt in fixed-state mode.
    """
    loose = 2 * report.d_S * report.tol if slack is None else slack
    violations = []
    exempt = []
    if report.faithful and report.unbiased and report.noninvasive_residual > loose:
        violations.append(ImplicationViolation("faithful ∧ unbiased ⇒ noninvasive", report))
    if report.faithful and report.noninvasive and report.unbiased_residual > loose:
        violations.append(ImplicationViolation("faithful ∧ noninvasive ⇒ unbiased", report))
    name = "unbiased ∧ noninvasive ⇒ faithful"
    if report.mode == "all":
        if report.unbiased and report.noninvasive and report.faithful_residual > loose:
            violations.append(ImplicationViolation(name, report))
    else:
        exempt.append(name)
    return ImplicationResult(report, tuple(violations), tuple(exempt))


def implication_suite(ch: MeasurementChannel, ptr, part: PointerPartition, probe="all",
                      tol: float = DEFAULT_TOL) -> ImplicationResult:
    return check_implications(check_properties(ch, ptr, part, probe, tol))


# -- named channels ------------------------------------------------------------

def build_cnot() -> PermutationChannel:
    """``|0⟩⟨0| ⊗ 1 + |1⟩⟨1| ⊗ X`` on qubit ⊗ qubit."""
    return PermutationChannel(BasisPermutation([0, 1, 3, 2]))


def build_unb() -> PermutationChannel:
    """``|00⟩⟨00| + |01⟩⟨11| + |11⟩⟨10| + |10⟩⟨01|``, unbiased at any temperature."""
    # 00→00, 01→10, 10→11, 11→01
    return PermutationChannel(BasisPermutation([0, 2, 3, 1]))


def build_swap() -> PermutationChannel:
    return PermutationChannel(BasisPermutation([0, 2, 1, 3]))


def build_u_d(d: int) -> PermutationChannel:
    """``|0⟩⟨0| ⊗ 1 + Σ_{i≠0} |i⟩⟨i| ⊗ X^(i)`` where ``X^(i)`` swaps ``|0⟩`` and ``|i⟩``."""
    if d < 2:
        raise ValueError("U_d needs d >= 2")
    image = np.arange(d * d)
    for i in range(1, d):
        image[i * d + 0] = i * d + i
        image[i * d + i] = i * d + 0
    return PermutationChannel(BasisPermutation(image))


def thermal_qubit(p: float) -> np.ndarray:
    """``p|0⟩⟨0| + (1-p)|1⟩⟨1|``."""
    return np.diag([p, 1.0 - p]).astype(np.complex128)


# -- block-swap factorisation: U = V · Ũ ----------------------------------------

def _require_equal_blocks(part: PointerPartition) -> int:
    if not part.equal_blocks:
        raise RankError(f"unitary unbiased channels need equal projector ranks, got {part.block_dims}")
    return part.block_dims[0]


def block_swap_permutation(part: PointerPartition) -> BasisPermutation:
    """``V``: ``|i⟩|ψ_m^(j)⟩ ↦ |j⟩|ψ_m^(i)⟩`` as a permutation in the partition basis."""
    _require_equal_blocks(part)
    d_S, d_P = part.d_S, part.d_P
    image = np.empty(d_S * d_P, dtype=np.int64)
    for i in range(d_S):
        for j in range(d_S):
            for m, (src, dst) in enumerate(zip(part.blocks[j], part.blocks[i])):
                image[i * d_P + src] = j * d_P + dst
    return BasisPermutation(image)


def _as_pointer_unitary(u, d_P: int):
    if isinstance(u, BasisPermutation):
        if u.size != d_P:
            raise SizeError(f"pointer permutation of size {u.size}, expected {d_P}")
        return u
    m = as_cmatrix(u)
    if m.shape != (d_P, d_P):
        raise SizeError(f"pointer unitary of shape {m.shape}, expected ({d_P}, {d_P})")
    if not is_unitary(m):
        raise ChannelError("per-outcome operator is not unitary")
    return m


def compose_unbiased_unitary(per_outcome: Sequence, part: PointerPartition) -> MeasurementChannel:
    """Build ``U = V · Σ_i |i⟩⟨i| ⊗ Ũ^(i)`` from per-outcome pointer unitaries.

    Each ``Ũ^(i)`` may be a dense unitary (in the partition basis) or a
    :class:`BasisPermutation`.  When every factor is a permutation and the
    partition uses the energy basis, the result is a permutation channel.
    """
    d_S, d_P = part.d_S, part.d_P
    if d_P % d_S:
        raise RankError(f"d_P={d_P} is not a multiple of d_S={d_S}")
    _require_equal_blocks(part)
    if len(per_outcome) != d_S:
        raise SizeError(f"need {d_S} per-outcome unitaries, got {len(per_outcome)}")
    factors = [_as_pointer_unitary(u, d_P) for u in per_outcome]
    v = block_swap_permutation(part)
    if all(isinstance(f, BasisPermutation) for f in factors):
        inner = np.concatenate([i * d_P + f.image for i, f in enumerate(factors)])
        perm = v.compose(BasisPermutation(inner))
        if part.has_identity_basis:
            return PermutationChannel(perm)
        factors = [f.dense() for f in factors]
    dense = [f.dense() if isinstance(f, BasisPermutation) else f for f in factors]
    u_tilde = np.zeros((d_S * d_P, d_S * d_P), dtype=np.complex128)
    for i, f in enumerate(dense):
        u_tilde[i * d_P:(i + 1) * d_P, i * d_P:(i + 1) * d_P] = f
    u = v.dense() @ u_tilde
    if not part.has_identity_basis:
        rot = np.kron(np.eye(d_S), part.basis)
        u = rot @ u @ dagger(rot)
    return UnitaryChannel(u)


# -- block-supported Kraus operators ------------------------------------------------

def validate_kraus_structure(kraus: Sequence, part: PointerPartition, tol: float = DEFAULT_TOL) -> bool:
    """True iff every ``K_l`` maps ``|i⟩_S ⊗ H_P`` into ``H_S ⊗ Π_i``.

    Checked as a support pattern after rotating the output pointer factor
    into the partition basis, plus per-outcome completeness
    ``Σ_l K_l^(i)† K_l^(i) = |i⟩⟨i| ⊗ 1``.
    """
    ops = [as_cmatrix(k) for k in kraus]
    d_S, d_P = part.d_S, part.d_P
    dim = d_S * d_P
    if any(k.shape != (dim, dim) for k in ops):
        raise SizeError(f"Kraus operators must be {dim} × {dim}")
    completeness = sum(dagger(k) @ k for k in ops)
    if np.max(np.abs(completeness - np.eye(dim))) > tol:
        raise ChannelError("Kraus set is not complete (Σ K†K ≠ 1)")
    rot = np.kron(np.eye(d_S), dagger(part.basis_matrix()))
    owner = part.block_of()
    row_block = np.tile(owner, d_S)
    for k in ops:
        r = rot @ k
        for i in range(d_S):
            cols = r[:, i * d_P:(i + 1) * d_P]
            if np.max(np.abs(cols[row_block != i]), initial=0.0) > tol:
                return False
    for i in range(d_S):
        sel = np.zeros((dim, dim))
        sel[i * d_P:(i + 1) * d_P, i * d_P:(i + 1) * d_P] = np.eye(d_P)
        acc = sum(dagger(k @ sel) @ (k @ sel) for k in ops)
        if np.max(np.abs(acc - sel)) > tol:
            return False
    return True


# -- random generators for property suites ----------------------------------------

def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_permutation(d: int, rng: np.random.Generator) -> BasisPermutation:
    return BasisPermutation(rng.permutation(d))


def random_partition(d_S: int, d_P: int, rng: np.random.Generator, rotated: bool = False) -> PointerPartition:
    """Equal-size blocks over a shuffled pointer basis, optionally rotated."""
    if d_P % d_S:
        raise RankError(f"d_P={d_P} is not a multiple of d_S={d_S}")
    order = rng.permutation(d_P)
    lam = d_P // d_S
    blocks = tuple(tuple(order[j * lam:(j + 1) * lam]) for j in range(d_S))
    return PointerPartition(blocks, random_unitary(d_P, rng) if rotated else None)


def random_state(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_ideal_state(rho_diag, part: PointerPartition, rng: np.random.Generator,
                       rank: int = 2) -> np.ndarray:
    """A post-interaction state ``Σ_i ρ_ii |i⟩⟨i| ⊗ ρ^(i) + off-diag.`` with ``Π_i ρ^(i) = ρ^(i)``.

    Built as ``M M†`` where the system-``i`` rows of ``M`` are supported on
    ``Π_i``, so the coherences between outcomes are random but PSD.
    """
    d_S, d_P = part.d_S, part.d_P
    rho_diag = np.asarray(rho_diag, dtype=float)
    m = np.zeros((d_S * d_P, rank), dtype=np.complex128)
    for i in range(d_S):
        v = part.block_vectors(i)
        g = rng.standard_normal((v.shape[1], rank)) + 1j * rng.standard_normal((v.shape[1], rank))
        g *= np.sqrt(rho_diag[i]) / np.linalg.norm(g)
        m[i * d_P:(i + 1) * d_P] = v @ g
    return m @ dagger(m)


def random_block_kraus(part: PointerPartition, n_ops: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random Kraus set of the block form ``K_l = Σ_i K_l^(i)``.

    ``K_l^(i)`` maps ``|i⟩ ⊗ H_P`` into ``H_S ⊗ Π_i`` with random coefficients;
    each outcome's set is then normalised by ``S_i^{-1/2}`` with
    ``S_i = Σ_l K_l^(i)† K_l^(i)`` (polar normalisation).
    """
    d_S, d_P = part.d_S, part.d_P
    dim = d_S * d_P
    ops = [np.zeros((dim, dim), dtype=np.complex128) for _ in range(n_ops)]
    for i in range(d_S):
        v = part.block_vectors(i)
        raw = []
        for _ in range(n_ops):
            coeff = rng.standard_normal((d_S, v.shape[1], d_P)) + 1j * rng.standard_normal((d_S, v.shape[1], d_P))
            block = np.zeros((dim, d_P), dtype=np.complex128)
            for j in range(d_S):
                block[j * d_P:(j + 1) * d_P] = v @ coeff[j]
            raw.append(block)
        s = sum(dagger(b) @ b for b in raw)
        w, vecs = np.linalg.eigh(s)
        inv_sqrt = vecs @ np.diag(w ** -0.5) @ dagger(vecs)
        for op, b in zip(ops, raw):
            op[:, i * d_P:(i + 1) * d_P] = b @ inv_sqrt
    return ops


# -- correlation matrix ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CorrelationMatrixView:
    """Blocks ``A_ji = (⟨j| ⊗ Π_i) ρ̃ (|j⟩ ⊗ Π_i)`` and their normalised forms.

    Column ``i`` (projector ``i``) is scaled by ``ρ_ii``; normalised blocks are
    ``None`` where ``ρ_ii = 0``.  Unbiasedness for this input reads
    ``Σ_j tr A_ji = ρ_ii`` for every column.
    """

    blocks: tuple
    normalized: tuple
    block_dims: tuple
    rho_diag: np.ndarray
    column_traces: np.ndarray = field(repr=False)

    @property
    def d_S(self) -> int:
        return len(self.block_dims)

    def trace(self, j: int, i: int) -> float:
        return float(np.trace(self.blocks[j][i]).real)

    def column_sums(self) -> list:
        """``Σ_j tr Ã_ji`` per column (``None`` where undefined)."""
        return [None if self.rho_diag[i] == 0 else float(self.column_traces[i] / self.rho_diag[i])
                for i in range(self.d_S)]

    def column_residuals(self) -> np.ndarray:
        return np.abs(self.column_traces - self.rho_diag)


def extract_correlation_matrix(rho_sp, part: PointerPartition, rho_s_diag) -> CorrelationMatrixView:
    rho = as_cmatrix(rho_sp)
    d_S, d_P = part.d_S, part.d_P
    if rho.shape != (d_S * d_P, d_S * d_P):
        raise SizeError(f"state of shape {rho.shape} does not match d_S·d_P = {d_S * d_P}")
    diag = np.asarray(rho_s_diag, dtype=float)
    blocks = []
    normalized = []
    for j in range(d_S):
        sl = slice(j * d_P, (j + 1) * d_P)
        row, nrow = [], []
        for i in range(d_S):
            v = part.block_vectors(i)
            a = dagger(v) @ rho[sl, sl] @ v
            row.append(a)
            nrow.append(None if diag[i] == 0 else a / diag[i])
        blocks.append(tuple(row))
        normalized.append(tuple(nrow))
    traces = np.array([sum(np.trace(blocks[j][i]).real for j in range(d_S)) for i in range(d_S)])
    return CorrelationMatrixView(tuple(blocks), tuple(normalized), part.block_dims, diag, traces)
