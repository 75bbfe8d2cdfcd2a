import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finmeas.errors import ChannelError, SizeError
from finmeas.measure import random_state, random_unitary
from finmeas.qmat import (
    DENSE_CAP,
    BasisPermutation,
    KrausChannel,
    PermutationChannel,
    UnitaryChannel,
    basis_projector,
    channel_dense_unitary,
    check_density_matrix,
    is_density_matrix,
    is_hermitian,
    is_psd,
    is_unitary,
    kron,
    partial_trace,
)


def test_partial_trace_of_product(rng):
    a = random_state(3, rng)
    b = random_state(4, rng)
    ab = kron(a, b)
    assert np.allclose(partial_trace(ab, (3, 4), "A"), a)
    assert np.allclose(partial_trace(ab, (3, 4), "P"), b)
    with pytest.raises(ValueError):
        partial_trace(ab, (3, 4), "C")


def test_partial_trace_entangled_bell():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    assert np.allclose(partial_trace(rho, (2, 2), "S"), np.eye(2) / 2)


def test_partial_trace_shape_mismatch():
    with pytest.raises(SizeError):
        partial_trace(np.eye(5), (2, 2))


def test_kron_cap():
    big = np.eye(DENSE_CAP // 2 + 1)
    with pytest.raises(SizeError):
        kron(big, np.eye(2))


def test_predicates(rng):
    u = random_unitary(5, rng)
    assert is_unitary(u)
    assert not is_unitary(2 * u)
    rho = random_state(5, rng)
    assert is_density_matrix(rho) and is_psd(rho) and is_hermitian(rho)
    assert not is_psd(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        check_density_matrix(np.array([[0.5, 1.0], [0.0, 0.5]]))


def test_basis_projector():
    p = basis_projector([0, 2], 3)
    assert np.allclose(p @ p, p)
    assert np.trace(p).real == 2


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(6))), st.permutations(list(range(6))))
def test_permutation_composition_matches_dense(a, b):
    pa, pb = BasisPermutation(a), BasisPermutation(b)
    assert np.array_equal(pa.compose(pb).dense(), pa.dense() @ pb.dense())
    assert pa.compose(pa.inverse()) == BasisPermutation.identity(6)


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(5))), st.lists(st.floats(0, 1), min_size=5, max_size=5))
def test_permutation_fast_paths_match_dense(img, diag):
    p = BasisPermutation(img)
    d = np.asarray(diag)
    u = p.dense()
    dense = u @ np.diag(d) @ u.T
    assert np.allclose(np.diag(p.apply_diagonal(d)), dense)
    assert np.allclose(p.apply(np.diag(d)), dense)


def test_permutation_rejects_non_bijection():
    with pytest.raises(ChannelError):
        BasisPermutation([0, 0, 1])
    with pytest.raises(SizeError):
        BasisPermutation([0, 1]).compose(BasisPermutation([0, 1, 2]))


def test_permutation_is_immutable_and_hashable():
    p = BasisPermutation([1, 0])
    with pytest.raises(ValueError):
        p.image[0] = 0
    assert len({p, BasisPermutation([1, 0])}) == 1


def test_channels_agree(rng):
    perm = BasisPermutation(rng.permutation(4))
    rho = random_state(4, rng)
    pc = PermutationChannel(perm)
    uc = UnitaryChannel(perm.dense())
    kc = KrausChannel((perm.dense(),))
    assert np.allclose(pc.apply(rho), uc.apply(rho))
    assert np.allclose(pc.apply(rho), kc.apply(rho))
    assert np.allclose(channel_dense_unitary(kc), perm.dense())


def test_channel_validation():
    with pytest.raises(ChannelError):
        UnitaryChannel(np.diag([1.0, 2.0]))
    with pytest.raises(ChannelError):
        KrausChannel((np.eye(2) * 0.5,))
    two = KrausChannel((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
    with pytest.raises(ChannelError):
        channel_dense_unitary(two)
