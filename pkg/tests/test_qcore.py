import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_reset.errors import ContractError, DimensionError
from phonon_reset.qcore import (
    DensityMatrix, Operator, annihilation, basis, embed, embed_product, expectation, identity, number,
    partial_trace, projector, tensor,
)

dims_strategy = st.lists(st.integers(2, 4), min_size=1, max_size=3)


def random_density(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = m @ m.conj().T
    return r / np.trace(r)


def test_annihilation_matrix_elements():
    a = annihilation(4).matrix
    assert np.allclose(np.diag(a, 1), np.sqrt([1, 2, 3]))
    assert np.count_nonzero(a) == 3


def test_annihilation_rejects_dim_one():
    with pytest.raises(DimensionError):
        annihilation(1)


def test_number_and_projector():
    assert np.allclose(np.diag(number(3).matrix), [0, 1, 2])
    assert np.allclose(projector(3, 2).matrix, np.diag([0, 0, 1]))


def test_operator_matrix_is_read_only():
    op = identity(2)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5


def test_dims_mismatch_in_product():
    with pytest.raises(DimensionError):
        identity(2) @ identity(3)


@given(dims_strategy, st.data())
def test_embed_equals_explicit_kron(dims, data):
    idx = data.draw(st.integers(0, len(dims) - 1))
    a = annihilation(dims[idx])
    factors = [identity(d) for d in dims]
    factors[idx] = a
    assert np.array_equal(embed(a, idx, dims).matrix, tensor(*factors).matrix)


def test_embed_dimension_mismatch():
    with pytest.raises(DimensionError):
        embed(annihilation(3), 0, (2, 3))


@given(dims_strategy, st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_partial_trace_of_product_recovers_factors(dims, seed):
    rng = np.random.default_rng(seed)
    parts = [random_density(rng, d) for d in dims]
    full = parts[0]
    for p in parts[1:]:
        full = np.kron(full, p)
    rho = DensityMatrix(full, dims)
    for i, p in enumerate(parts):
        assert np.allclose(partial_trace(rho, [i]).matrix, p, atol=1e-13)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_partial_trace_preserves_trace_and_hermiticity(seed):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(random_density(rng, 12), (2, 3, 2))
    red = partial_trace(rho, [0, 2])
    assert red.dims == (2, 2)
    assert abs(red.trace() - 1) < 1e-13
    assert red.hermiticity_deviation() < 1e-14


def test_partial_trace_requires_kept_subsystem():
    rho = DensityMatrix(np.eye(4) / 4, (2, 2))
    with pytest.raises(ContractError):
        partial_trace(rho, [])


def test_expectation_requires_hermitian():
    rho = DensityMatrix(np.eye(3) / 3, (3,))
    with pytest.raises(ContractError):
        expectation(annihilation(3), rho)


def test_expectation_number_on_fock_state():
    dims = (2, 4)
    rho = DensityMatrix.from_ket(basis(dims, (1, 3)), dims)
    n = embed(number(4), 1, dims)
    assert expectation(n, rho) == pytest.approx(3.0)


def test_density_check_catches_bad_state():
    with pytest.raises(ContractError):
        DensityMatrix(np.diag([1.2, -0.2]), (2,)).check()
    DensityMatrix(np.diag([0.3, 0.7]), (2,)).check()


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20)
def test_purity_bounds(seed):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(random_density(rng, 5), (5,))
    assert 1 / 5 - 1e-12 <= rho.purity() <= 1 + 1e-12


def test_operator_algebra():
    a = annihilation(3)
    comm = a @ a.dag() - a.dag() @ a
    assert np.allclose(comm.matrix[:2, :2], np.eye(2))
    assert (a * 2.0).matrix[0, 1] == 2.0
    assert np.array_equal((-a).matrix, -a.matrix)
    h = Operator(a.matrix + a.matrix.T, hermitian=True)
    assert h.is_hermitian()


def test_embed_product_matches_embedded_matmul():
    dims = (2, 3, 3)
    q, a = annihilation(2), annihilation(3)
    direct = embed_product({0: q.dag(), 2: a}, dims)
    oracle = embed(q.dag(), 0, dims) @ embed(a, 2, dims)
    np.testing.assert_array_equal(direct.matrix, oracle.matrix)
    with pytest.raises(DimensionError):
        embed_product({1: q}, dims)
