"""Dense operator algebra for small composite Hilbert spaces.

Subsystem ordering is fixed throughout the package: the qubit is subsystem 0,
followed by the phonon modes in ascending label order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError

HERMITIAN_TOL = 1e-12


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense square operator on a tensor-product space with subsystem ``dims``."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, matrix, dims: Sequence[int] | None = None, hermitian: bool = False):
        arr = _frozen(matrix)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"operator matrix must be square, got shape {arr.shape}")
        dims = (arr.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if int(np.prod(dims)) != arr.shape[0]:
            raise DimensionError(f"dims {dims} do not multiply to matrix size {arr.shape[0]}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", arr)
        if hermitian and not self.is_hermitian():
            dev = self.hermiticity_deviation()
            raise ContractError(f"operator asserted hermitian but deviates by {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_deviation(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_deviation() <= tol

    def dag(self) -> Operator:
        return Operator(self.matrix.conj().T, self.dims)

    def _check(self, other: Operator) -> None:
        if self.dims != other.dims:
            raise DimensionError(f"dims mismatch: {self.dims} vs {other.dims}")

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix @ other.matrix, self.dims)
        return self.matrix @ np.asarray(other)

    def __add__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.matrix - other.matrix, self.dims)

    def __neg__(self) -> Operator:
        return Operator(-self.matrix, self.dims)

    def __mul__(self, scalar) -> Operator:
        return Operator(self.matrix * scalar, self.dims)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Operator(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix on a composite space. Validity is checked on demand via :meth:`check`."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        arr = _frozen(matrix)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {arr.shape}")
        dims = (arr.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if int(np.prod(dims)) != arr.shape[0]:
            raise DimensionError(f"dims {dims} do not multiply to matrix size {arr.shape[0]}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def from_ket(cls, ket, dims: Sequence[int] | None = None) -> DensityMatrix:
        psi = np.asarray(ket, dtype=complex).ravel()
        return cls(np.outer(psi, psi.conj()), dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix.conj().T, self.matrix)))

    def hermiticity_deviation(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def diagonal_tensor(self) -> np.ndarray:
        """Real populations reshaped to ``dims`` (one axis per subsystem)."""
        return np.real(np.diagonal(self.matrix)).reshape(self.dims)

    def check(self, herm_tol: float = 1e-10, trace_tol: float = 1e-9, eig_tol: float = 1e-9) -> None:
        dev = self.hermiticity_deviation()
        if dev > herm_tol:
            raise ContractError(f"density matrix not hermitian (deviation {dev:.3e})")
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ContractError(f"density matrix trace {tr!r} deviates from 1")
        lam = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        if lam.min() < -eig_tol:
            raise ContractError(f"density matrix has negative eigenvalue {lam.min():.3e}")

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims})"


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim), (dim,))


def annihilation(dim: int) -> Operator:
    """Truncated lowering operator with ``A[n-1, n] = sqrt(n)``."""
    if int(dim) != dim or dim < 2:
        raise DimensionError(f"annihilation operator needs dim >= 2, got {dim}")
    dim = int(dim)
    return Operator(np.diag(np.sqrt(np.arange(1, dim)), k=1), (dim,))


def number(dim: int) -> Operator:
    return Operator(np.diag(np.arange(dim, dtype=float)), (dim,))


def projector(dim: int, level: int) -> Operator:
    mat = np.zeros((dim, dim))
    mat[level, level] = 1.0
    return Operator(mat, (dim,))


def basis(dims: Sequence[int], levels: Sequence[int]) -> np.ndarray:
    """Ket for the product basis state ``|levels[0], levels[1], ...>``."""
    if len(dims) != len(levels):
        raise DimensionError("one level per subsystem required")
    idx = int(np.ravel_multi_index(tuple(levels), tuple(dims)))
    ket = np.zeros(int(np.prod(dims)), dtype=complex)
    ket[idx] = 1.0
    return ket


def tensor(*ops: Operator) -> Operator:
    dims = tuple(d for op in ops for d in op.dims)
    mat = reduce(np.kron, (op.matrix for op in ops))
    return Operator(mat, dims)


def embed(op: Operator, index: int, dims: Sequence[int]) -> Operator:
    """Place a single-subsystem operator at position ``index`` of the product space."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= index < len(dims):
        raise DimensionError(f"subsystem index {index} out of range for dims {dims}")
    if op.dim != dims[index]:
        raise DimensionError(
            f"cannot embed operator of dimension {op.dim} into slot {index} of size {dims[index]}"
        )
    left = int(np.prod(dims[:index]))
    right = int(np.prod(dims[index + 1:]))
    mat = np.kron(np.kron(np.eye(left), op.matrix), np.eye(right))
    return Operator(mat, dims)


def embed_product(ops: dict[int, Operator], dims: Sequence[int]) -> Operator:
    """Tensor product with ``ops[k]`` in slot ``k`` and identity elsewhere.

    Equal to the product of the individually embedded operators, without the
    full-space matrix multiplications.
    """
    dims = tuple(int(d) for d in dims)
    mat = np.ones((1, 1))
    for k, d in enumerate(dims):
        op = ops.get(k)
        if op is not None and op.dim != d:
            raise DimensionError(f"cannot embed operator of dimension {op.dim} into slot {k} of size {d}")
        mat = np.kron(mat, np.eye(d) if op is None else op.matrix)
    for k in ops:
        if not 0 <= k < len(dims):
            raise DimensionError(f"subsystem index {k} out of range for dims {dims}")
    return Operator(mat, dims)


def expectation(op: Operator, rho: DensityMatrix) -> float:
    """Tr(op rho) for a hermitian observable."""
    if op.dims != rho.dims:
        raise DimensionError(f"dims mismatch: {op.dims} vs {rho.dims}")
    if not op.is_hermitian():
        raise ContractError("expectation requires a hermitian operator")
    # Tr(AB) without forming the product
    val = np.sum(op.matrix * rho.matrix.T)
    return float(np.real(val))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the subsystems listed in ``keep`` (returned in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.dims)
    if not keep:
        raise ContractError("partial_trace needs at least one subsystem to keep")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"keep indices {keep} invalid for {n} subsystems")
    drop = [i for i in range(n) if i not in keep]
    dk = int(np.prod([rho.dims[i] for i in keep]))
    dr = int(np.prod([rho.dims[i] for i in drop])) if drop else 1
    t = rho.matrix.reshape(rho.dims + rho.dims)
    perm = keep + drop
    t = t.transpose(perm + [p + n for p in perm]).reshape(dk, dr, dk, dr)
    red = np.einsum("ajbj->ab", t)
    return DensityMatrix(red, [rho.dims[i] for i in keep])
