"""Dense complex linear algebra over finite-dimensional Hilbert spaces.

Everything in this package is built on two small immutable value types:
:class:`Operator` (a dense square complex matrix with optional tensor-factor
metadata) and :class:`Vector`. The free functions implement the handful of
structural operations the rest of the library needs: tensor products,
partial traces, matrix exponentials and Hermitian eigendecompositions.

All values are immutable after construction and all operations are pure,
so everything here is safe to use from any number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "ATOL_HERMITIAN",
    "ATOL_POSITIVE",
    "ATOL_COMPLETENESS",
    "ATOL_UNITARY",
    "Operator",
    "Vector",
    "identity",
    "zero",
    "tensor",
    "tensor_vectors",
    "partial_trace",
    "expm",
    "eigh",
    "psd_sqrt",
    "sandwich",
    "haar_vector",
]

# Library-wide tolerances (absolute, entrywise max unless stated otherwise).
ATOL_HERMITIAN = 1e-10
ATOL_POSITIVE = 1e-10      # minimum eigenvalue >= -ATOL_POSITIVE
ATOL_COMPLETENESS = 1e-9   # POVM elements sum to identity within this
ATOL_UNITARY = 1e-10


def _as_complex_matrix(mat) -> np.ndarray:
    arr = np.array(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """A dense operator on a finite-dimensional Hilbert space.

    Parameters
    ----------
    mat:
        Square complex matrix.
    dims:
        Optional tensor-factor dimensions (d1, ..., dk) with prod(dims)
        equal to the matrix dimension. Required by :func:`partial_trace`.
    """

    mat: np.ndarray
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "mat", _as_complex_matrix(self.mat))
        if self.dims is not None:
            dims = tuple(int(d) for d in self.dims)
            if math.prod(dims) != self.mat.shape[0]:
                raise ValueError(
                    f"factor dims {dims} do not multiply to dim {self.mat.shape[0]}"
                )
            object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.mat.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def with_dims(self, dims: tuple[int, ...] | None) -> "Operator":
        return Operator(self.mat, dims)

    def is_hermitian(self, atol: float = ATOL_HERMITIAN) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) <= atol)

    def is_unitary(self, atol: float = ATOL_UNITARY) -> bool:
        delta = self.mat @ self.mat.conj().T - np.eye(self.dim)
        return bool(np.max(np.abs(delta)) <= atol)

    def is_projection(self, atol: float = 1e-8) -> bool:
        if not self.is_hermitian(atol):
            return False
        return bool(np.max(np.abs(self.mat @ self.mat - self.mat)) <= atol)

    # Small operator algebra; dims metadata survives when unambiguous.
    def _merge_dims(self, other: "Operator") -> tuple[int, ...] | None:
        if self.dims is not None:
            return self.dims
        return other.dims

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.mat @ other.mat, self._merge_dims(other))

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.mat + other.mat, self._merge_dims(other))

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.mat - other.mat, self._merge_dims(other))

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.mat * scalar, self.dims)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(-self.mat, self.dims)

    def __repr__(self) -> str:
        return f"Operator(dim={self.dim}, dims={self.dims})"


@dataclass(frozen=True, eq=False)
class Vector:
    """A vector in a finite-dimensional Hilbert space."""

    vec: np.ndarray
    dims: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        arr = np.array(self.vec, dtype=complex).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "vec", arr)
        if self.dims is not None:
            dims = tuple(int(d) for d in self.dims)
            if math.prod(dims) != arr.size:
                raise ValueError("factor dims inconsistent with vector length")
            object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.vec.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def normalized(self) -> "Vector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Vector(self.vec / n, self.dims)

    def projector(self) -> Operator:
        """Rank-one projector onto the (normalized) vector."""
        v = self.normalized().vec
        return Operator(np.outer(v, v.conj()), self.dims)


def identity(dim: int, dims: tuple[int, ...] | None = None) -> Operator:
    return Operator(np.eye(dim, dtype=complex), dims)


def zero(dim: int, dims: tuple[int, ...] | None = None) -> Operator:
    return Operator(np.zeros((dim, dim), dtype=complex), dims)


def _dims_of(op: Operator) -> tuple[int, ...]:
    return op.dims if op.dims is not None else (op.dim,)


def tensor(*ops: Operator) -> Operator:
    """Kronecker product; dims metadata is the concatenated factor list."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    mat = ops[0].mat
    dims = _dims_of(ops[0])
    for op in ops[1:]:
        mat = np.kron(mat, op.mat)
        dims = dims + _dims_of(op)
    return Operator(mat, dims)


def tensor_vectors(*vs: Vector) -> Vector:
    vec = vs[0].vec
    dims: tuple[int, ...] = vs[0].dims if vs[0].dims is not None else (vs[0].dim,)
    for v in vs[1:]:
        vec = np.kron(vec, v.vec)
        dims = dims + (v.dims if v.dims is not None else (v.dim,))
    return Vector(vec, dims)


def partial_trace(op: Operator, keep) -> Operator:
    """Trace out all tensor factors not listed in ``keep``.

    ``op`` must carry dims metadata. ``keep`` is an iterable of factor
    indices to retain, in their original order. The trace of the result
    equals the trace of the input.
    """
    if op.dims is None:
        raise ValueError("partial_trace requires an Operator with dims metadata")
    dims = op.dims
    k = len(dims)
    keep = sorted(set(int(i) for i in keep))
    if any(i < 0 or i >= k for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {k} factors")
    arr = op.mat.reshape(dims + dims)
    # einsum: keep row/col legs of retained factors, contract the rest.
    row = list(range(k))
    col = [k + i if i in keep else i for i in range(k)]
    out_idx = [i for i in keep] + [k + i for i in keep]
    reduced = np.einsum(arr, row + col, out_idx)
    new_dims = tuple(dims[i] for i in keep)
    d = math.prod(new_dims)
    return Operator(reduced.reshape(d, d), new_dims if len(new_dims) > 1 else None)


def expm(op: Operator) -> Operator:
    """Matrix exponential (scaling-and-squaring Padé).

    For anti-Hermitian input the result is unitary to within 1e-10, which
    the unit tests enforce.
    """
    return Operator(scipy.linalg.expm(op.mat), op.dims)


def eigh(op: Operator, atol: float = ATOL_HERMITIAN):
    """Eigendecomposition of a Hermitian operator.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and eigenvector
    matrix ``v`` (columns) unitary, so ``op.mat == v @ diag(w) @ v.conj().T``
    up to roundoff.

    Raises
    ------
    ValueError
        If the input is not Hermitian within ``atol``.
    """
    if not op.is_hermitian(atol):
        raise ValueError("eigh: input is not Hermitian within tolerance")
    w, v = np.linalg.eigh(op.mat)
    return w, v


def psd_sqrt(op: Operator, atol: float = ATOL_POSITIVE) -> Operator:
    """Square root of a positive semidefinite operator (eigenvalue clipping
    only within the positivity tolerance)."""
    w, v = eigh(op)
    if w.min() < -atol:
        raise ValueError(f"psd_sqrt: operator not positive (min eig {w.min():.3e})")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return Operator(root, op.dims)


def sandwich(u: Operator, a: Operator) -> Operator:
    """Conjugation u a u†."""
    return Operator(u.mat @ a.mat @ u.mat.conj().T, a.dims or u.dims)


def haar_vector(dim: int, rng: np.random.Generator) -> Vector:
    """A Haar-random unit vector (Gaussian method)."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Vector(z / np.linalg.norm(z))
