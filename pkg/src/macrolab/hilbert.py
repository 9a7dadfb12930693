"""Tensor-product spaces of identical finite-dimensional sites, dense operators.

Basis convention: the computational product basis is ordered with site 0
most significant, i.e. the basis index of the configuration
``(q_0, ..., q_{f-1})`` is ``sum_k q_k * d**(f-1-k)``.  This matches the
ordering produced by chained Kronecker products with site 0 leftmost.

Everything here is dense numpy; construction of a space whose dimension
``d**f`` exceeds a configurable cap fails early, and operations that need
a full spectrum additionally enforce a (smaller) dense-diagonalization cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend

__all__ = [
    "DEFAULT_DIMENSION_CAP",
    "DEFAULT_DENSE_CAP",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "DimensionCapError",
    "HilbertSpace",
    "LocalOperator",
    "ManyBodyOperator",
    "SpectralDecomposition",
    "embed",
    "diagonalize",
    "build_hamiltonian",
    "op_norm",
    "product_state",
    "basis_state",
]

DEFAULT_DIMENSION_CAP = 2**14
DEFAULT_DENSE_CAP = 2**12

# Max-abs-entry tolerance for the hermiticity flag.
HERMITIAN_ATOL = 1e-12

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


class DimensionCapError(ValueError):
    """Requested object exceeds the configured dense-dimension cap."""


def _frozen_complex(matrix) -> np.ndarray:
    out = np.array(matrix, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def _is_hermitian(matrix: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T)) <= atol)


@dataclass(frozen=True)
class HilbertSpace:
    """``num_sites`` identical sites of local dimension ``local_dim``."""

    num_sites: int
    local_dim: int = 2
    cap: int = DEFAULT_DIMENSION_CAP

    def __post_init__(self) -> None:
        if self.num_sites < 1:
            raise ValueError("need at least one site")
        if self.local_dim < 2:
            raise ValueError("local dimension must be at least 2")
        if self.local_dim**self.num_sites > self.cap:
            raise DimensionCapError(
                f"dimension {self.local_dim}**{self.num_sites} exceeds cap {self.cap}"
            )

    @property
    def dimension(self) -> int:
        return self.local_dim**self.num_sites


@dataclass(frozen=True)
class LocalOperator:
    """Operator acting on the sites listed in ``support`` (strictly increasing).

    The matrix is indexed by the product basis of the supported sites,
    ordered with the lowest site most significant.
    """

    support: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    hermitian: bool = True

    def __post_init__(self) -> None:
        support = tuple(int(s) for s in self.support)
        object.__setattr__(self, "support", support)
        if any(s < 0 for s in support):
            raise ValueError("support sites must be non-negative")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError("support must be strictly increasing")
        mat = _frozen_complex(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("local matrix must be square")
        if self.hermitian and not _is_hermitian(mat):
            raise ValueError("matrix flagged hermitian is not hermitian")
        object.__setattr__(self, "matrix", mat)

    @property
    def body_count(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class ManyBodyOperator:
    """Dense operator on a full tensor-product space."""

    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)
    hermitian: bool = False

    def __post_init__(self) -> None:
        mat = _frozen_complex(self.matrix)
        dim = self.space.dimension
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match dimension {dim}")
        if self.hermitian and not _is_hermitian(mat):
            raise ValueError("matrix flagged hermitian is not hermitian")
        object.__setattr__(self, "matrix", mat)

    def __add__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        self._check_space(other)
        return ManyBodyOperator(
            self.space, self.matrix + other.matrix, self.hermitian and other.hermitian
        )

    def __sub__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        self._check_space(other)
        return ManyBodyOperator(
            self.space, self.matrix - other.matrix, self.hermitian and other.hermitian
        )

    def __matmul__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        self._check_space(other)
        return ManyBodyOperator(self.space, self.matrix @ other.matrix)

    def scaled(self, factor: complex) -> "ManyBodyOperator":
        hermitian = self.hermitian and float(np.imag(factor)) == 0.0
        return ManyBodyOperator(self.space, factor * self.matrix, hermitian)

    def _check_space(self, other: "ManyBodyOperator") -> None:
        if self.space != other.space:
            raise ValueError("operators live on different spaces")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues with eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _site_offsets(sites: tuple[int, ...], space: HilbertSpace) -> np.ndarray:
    """Basis-index contributions of all digit patterns on ``sites``."""
    d = space.local_dim
    n = len(sites)
    if n == 0:
        return np.zeros(1, dtype=np.int64)
    weights = np.array(
        [d ** (space.num_sites - 1 - s) for s in sites], dtype=np.int64
    )
    idx = np.arange(d**n, dtype=np.int64)
    place = np.array([d ** (n - 1 - j) for j in range(n)], dtype=np.int64)
    digits = (idx[:, None] // place[None, :]) % d
    return digits @ weights


def accumulate_placement(
    out: np.ndarray, block: np.ndarray, sites: tuple[int, ...], space: HilbertSpace,
    coeff: complex = 1.0,
) -> None:
    """Scatter-add one placement of ``block`` on ``sites`` into ``out``."""
    occupied = set(sites)
    rest = tuple(s for s in range(space.num_sites) if s not in occupied)
    if block.shape[0] != space.local_dim ** len(sites):
        raise ValueError(
            f"block dimension {block.shape[0]} != "
            f"{space.local_dim}**{len(sites)}"
        )
    backend.accumulate_embedded(
        out,
        np.ascontiguousarray(block, dtype=np.complex128),
        _site_offsets(sites, space),
        _site_offsets(rest, space),
        complex(coeff),
    )


def embed(local: LocalOperator, space: HilbertSpace) -> ManyBodyOperator:
    """Extend ``local`` to the full space by identity on the other sites."""
    if local.support and local.support[-1] >= space.num_sites:
        raise ValueError(
            f"support {local.support} does not fit in {space.num_sites} sites"
        )
    expected = space.local_dim ** local.body_count
    if local.matrix.shape[0] != expected:
        raise ValueError(
            f"local matrix dimension {local.matrix.shape[0]} != "
            f"{space.local_dim}**{local.body_count}"
        )
    out = np.zeros((space.dimension, space.dimension), dtype=np.complex128)
    accumulate_placement(out, local.matrix, local.support, space)
    return ManyBodyOperator(space, out, hermitian=local.hermitian)


def diagonalize(op: ManyBodyOperator, dense_cap: int = DEFAULT_DENSE_CAP) -> SpectralDecomposition:
    """Full spectrum of a hermitian operator (LAPACK, ascending eigenvalues)."""
    if not op.hermitian:
        raise ValueError("diagonalize requires an operator flagged hermitian")
    if op.space.dimension > dense_cap:
        raise DimensionCapError(
            f"dimension {op.space.dimension} exceeds dense cap {dense_cap}"
        )
    eigenvalues, eigenvectors = np.linalg.eigh(op.matrix)
    return SpectralDecomposition(eigenvalues, eigenvectors)


def _require_spin_half(kind: str, space: HilbertSpace) -> None:
    if space.local_dim != 2:
        raise ValueError(f"{kind} requires local dimension 2")


def build_hamiltonian(
    kind: str,
    space: HilbertSpace,
    couplings,
    basis: np.ndarray | None = None,
) -> ManyBodyOperator:
    """Assemble a named Hamiltonian on an open chain.

    Kinds and their coupling tuples:

    * ``transverse-field-ising`` -- ``(J, h)``:
      ``H = -J * sum_k Z_k Z_{k+1} - h * sum_k X_k``.
    * ``heisenberg-xxz`` -- ``(j_xy, j_z, h)``:
      ``H = sum_k [j_xy (X_k X_{k+1} + Y_k Y_{k+1}) + j_z Z_k Z_{k+1}] - h * sum_k Z_k``.
    * ``diagonal-test`` -- one entry per basis vector; diagonal in the
      computational basis, or in the supplied orthonormal ``basis``.
      Useful as an operator that keeps any cell structure built from
      commuting diagonal observables invariant.
    """
    couplings = tuple(float(c) for c in np.atleast_1d(np.asarray(couplings, dtype=float)))
    f = space.num_sites
    dim = space.dimension
    out = np.zeros((dim, dim), dtype=np.complex128)

    if kind == "transverse-field-ising":
        _require_spin_half(kind, space)
        if len(couplings) != 2:
            raise ValueError("transverse-field-ising takes couplings (J, h)")
        j, h = couplings
        zz = np.kron(PAULI_Z, PAULI_Z)
        for k in range(f - 1):
            accumulate_placement(out, zz, (k, k + 1), space, coeff=-j)
        for k in range(f):
            accumulate_placement(out, PAULI_X, (k,), space, coeff=-h)
    elif kind == "heisenberg-xxz":
        _require_spin_half(kind, space)
        if len(couplings) != 3:
            raise ValueError("heisenberg-xxz takes couplings (j_xy, j_z, h)")
        j_xy, j_z, h = couplings
        xx = np.kron(PAULI_X, PAULI_X)
        yy = np.kron(PAULI_Y, PAULI_Y)
        zz = np.kron(PAULI_Z, PAULI_Z)
        for k in range(f - 1):
            accumulate_placement(out, xx, (k, k + 1), space, coeff=j_xy)
            accumulate_placement(out, yy, (k, k + 1), space, coeff=j_xy)
            accumulate_placement(out, zz, (k, k + 1), space, coeff=j_z)
        for k in range(f):
            accumulate_placement(out, PAULI_Z, (k,), space, coeff=-h)
    elif kind == "diagonal-test":
        if len(couplings) != dim:
            raise ValueError(
                f"diagonal-test takes one coupling per basis vector ({dim}), "
                f"got {len(couplings)}"
            )
        out[np.diag_indices(dim)] = couplings
        if basis is not None:
            basis = np.asarray(basis, dtype=np.complex128)
            if basis.shape != (dim, dim):
                raise ValueError("basis must be a square matrix of the full dimension")
            out = basis @ out @ basis.conj().T
            out = 0.5 * (out + out.conj().T)
    else:
        raise ValueError(f"unknown hamiltonian kind {kind!r}")

    return ManyBodyOperator(space, out, hermitian=True)


def op_norm(op: ManyBodyOperator) -> float:
    """Spectral norm (largest singular value; largest |eigenvalue| if hermitian)."""
    if op.hermitian:
        return float(np.max(np.abs(np.linalg.eigvalsh(op.matrix))))
    return float(np.linalg.norm(op.matrix, 2))


def product_state(space: HilbertSpace, site_states) -> np.ndarray:
    """Kronecker product of one normalized state vector per site."""
    site_states = [np.asarray(v, dtype=np.complex128) for v in site_states]
    if len(site_states) != space.num_sites:
        raise ValueError("need exactly one state per site")
    for v in site_states:
        if v.shape != (space.local_dim,):
            raise ValueError("site state has wrong local dimension")
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("site states must be normalized")
    out = site_states[0]
    for v in site_states[1:]:
        out = np.kron(out, v)
    return out


def basis_state(space: HilbertSpace, index: int) -> np.ndarray:
    """Computational basis vector by global index."""
    if not 0 <= index < space.dimension:
        raise ValueError("basis index out of range")
    out = np.zeros(space.dimension, dtype=np.complex128)
    out[index] = 1.0
    return out
