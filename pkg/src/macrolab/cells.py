"""Phase-cell decomposition: joint coarse graining of quasi-commuting observables.

The spectrum of the first observable is split into fixed-width windows
anchored at its minimum; within each window the next observable is
compressed onto the window's eigenspace, re-diagonalized, and binned the
same way, recursively.  The surviving (non-empty) subspaces are the phase
cells.  Each cell carries one representative value per observable -- the
mean of the eigenvalues it absorbed, so that coarse traces track fine
traces -- and the resulting coarse observables

    A_bar = sum_J A_J P_J

all share one orthonormal eigenbasis and therefore commute exactly, while
staying within one window width of the fine observable on every cell
vector.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .hilbert import (
    DEFAULT_DENSE_CAP,
    DimensionCapError,
    HilbertSpace,
    ManyBodyOperator,
    diagonalize,
)
from .observables import MacroObservable

__all__ = [
    "SCHEMA_VERSION",
    "CellResolution",
    "PhaseCell",
    "PhaseCellDecomposition",
    "decompose",
    "coarse_observable",
    "residual",
]

SCHEMA_VERSION = 1

# Boundary nudge: an eigenvalue sitting exactly on a window edge belongs
# to the lower window, deterministically.
_EDGE_SHIFT = 1e-12


@dataclass(frozen=True)
class CellResolution:
    """Window width for one observable's coarse graining."""

    delta: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.delta) or self.delta <= 0:
            raise ValueError("resolution must be a positive finite width")


@dataclass(eq=False)
class PhaseCell:
    """One joint spectral window: a subspace with representative values."""

    label: int
    values: tuple[float, ...]
    windows: tuple[float, ...]
    dim: int
    basis: np.ndarray | None = field(repr=False)
    space: HilbertSpace = field(repr=False)

    @cached_property
    def projector(self) -> ManyBodyOperator:
        if self.basis is None:
            raise ValueError(
                "cell was loaded from a summary without basis vectors"
            )
        mat = self.basis @ self.basis.conj().T
        return ManyBodyOperator(self.space, 0.5 * (mat + mat.conj().T), hermitian=True)


def _bin_groups(values: np.ndarray, anchor: float, delta: float):
    """Split ascending ``values`` into fixed windows of width ``delta``.

    Yields ``(start, stop, window_start)`` index ranges for the non-empty
    windows, anchored at ``anchor``.
    """
    k = np.floor((values - anchor - _EDGE_SHIFT) / delta).astype(np.int64)
    np.maximum(k, 0, out=k)
    boundaries = np.flatnonzero(np.diff(k)) + 1
    starts = np.concatenate(([0], boundaries))
    stops = np.concatenate((boundaries, [values.size]))
    for start, stop in zip(starts, stops):
        yield int(start), int(stop), float(anchor + k[start] * delta)


def _coerce_operator(observable) -> ManyBodyOperator:
    if isinstance(observable, MacroObservable):
        return observable.operator
    if isinstance(observable, ManyBodyOperator):
        return observable
    raise TypeError("observables must be MacroObservable or ManyBodyOperator")


def decompose(
    observables,
    resolutions,
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> "PhaseCellDecomposition":
    """Build the joint phase-cell decomposition of quasi-commuting observables.

    ``observables`` is an ordered sequence (later entries only refine the
    cells of earlier ones); ``resolutions`` gives one window width per
    observable.  Cells are labelled densely in lexicographic order of
    their value tuples.
    """
    observables = tuple(observables)
    operators = [_coerce_operator(o) for o in observables]
    if not operators:
        raise ValueError("need at least one observable")
    resolutions = tuple(
        r if isinstance(r, CellResolution) else CellResolution(float(r))
        for r in resolutions
    )
    if len(resolutions) != len(operators):
        raise ValueError("need exactly one resolution per observable")
    space = operators[0].space
    for op in operators:
        if op.space != space:
            raise ValueError("observables live on different spaces")
        if not op.hermitian:
            raise ValueError("observables must be hermitian")
    if space.dimension > dense_cap:
        raise DimensionCapError(
            f"dimension {space.dimension} exceeds dense cap {dense_cap}"
        )

    spectrum = diagonalize(operators[0], dense_cap=dense_cap)
    _warn_below_spacing(spectrum.eigenvalues, resolutions[0].delta)

    # Each working cell is (values, windows, basis columns).
    cells = []
    anchor = float(spectrum.eigenvalues[0])
    for start, stop, window in _bin_groups(
        spectrum.eigenvalues, anchor, resolutions[0].delta
    ):
        mean = float(spectrum.eigenvalues[start:stop].mean())
        cells.append(((mean,), (window,), spectrum.eigenvectors[:, start:stop]))

    for op, resolution in zip(operators[1:], resolutions[1:]):
        refined = []
        for values, windows, basis in cells:
            compressed = basis.conj().T @ op.matrix @ basis
            compressed = 0.5 * (compressed + compressed.conj().T)
            local_values, rotation = np.linalg.eigh(compressed)
            local_anchor = float(local_values[0])
            for start, stop, window in _bin_groups(
                local_values, local_anchor, resolution.delta
            ):
                mean = float(local_values[start:stop].mean())
                refined.append(
                    (
                        values + (mean,),
                        windows + (window,),
                        basis @ rotation[:, start:stop],
                    )
                )
        cells = refined

    # refinement narrows cells, so earlier entries of each value tuple are
    # re-averaged over the final subspace: values are per-cell means
    cells = [
        (
            tuple(
                float(
                    np.einsum("ij,ij->", basis.conj(), op.matrix @ basis).real
                )
                / basis.shape[1]
                for op in operators
            ),
            windows,
            basis,
        )
        for _, windows, basis in cells
    ]
    cells.sort(key=lambda cell: cell[0])
    phase_cells = tuple(
        PhaseCell(
            label=j,
            values=values,
            windows=windows,
            dim=basis.shape[1],
            basis=basis,
            space=space,
        )
        for j, (values, windows, basis) in enumerate(cells)
    )
    return PhaseCellDecomposition(
        space=space,
        observables=observables,
        resolutions=resolutions,
        cells=phase_cells,
    )


def _warn_below_spacing(eigenvalues: np.ndarray, delta: float) -> None:
    gaps = np.diff(eigenvalues)
    gaps = gaps[gaps > 1e-12]
    if gaps.size and delta < gaps.min():
        warnings.warn(
            "resolution is below the smallest level spacing; every cell "
            "resolves an individual eigenvalue",
            stacklevel=3,
        )


@dataclass(eq=False)
class PhaseCellDecomposition:
    """Complete orthogonal family of phase cells for a fixed observable order."""

    space: HilbertSpace
    observables: tuple
    resolutions: tuple[CellResolution, ...]
    cells: tuple[PhaseCell, ...]

    @cached_property
    def total_basis(self) -> np.ndarray:
        if any(cell.basis is None for cell in self.cells):
            raise ValueError(
                "decomposition was loaded from a summary without basis vectors"
            )
        return np.hstack([cell.basis for cell in self.cells])

    @cached_property
    def cell_starts(self) -> np.ndarray:
        dims = np.array([cell.dim for cell in self.cells])
        return np.concatenate(([0], np.cumsum(dims)))[:-1]

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def dims(self) -> np.ndarray:
        return np.array([cell.dim for cell in self.cells])

    @cached_property
    def values(self) -> np.ndarray:
        """Cell-value table, shape (num_cells, num_observables)."""
        return np.array([cell.values for cell in self.cells])

    def column_values(self, index: int) -> np.ndarray:
        """Representative value of observable ``index`` for every basis column."""
        return np.repeat(self.values[:, index], self.dims)

    def coefficients(self, psi: np.ndarray) -> np.ndarray:
        """Expansion coefficients of ``psi`` in the cell basis (cell-ordered)."""
        psi = np.asarray(psi, dtype=np.complex128)
        if psi.shape != (self.space.dimension,):
            raise ValueError("state dimension does not match the space")
        return self.total_basis.conj().T @ psi

    def cell_weights(self, psi: np.ndarray) -> np.ndarray:
        """Per-cell probability weights ``w_J`` of ``psi`` (may be unnormalized)."""
        b = self.coefficients(psi)
        return self.group_sums(np.abs(b) ** 2)

    def group_sums(self, per_column: np.ndarray) -> np.ndarray:
        """Sum a per-basis-column array over cells (supports extra axes)."""
        return np.add.reduceat(per_column, self.cell_starts, axis=0)

    def to_dict(self, include_basis: bool = False) -> dict:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "num_sites": self.space.num_sites,
            "local_dim": self.space.local_dim,
            "resolutions": [r.delta for r in self.resolutions],
            "cells": [],
        }
        for cell in self.cells:
            entry = {
                "label": cell.label,
                "values": list(cell.values),
                "windows": list(cell.windows),
                "dim": cell.dim,
            }
            if include_basis:
                if cell.basis is None:
                    raise ValueError("no basis vectors available to serialize")
                interleaved = np.empty((cell.dim, 2 * self.space.dimension))
                interleaved[:, 0::2] = cell.basis.T.real
                interleaved[:, 1::2] = cell.basis.T.imag
                entry["basis"] = interleaved.tolist()
            doc["cells"].append(entry)
        return doc

    def save_json(self, path, include_basis: bool = False) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(include_basis=include_basis), handle)

    @classmethod
    def from_dict(cls, doc: dict) -> "PhaseCellDecomposition":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {doc.get('schema_version')!r}")
        space = HilbertSpace(doc["num_sites"], doc["local_dim"])
        cells = []
        for entry in doc["cells"]:
            if "basis" in entry:
                interleaved = np.asarray(entry["basis"])
                basis = (interleaved[:, 0::2] + 1j * interleaved[:, 1::2]).T
            else:
                basis = None
            cells.append(
                PhaseCell(
                    label=int(entry["label"]),
                    values=tuple(entry["values"]),
                    windows=tuple(entry["windows"]),
                    dim=int(entry["dim"]),
                    basis=basis,
                    space=space,
                )
            )
        return cls(
            space=space,
            observables=(),
            resolutions=tuple(CellResolution(d) for d in doc["resolutions"]),
            cells=tuple(cells),
        )


def coarse_observable(decomp: PhaseCellDecomposition, index: int) -> ManyBodyOperator:
    """The piecewise-constant companion ``A_bar = sum_J A_J P_J``."""
    _check_index(decomp, index)
    scaled = decomp.total_basis * decomp.column_values(index)
    mat = scaled @ decomp.total_basis.conj().T
    return ManyBodyOperator(decomp.space, 0.5 * (mat + mat.conj().T), hermitian=True)


def residual(decomp: PhaseCellDecomposition, index: int) -> float:
    """Worst-case ``||(A - A_J) phi||`` over all cell basis vectors.

    For the first observable this is bounded by its window width; for
    later observables the refinement rotations add cross terms and no
    a-priori bound is asserted.
    """
    _check_index(decomp, index)
    if not decomp.observables:
        raise ValueError("decomposition carries no observables (loaded summary?)")
    op = _coerce_operator(decomp.observables[index])
    deviation = op.matrix @ decomp.total_basis - decomp.total_basis * decomp.column_values(index)
    return float(np.max(np.linalg.norm(deviation, axis=0)))


def _check_index(decomp: PhaseCellDecomposition, index: int) -> None:
    if not 0 <= index < len(decomp.resolutions):
        raise IndexError(f"observable index {index} out of range")
