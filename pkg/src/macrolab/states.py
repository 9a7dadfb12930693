"""Macroscopic interpretation of state vectors relative to a phase-cell family.

A state is characterized by its per-cell weights ``w_J`` -- the squared
projections onto the cells.  Expectations of coarse observables depend on
the weights alone, so a superposition spread over several cells is
indistinguishable, at the coarse level, from the corresponding mixture.
The flip side is diagnosed here too: such a superposition has a coarse
variance of at least one window's worth of value gap and therefore never
looks like a single-cell (macroscopically definite) state, in any
coarse eigenbasis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cells import PhaseCellDecomposition, coarse_observable, residual

__all__ = [
    "MacroState",
    "MixtureReport",
    "BasisAmbiguityReport",
    "analyze",
    "macro_expectation",
    "coarse_variance",
    "mixture_test",
    "basis_ambiguity_test",
    "is_macro_state",
    "random_cell_vector",
]


@dataclass(eq=False)
class MacroState:
    """Cell-resolved view of a normalized state."""

    psi: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    weights: np.ndarray
    decomposition: PhaseCellDecomposition = field(repr=False)

    def cell_component(self, label: int) -> np.ndarray:
        """The (unnormalized) projection of the state onto one cell."""
        decomp = self.decomposition
        start = decomp.cell_starts[label]
        stop = start + decomp.cells[label].dim
        return decomp.cells[label].basis @ self.coefficients[start:stop]


def analyze(psi, decomp: PhaseCellDecomposition) -> MacroState:
    """Expand ``psi`` over the cell basis and collect per-cell weights."""
    psi = np.asarray(psi, dtype=np.complex128)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        warnings.warn("state is not normalized; renormalizing", stacklevel=2)
        if norm == 0:
            raise ValueError("cannot analyze the zero vector")
        psi = psi / norm
    b = decomp.coefficients(psi)
    weights = decomp.group_sums(np.abs(b) ** 2)
    return MacroState(psi, b, weights, decomp)


def macro_expectation(state: MacroState, index: int = 0) -> float:
    """Coarse expectation ``sum_J A_J w_J``."""
    return float(state.decomposition.values[:, index] @ state.weights)


def coarse_variance(psi, decomp: PhaseCellDecomposition, index: int = 0) -> float:
    """Variance of a coarse observable in the given (normalized) state."""
    state = analyze(psi, decomp)
    values = decomp.values[:, index]
    mean = values @ state.weights
    return float((values - mean) ** 2 @ state.weights)


def _unit(psi: np.ndarray) -> np.ndarray | None:
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        return None
    return psi / norm


def _dominant_cell(decomp: PhaseCellDecomposition, psi: np.ndarray, name: str):
    """Cell index carrying essentially all weight, or None for a zero vector."""
    norm_sq = float(np.linalg.norm(psi) ** 2)
    if norm_sq < 1e-24:
        return None
    weights = decomp.cell_weights(psi)
    label = int(np.argmax(weights))
    leakage = 1.0 - weights[label] / norm_sq
    if leakage > 1e-8:
        raise ValueError(
            f"{name} is not supported in a single cell (leakage {leakage:.3e})"
        )
    return label


@dataclass(frozen=True)
class MixtureReport:
    """Coarse expectation of a two-branch superposition vs the branch sum.

    ``lhs`` is the quadratic form of the unnormalized sum ``phi1 + phi2``;
    ``rhs`` the sum of the branch quadratic forms.  The ``normalized``
    variants divide by the squared norm of the sum, turning the right side
    into the 50/50 mixture average for orthogonal unit branches.
    """

    lhs: float
    rhs: float
    per_cell: np.ndarray
    discrepancy: float
    lhs_normalized: float
    rhs_normalized: float
    discrepancy_normalized: float
    cell_pair: tuple


def mixture_test(
    phi1,
    phi2,
    decomp: PhaseCellDecomposition,
    index: int = 0,
) -> MixtureReport:
    """Check that distinct-cell branches add at the coarse level like a mixture."""
    phi1 = np.asarray(phi1, dtype=np.complex128)
    phi2 = np.asarray(phi2, dtype=np.complex128)
    cell1 = _dominant_cell(decomp, phi1, "phi1")
    cell2 = _dominant_cell(decomp, phi2, "phi2")
    if cell1 is not None and cell2 is not None and cell1 == cell2:
        raise ValueError("branches occupy the same cell; nothing to compare")

    coarse = coarse_observable(decomp, index).matrix
    psi = phi1 + phi2
    lhs = float(np.real(psi.conj() @ (coarse @ psi)))
    rhs = float(
        np.real(phi1.conj() @ (coarse @ phi1)) + np.real(phi2.conj() @ (coarse @ phi2))
    )
    per_cell = decomp.values[:, index] * decomp.cell_weights(psi)

    norm_sq = float(np.linalg.norm(psi) ** 2)
    if norm_sq > 0:
        lhs_normalized = lhs / norm_sq
        rhs_normalized = rhs / norm_sq
    else:
        lhs_normalized = 0.0
        rhs_normalized = 0.0
    return MixtureReport(
        lhs=lhs,
        rhs=rhs,
        per_cell=per_cell,
        discrepancy=abs(lhs - rhs),
        lhs_normalized=lhs_normalized,
        rhs_normalized=rhs_normalized,
        discrepancy_normalized=abs(lhs_normalized - rhs_normalized),
        cell_pair=(cell1, cell2),
    )


def is_macro_state(psi, decomp: PhaseCellDecomposition) -> bool:
    """True when every coarse observable is sharp on ``psi``.

    Sharp means the coarse standard deviation stays below the observable's
    own fuzziness: cell residual plus half a window width.
    """
    for index in range(len(decomp.resolutions)):
        tolerance = residual(decomp, index) + 0.5 * decomp.resolutions[index].delta
        if coarse_variance(psi, decomp, index) > tolerance**2:
            return False
    return True


@dataclass(frozen=True)
class BasisAmbiguityReport:
    """Variance certificate that a two-cell superposition is not macro-definite.

    The equal superposition of unit branches from cells with values
    ``A_1 != A_2`` has coarse variance ``(A_1 - A_2)**2 / 4``; the rotated
    pair ``(phi1 -+ phi2)/sqrt(2)`` shares that variance, so no rotation
    inside the two-branch plane produces macroscopically definite states.
    """

    variances: np.ndarray
    discriminating_index: int | None
    value_gap: float
    threshold: float
    verdict: str
    rotated_variances_minus: np.ndarray
    rotated_variances_plus: np.ndarray
    rotated_macro_flags: tuple[bool, bool]
    cell_pair: tuple[int, int]


def basis_ambiguity_test(
    phi1,
    phi2,
    decomp: PhaseCellDecomposition,
) -> BasisAmbiguityReport:
    """Probe the equal superposition of two cell-supported branches."""
    phi1 = np.asarray(phi1, dtype=np.complex128)
    phi2 = np.asarray(phi2, dtype=np.complex128)
    cell1 = _dominant_cell(decomp, phi1, "phi1")
    cell2 = _dominant_cell(decomp, phi2, "phi2")
    if cell1 is None or cell2 is None:
        raise ValueError("both branches must be nonzero")

    superposition = _unit(phi1 + phi2)
    if superposition is None:
        raise ValueError("branches cancel; the superposition is the zero vector")
    rotated_minus = _unit(phi1 - phi2)
    rotated_plus = superposition

    n_obs = len(decomp.resolutions)
    variances = np.array(
        [coarse_variance(superposition, decomp, m) for m in range(n_obs)]
    )
    if rotated_minus is None:
        var_minus = np.zeros(n_obs)
    else:
        var_minus = np.array(
            [coarse_variance(rotated_minus, decomp, m) for m in range(n_obs)]
        )
    var_plus = variances.copy()

    gaps = np.abs(decomp.values[cell1] - decomp.values[cell2])
    if cell1 == cell2 or float(gaps.max()) < 1e-12:
        discriminating = None
        gap = 0.0
        threshold = 0.0
        verdict = "macro-state" if is_macro_state(superposition, decomp) else "inconclusive"
    else:
        discriminating = int(np.argmax(gaps))
        gap = float(gaps[discriminating])
        threshold = gap**2 / 4.0 - 1e-9
        if variances[discriminating] >= threshold:
            verdict = "not-a-macro-state"
        elif is_macro_state(superposition, decomp):
            verdict = "macro-state"
        else:
            verdict = "inconclusive"

    flags = (
        rotated_minus is None or bool(is_macro_state(rotated_minus, decomp)),
        bool(is_macro_state(rotated_plus, decomp)),
    )
    return BasisAmbiguityReport(
        variances=variances,
        discriminating_index=discriminating,
        value_gap=gap,
        threshold=threshold,
        verdict=verdict,
        rotated_variances_minus=var_minus,
        rotated_variances_plus=var_plus,
        rotated_macro_flags=flags,
        cell_pair=(cell1, cell2),
    )


def random_cell_vector(
    decomp: PhaseCellDecomposition,
    label: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """A haar-ish random unit vector supported on one cell."""
    if not 0 <= label < decomp.num_cells:
        raise ValueError(f"no cell labelled {label}")
    cell = decomp.cells[label]
    coeff = rng.normal(size=cell.dim) + 1j * rng.normal(size=cell.dim)
    coeff /= np.linalg.norm(coeff)
    return cell.basis @ coeff
