import numpy as np
import pytest
import scipy.linalg

from macrolab import (
    CellResolution,
    EvolutionContext,
    HilbertSpace,
    LocalOperator,
    PAULI_X,
    PAULI_Z,
    basis_state,
    build_hamiltonian,
    build_intensive,
    coarse_observable,
    coherent_pair_state,
    decompose,
    diagonality_index,
    disorder_residual,
    evolve,
    propagator,
    revival_scenario,
    transition_matrix,
    weights_trajectory,
)
from macrolab.states import random_cell_vector

from conftest import random_state


@pytest.fixture
def tfi_setup():
    space = HilbertSpace(4)
    hamiltonian = build_hamiltonian("transverse-field-ising", space, [1.0, 0.45])
    ctx = EvolutionContext.from_hamiltonian(hamiltonian)
    mz = build_intensive(LocalOperator((0,), PAULI_Z), space)
    decomp = decompose([mz], [CellResolution(0.5)])
    return space, ctx, decomp


class TestEvolve:
    @pytest.mark.parametrize(
        "kind,couplings",
        [
            ("transverse-field-ising", [1.0, 0.3]),
            ("heisenberg-xxz", [0.7, 1.0, 0.25]),
        ],
    )
    def test_matches_expm(self, kind, couplings, rng):
        space = HilbertSpace(3)
        h = build_hamiltonian(kind, space, couplings)
        ctx = EvolutionContext.from_hamiltonian(h)
        psi = random_state(space, rng)
        for t in (0.0, 0.3, 1.7, -2.4):
            expected = scipy.linalg.expm(-1j * t * h.matrix) @ psi
            assert np.allclose(evolve(ctx, psi, t), expected, atol=1e-10)

    def test_hbar_scaling(self, rng):
        space = HilbertSpace(2)
        h = build_hamiltonian("transverse-field-ising", space, [1.0, 0.5])
        psi = random_state(space, rng)
        fast = EvolutionContext.from_hamiltonian(h, hbar=0.5)
        slow = EvolutionContext.from_hamiltonian(h, hbar=1.0)
        assert np.allclose(
            evolve(fast, psi, 1.0), evolve(slow, psi, 2.0), atol=1e-12
        )

    def test_invalid_hbar(self):
        h = build_hamiltonian("transverse-field-ising", HilbertSpace(2), [1, 1])
        with pytest.raises(ValueError):
            EvolutionContext.from_hamiltonian(h, hbar=0.0)

    def test_norm_and_energy_conserved(self, tfi_setup, rng):
        space, ctx, _ = tfi_setup
        psi = random_state(space, rng)
        h = ctx.hamiltonian.matrix
        e0 = (psi.conj() @ h @ psi).real
        for t in (0.5, 2.0, 11.0):
            phi = evolve(ctx, psi, t)
            assert np.linalg.norm(phi) == pytest.approx(1.0, abs=1e-12)
            assert (phi.conj() @ h @ phi).real == pytest.approx(e0, abs=1e-10)

    def test_propagator_unitary(self, tfi_setup):
        _, ctx, _ = tfi_setup
        u = propagator(ctx, 0.8)
        assert np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12)

    def test_dimension_mismatch(self, tfi_setup):
        _, ctx, _ = tfi_setup
        with pytest.raises(ValueError):
            evolve(ctx, np.ones(3, dtype=complex), 1.0)


class TestWeightsTrajectory:
    def test_rows_sum_to_one(self, tfi_setup, rng):
        space, ctx, decomp = tfi_setup
        psi = random_state(space, rng)
        times = np.linspace(0.0, 3.0, 7)
        trajectory = weights_trajectory(ctx, psi, decomp, times)
        assert trajectory.weights.shape == (7, decomp.num_cells)
        assert np.allclose(trajectory.weights.sum(axis=1), 1.0, atol=1e-10)

    def test_matches_pointwise_evolution(self, tfi_setup, rng):
        space, ctx, decomp = tfi_setup
        psi = random_state(space, rng)
        times = [0.0, 0.9, 2.2]
        trajectory = weights_trajectory(ctx, psi, decomp, times)
        for row, t in zip(trajectory.weights, times):
            direct = decomp.cell_weights(evolve(ctx, psi, t))
            assert np.allclose(row, direct, atol=1e-12)


class TestTransitionMatrix:
    def test_identity_at_time_zero(self, tfi_setup):
        _, ctx, decomp = tfi_setup
        tm = transition_matrix(ctx, decomp, 0.0)
        assert np.allclose(tm.entries, np.eye(decomp.num_cells), atol=1e-12)

    def test_columns_stochastic(self, tfi_setup):
        _, ctx, decomp = tfi_setup
        for t in np.linspace(0.1, 4.0, 9):
            tm = transition_matrix(ctx, decomp, t)
            assert np.all(tm.entries >= -1e-14)
            assert np.allclose(tm.entries.sum(axis=0), 1.0, atol=1e-10)

    def test_normalization_variants_related(self, tfi_setup):
        # entries differ by the ratio of target to source cell dimension
        _, ctx, decomp = tfi_setup
        cs = transition_matrix(ctx, decomp, 1.3, "column-stochastic").entries
        td = transition_matrix(ctx, decomp, 1.3, "target-dim").entries
        dims = decomp.dims.astype(float)
        assert np.allclose(td * dims[:, None], cs * dims[None, :], atol=1e-12)

    def test_unknown_normalization(self, tfi_setup):
        _, ctx, decomp = tfi_setup
        with pytest.raises(ValueError):
            transition_matrix(ctx, decomp, 1.0, "rows")

    def test_diagonal_hamiltonian_is_static(self, rng):
        space = HilbertSpace(3)
        couplings = rng.uniform(-1.0, 1.0, size=space.dimension)
        h = build_hamiltonian("diagonal-test", space, couplings)
        ctx = EvolutionContext.from_hamiltonian(h)
        mz = build_intensive(LocalOperator((0,), PAULI_Z), space)
        decomp = decompose([mz], [CellResolution(0.5)])
        for t in (0.7, 3.1, 12.0):
            tm = transition_matrix(ctx, decomp, t)
            assert np.abs(tm.entries - np.eye(decomp.num_cells)).max() <= 1e-12
            assert diagonality_index(tm) == pytest.approx(1.0, abs=1e-12)

    def test_diagonality_requires_column_stochastic(self, tfi_setup):
        _, ctx, decomp = tfi_setup
        tm = transition_matrix(ctx, decomp, 1.0, "target-dim")
        with pytest.raises(ValueError):
            diagonality_index(tm)


class TestDisorder:
    def test_uniform_cell_state_within_band(self, tfi_setup):
        _, ctx, decomp = tfi_setup
        rng = np.random.default_rng(99)
        cell = decomp.cells[1]
        phases = rng.uniform(0, 2 * np.pi, size=cell.dim)
        psi = cell.basis @ (np.exp(1j * phases) / np.sqrt(cell.dim))
        report = disorder_residual(ctx, psi, decomp, 1.1, 400, rng)
        assert report.within_band
        assert np.max(report.ensemble_residual) <= report.band + 1e-12
        assert report.ensemble_size == 400

    def test_diagonal_hamiltonian_exact(self, rng):
        space = HilbertSpace(3)
        h = build_hamiltonian(
            "diagonal-test", space, rng.uniform(-1, 1, size=space.dimension)
        )
        ctx = EvolutionContext.from_hamiltonian(h)
        mz = build_intensive(LocalOperator((0,), PAULI_Z), space)
        decomp = decompose([mz], [CellResolution(0.5)])
        psi = random_state(space, rng)
        report = disorder_residual(ctx, psi, decomp, 2.0, 50, rng)
        assert report.residual <= 1e-10

    def test_adversarial_state_breaks_prediction(self, tfi_setup):
        _, ctx, decomp = tfi_setup
        rng = np.random.default_rng(1)
        psi, info = coherent_pair_state(ctx, decomp, 1.1)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
        report = disorder_residual(ctx, psi, decomp, 1.1, 600, rng)
        assert report.residual > 3 * report.band
        assert info["cross_magnitude"] > 0


class TestRevivalScenario:
    def test_overlap_constant_and_interference_oscillates(self, tfi_setup):
        space, ctx, decomp = tfi_setup
        rng = np.random.default_rng(7)
        phi1 = random_cell_vector(decomp, 0, rng)
        phi2 = random_cell_vector(decomp, 2, rng)
        observable = coarse_observable(decomp, 0)
        times = np.linspace(0.0, 6.0, 25)
        report = revival_scenario(
            ctx, phi1, phi2, observable, times, relative_phase=np.pi / 2
        )
        # unitarity pins the hilbert overlap to its initial value
        assert np.ptp(report.overlap) <= 1e-10
        # the observable-mediated cross term does move
        assert np.ptp(np.abs(report.cross_term)) > 1e-3
        identity = (
            2.0
            * np.real(np.exp(1j * report.relative_phase) * report.cross_term)
        )
        direct = report.superposition_expectation - report.mixture_expectation
        # interference = 2 Re[e^{i alpha} <phi1(t)|A|phi2(t)>] per unit norm
        norms = identity / np.where(
            np.abs(report.interference) > 1e-300, report.interference, 1.0
        )
        mask = np.abs(report.interference) > 1e-12
        assert np.allclose(
            report.interference[mask],
            (identity / norms)[mask],
            atol=1e-12,
        )
        assert np.allclose(direct, report.interference, atol=1e-12)

    def test_requires_orthogonal_branches(self, tfi_setup, rng):
        space, ctx, decomp = tfi_setup
        psi = random_state(space, rng)
        with pytest.raises(ValueError):
            revival_scenario(
                ctx, psi, psi, coarse_observable(decomp, 0), [0.0, 1.0]
            )

    def test_basis_state_example(self, tfi_setup):
        space, ctx, decomp = tfi_setup
        phi1 = basis_state(space, 0)
        phi2 = basis_state(space, space.dimension - 1)
        report = revival_scenario(
            ctx, phi1, phi2, coarse_observable(decomp, 0), [0.0, 1.0, 2.0]
        )
        assert report.overlap[0] <= 1e-12
