import numpy as np
import pytest
from scipy.integrate import quad

from macrolab import (
    GaussianPacket,
    GaussianPointerState,
    branch_log_overlap,
    branch_overlap,
    branch_spatial_overlap,
    classical_crossing_time,
    com_position,
    com_trajectory,
    free_evolve,
    gaussian_overlap,
    mean_momentum,
    phase_cell_labels,
    revival_trajectory,
    sigma_crossing_time,
    spatial_overlap,
    total_momentum,
    uniform_branch,
)


def quad_overlap(a: GaussianPacket, b: GaussianPacket) -> complex:
    """Oracle: <a|b> by direct numerical integration of the wave functions."""

    def integrand(x, part):
        value = np.conj(a.amplitude(x)) * b.amplitude(x)
        return value.real if part == "re" else value.imag

    span = 12.0 * max(a.sigma, b.sigma) + abs(a.x0) + abs(b.x0)
    real, _ = quad(integrand, -span, span, args=("re",), limit=400)
    imag, _ = quad(integrand, -span, span, args=("im",), limit=400)
    return real + 1j * imag


PACKET_PAIRS = [
    (GaussianPacket(0.0, 0.0, 1.0, 1.0), GaussianPacket(0.0, 0.0, 1.0, 1.0)),
    (GaussianPacket(-2.0, 0.5, 1.0, 1.0), GaussianPacket(1.5, -0.25, 2.0, 1.0)),
    (GaussianPacket(0.0, 3.0, 0.5, 2.0), GaussianPacket(0.3, 3.0, 0.5, 2.0)),
    (GaussianPacket(-1.0, -1.0, 1.5, 1.0), GaussianPacket(4.0, 2.0, 0.8, 1.0)),
    (
        GaussianPacket(-1.0, 0.5, 1.0, 1.0).evolved(2.0),
        GaussianPacket(1.0, -0.5, 1.2, 1.0).evolved(2.0),
    ),
]


class TestGaussianPacket:
    def test_validation(self):
        with pytest.raises(ValueError):
            GaussianPacket(0.0, 0.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            GaussianPacket(0.0, 0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            GaussianPacket(0.0, 0.0, 1.0, 1.0, hbar=-1.0)

    def test_normalized(self):
        packet = GaussianPacket(0.7, -0.4, 1.3, 2.0)
        norm, _ = quad(lambda x: abs(packet.amplitude(x)) ** 2, -20, 20, limit=200)
        assert norm == pytest.approx(1.0, abs=1e-10)

    def test_free_spreading(self):
        packet = GaussianPacket(1.0, 2.0, 0.9, 1.5, hbar=1.0)
        t = 3.0
        moved = packet.evolved(t)
        assert moved.x0 == pytest.approx(1.0 + t * 2.0 / 1.5, abs=1e-14)
        assert moved.p0 == packet.p0
        assert moved.sigma == packet.sigma
        assert moved.chirp == pytest.approx(t / (2 * 1.5), abs=1e-14)
        expected_width = 0.9 * np.sqrt(1.0 + (t / (2 * 1.5 * 0.9**2)) ** 2)
        assert moved.width == pytest.approx(expected_width, abs=1e-12)

    def test_evolution_composes(self):
        packet = GaussianPacket(-0.5, 1.1, 0.8, 1.3)
        stepped = packet.evolved(0.7).evolved(1.9)
        direct = packet.evolved(2.6)
        assert stepped.x0 == pytest.approx(direct.x0, abs=1e-14)
        assert stepped.chirp == pytest.approx(direct.chirp, abs=1e-14)
        assert stepped.phase == pytest.approx(direct.phase, abs=1e-14)
        assert stepped.sigma == direct.sigma and stepped.p0 == direct.p0

    def test_evolved_stays_normalized(self):
        moved = GaussianPacket(0.0, 1.0, 1.0, 1.0).evolved(4.0)
        norm, _ = quad(
            lambda x: abs(moved.amplitude(x)) ** 2, -60, 60, limit=400
        )
        assert norm == pytest.approx(1.0, abs=1e-10)

    def test_evolution_matches_quadrature_moments(self):
        # sanity: the evolved density has the advertised mean and width
        packet = GaussianPacket(0.0, 1.0, 1.0, 1.0)
        moved = packet.evolved(2.0)
        mean, _ = quad(
            lambda x: x * abs(moved.amplitude(x)) ** 2, -40, 40, limit=400
        )
        assert mean == pytest.approx(moved.x0, abs=1e-8)


class TestGaussianOverlap:
    @pytest.mark.parametrize("a,b", PACKET_PAIRS)
    def test_matches_quadrature(self, a, b):
        assert gaussian_overlap(a, b) == pytest.approx(
            quad_overlap(a, b), abs=1e-10
        )

    def test_self_overlap(self):
        packet = GaussianPacket(0.3, -1.2, 0.8, 1.0)
        assert gaussian_overlap(packet, packet) == pytest.approx(1.0, abs=1e-12)

    def test_modulus_closed_form(self):
        a = GaussianPacket(-2.0, 0.5, 1.0, 1.0)
        b = GaussianPacket(1.5, -0.25, 2.0, 1.0)
        s2 = a.sigma**2 + b.sigma**2
        dx = b.x0 - a.x0
        dp = b.p0 - a.p0
        expected = np.sqrt(2 * a.sigma * b.sigma / s2) * np.exp(
            -(dx**2) / (4 * s2) - a.sigma**2 * b.sigma**2 * dp**2 / s2
        )
        assert abs(gaussian_overlap(a, b)) == pytest.approx(expected, abs=1e-12)

    def test_cauchy_schwarz(self, rng):
        for _ in range(25):
            a = GaussianPacket(*rng.uniform(-3, 3, 2), rng.uniform(0.2, 3), 1.0)
            b = GaussianPacket(*rng.uniform(-3, 3, 2), rng.uniform(0.2, 3), 1.0)
            assert abs(gaussian_overlap(a, b)) <= 1.0 + 1e-12

    def test_conserved_under_shared_evolution(self):
        a = GaussianPacket(-5.0, 1.0, 1.0, 1.0)
        b = GaussianPacket(5.0, -1.0, 1.0, 1.0)
        initial = abs(gaussian_overlap(a, b))
        for t in (0.5, 2.0, 10.0):
            now = abs(gaussian_overlap(a.evolved(t), b.evolved(t)))
            assert now == pytest.approx(initial, abs=1e-12)

    def test_hbar_mismatch_rejected(self):
        a = GaussianPacket(0, 0, 1, 1, hbar=1.0)
        b = GaussianPacket(0, 0, 1, 1, hbar=2.0)
        with pytest.raises(ValueError):
            gaussian_overlap(a, b)


class TestSpatialOverlap:
    def test_peak_at_coincidence(self):
        a = GaussianPacket(1.0, 3.0, 1.0, 1.0)
        b = GaussianPacket(1.0, -3.0, 1.0, 1.0)
        assert spatial_overlap(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_matches_quadrature(self):
        a = GaussianPacket(-1.0, 2.0, 0.7, 1.0)
        b = GaussianPacket(2.0, -2.0, 1.4, 1.0)
        direct, _ = quad(
            lambda x: abs(a.amplitude(x)) * abs(b.amplitude(x)), -30, 30, limit=400
        )
        assert spatial_overlap(a, b) == pytest.approx(direct, abs=1e-10)


class TestBranches:
    def test_uniform_branch_kinematics(self):
        branch = uniform_branch(4, 2.0, -0.5, 1.0, 1.5)
        assert branch.num_particles == 4
        assert com_position(branch) == pytest.approx(2.0)
        assert mean_momentum(branch) == pytest.approx(-0.5)
        assert total_momentum(branch) == pytest.approx(-2.0)
        assert branch.total_mass == pytest.approx(6.0)

    def test_log_overlap_affine_in_particle_number(self):
        single = np.log(
            abs(
                gaussian_overlap(
                    GaussianPacket(-4.0, 0.6, 1.0, 1.0),
                    GaussianPacket(4.0, -0.6, 1.0, 1.0),
                )
            )
        )
        for n in (1, 3, 7):
            left = uniform_branch(n, -4.0, 0.6, 1.0, 1.0)
            right = uniform_branch(n, 4.0, -0.6, 1.0, 1.0)
            assert branch_log_overlap(left, right) == pytest.approx(
                n * single, abs=1e-9
            )
            assert branch_overlap(left, right) == pytest.approx(
                np.exp(n * single), abs=1e-12
            )

    def test_spatial_branch_product(self):
        left = uniform_branch(3, -2.0, 0.5, 1.0, 1.0)
        right = uniform_branch(3, 2.0, -0.5, 1.0, 1.0)
        single = spatial_overlap(left.packets[0], right.packets[0])
        assert branch_spatial_overlap(left, right) == pytest.approx(
            single**3, abs=1e-12
        )

    def test_particle_count_mismatch(self):
        with pytest.raises(ValueError):
            branch_overlap(
                uniform_branch(2, 0, 0, 1, 1), uniform_branch(3, 0, 0, 1, 1)
            )

    def test_free_evolve_moves_com(self):
        branch = uniform_branch(5, 0.0, 1.0, 1.0, 2.0)
        later = free_evolve(branch, 4.0)
        assert com_position(later) == pytest.approx(2.0, abs=1e-12)

    def test_com_trajectory_linear(self):
        branch = uniform_branch(2, -3.0, 0.9, 1.0, 1.0)
        times, positions = com_trajectory(branch, np.linspace(0, 5, 11))
        fit = np.polyfit(times, positions, 1)
        assert fit[0] == pytest.approx(0.9, abs=1e-12)
        assert fit[1] == pytest.approx(-3.0, abs=1e-12)


class TestCrossing:
    def test_crossing_time(self):
        left = uniform_branch(1, -10.0, 0.75, 1.0, 1.0)
        right = uniform_branch(1, 10.0, -0.75, 1.0, 1.0)
        assert classical_crossing_time(left, right) == pytest.approx(
            20.0 / 1.5, abs=1e-12
        )

    def test_equal_velocities_never_cross(self):
        left = uniform_branch(1, -10.0, 0.5, 1.0, 1.0)
        right = uniform_branch(1, 10.0, 0.5, 1.0, 1.0)
        with pytest.raises(ValueError):
            classical_crossing_time(left, right)

    def test_sigma_crossing_window(self):
        left = uniform_branch(1, -10.0, 0.75, 1.0, 1.0)
        right = uniform_branch(1, 10.0, -0.75, 1.0, 1.0)
        t_star = 20.0 / 1.5
        width = np.sqrt(1.0 + (t_star / 2.0) ** 2)
        assert sigma_crossing_time(left, right) == pytest.approx(
            width / 1.5, abs=1e-10
        )


class TestRevivalTrajectory:
    @pytest.fixture
    def branches(self):
        left = uniform_branch(1, -10.0, 0.75, 1.0, 1.0, label="left")
        right = uniform_branch(1, 10.0, -0.75, 1.0, 1.0, label="right")
        return left, right

    def test_coincidence_revives_but_overlap_does_not(self, branches):
        left, right = branches
        times = np.linspace(0.0, 26.0, 53)
        report = revival_trajectory(left, right, times)
        assert report.coincidence[0] <= 1e-6
        near = np.abs(times - report.crossing_time) <= report.sigma_time
        assert report.coincidence[near].max() > 0.9
        # the hilbert-space overlap stays pinned near zero throughout
        assert report.overlap.max() <= 1e-6

    def test_interference_at_crossing(self, branches):
        left, right = branches
        report = revival_trajectory(left, right, [20.0 / 1.5])
        assert abs(report.interference[0]) > 1e-3
        mixture = report.density_mixture[0]
        superposition = report.density_superposition[0]
        assert superposition == pytest.approx(
            mixture + report.interference[0], abs=1e-12
        )

    def test_relative_phase_flips_fringe(self, branches):
        left, right = branches
        t = [20.0 / 1.5]
        plus = revival_trajectory(left, right, t, relative_phase=0.0)
        minus = revival_trajectory(left, right, t, relative_phase=np.pi)
        assert plus.interference[0] == pytest.approx(
            -minus.interference[0], abs=1e-9
        )


class TestPhaseCellLabels:
    def test_gap_clustering(self):
        branches = [
            uniform_branch(1, 0.0, 0.6, 1.0, 1.0),
            uniform_branch(1, 0.0, -0.6, 1.0, 1.0),
            uniform_branch(1, 0.0, 0.58, 1.0, 1.0),
        ]
        assert phase_cell_labels(branches, 0.1) == [1, 0, 1]

    def test_all_in_one_cell(self):
        branches = [
            uniform_branch(1, 0.0, 0.5, 1.0, 1.0),
            uniform_branch(1, 0.0, 0.52, 1.0, 1.0),
        ]
        assert phase_cell_labels(branches, 0.1) == [0, 0]

    def test_labels_ascend_with_momentum(self):
        branches = [
            uniform_branch(1, 0.0, 2.0, 1.0, 1.0),
            uniform_branch(1, 0.0, -2.0, 1.0, 1.0),
            uniform_branch(1, 0.0, 0.0, 1.0, 1.0),
        ]
        assert phase_cell_labels(branches, 0.5) == [2, 0, 1]
