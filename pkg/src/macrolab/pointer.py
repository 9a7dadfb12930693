"""Collective pointer kinematics for branches of N freely moving Gaussians.

Each branch is a product of one-dimensional Gaussian packets.  A packet is
parameterized by a complex width ``A = sigma^2 + i*chirp``:

    g(x) = (2 sigma^2 / pi)^(1/4) / sqrt(2 A)
           * exp(-(x - x0)^2 / (4 A) + i p0 (x - x0) / hbar + i phase)

where ``sigma`` is the minimum-uncertainty reference width and ``chirp``
the quadratic phase picked up under free evolution.  Evolution is exact
and closed within this family:

    x0 -> x0 + t p0 / m,   chirp -> chirp + hbar t / (2 m),
    phase -> phase + (hbar t / (2 m)) (p0 / hbar)^2,

with ``p0`` and ``sigma`` conserved; the physical position spread is the
``width`` property ``sqrt(sigma^4 + chirp^2) / sigma``.  Two overlaps are
distinguished:

* ``gaussian_overlap`` -- the inner product ``<g1|g2>``.  Because the
  family evolution is exact, its modulus is conserved when both packets
  evolve for the same time.  For chirp-free packets it reduces to
  ``sqrt(2 s1 s2 / (s1^2+s2^2)) * exp(-dx^2/(4(s1^2+s2^2))
  - s1^2 s2^2 dp^2 / (hbar^2 (s1^2+s2^2)))``, suppressed by both the
  center separation and the momentum mismatch.
* ``spatial_overlap`` -- the coincidence integral ``int |g1| |g2| dx``,
  which ignores all phases and measures whether the packets sit on top
  of each other.  Counter-propagating branches keep a conserved
  (vanishing) inner product yet regain spatial coincidence at the
  classical crossing time, which is when interference fringes can form.

Branch-level quantities are products over the N packets, so their
logarithms are affine in N: distinct per-particle states orthogonalize
branches exponentially fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

__all__ = [
    "GaussianPacket",
    "GaussianPointerState",
    "PointerRevival",
    "free_evolve",
    "total_momentum",
    "mean_momentum",
    "com_trajectory",
    "gaussian_overlap",
    "spatial_overlap",
    "branch_overlap",
    "branch_log_overlap",
    "branch_spatial_overlap",
    "classical_crossing_time",
    "sigma_crossing_time",
    "revival_trajectory",
    "phase_cell_labels",
    "uniform_branch",
]


@dataclass(frozen=True)
class GaussianPacket:
    """One particle's Gaussian wave packet (possibly chirped)."""

    x0: float
    p0: float
    sigma: float
    mass: float
    hbar: float = 1.0
    chirp: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        for name in ("sigma", "mass", "hbar"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (math.isfinite(self.chirp) and math.isfinite(self.phase)):
            raise ValueError("chirp and phase must be finite")

    @property
    def complex_width(self) -> complex:
        return self.sigma**2 + 1j * self.chirp

    @property
    def width(self) -> float:
        """Physical position standard deviation."""
        return math.sqrt(self.sigma**4 + self.chirp**2) / self.sigma

    def evolved(self, t: float) -> "GaussianPacket":
        beta = self.hbar * t / (2.0 * self.mass)
        return replace(
            self,
            x0=self.x0 + t * self.p0 / self.mass,
            chirp=self.chirp + beta,
            phase=self.phase + beta * (self.p0 / self.hbar) ** 2,
        )

    def _prefactor(self) -> complex:
        return (2.0 * self.sigma**2 / math.pi) ** 0.25 / np.sqrt(
            2.0 * self.complex_width
        )

    def amplitude(self, x: float) -> complex:
        """Wavefunction value at ``x``."""
        return self._prefactor() * np.exp(
            -((x - self.x0) ** 2) / (4.0 * self.complex_width)
            + 1j * self.p0 * (x - self.x0) / self.hbar
            + 1j * self.phase
        )


@dataclass(frozen=True)
class GaussianPointerState:
    """A branch: product of N packets, one per particle."""

    packets: tuple[GaussianPacket, ...]
    label: str = ""

    def __post_init__(self) -> None:
        packets = tuple(self.packets)
        if not packets:
            raise ValueError("a branch needs at least one packet")
        object.__setattr__(self, "packets", packets)

    @property
    def num_particles(self) -> int:
        return len(self.packets)

    @property
    def total_mass(self) -> float:
        return sum(p.mass for p in self.packets)


def uniform_branch(
    n: int,
    x0: float,
    p0: float,
    sigma: float,
    mass: float,
    hbar: float = 1.0,
    label: str = "",
) -> GaussianPointerState:
    """N identical packets; the simplest collective branch."""
    packet = GaussianPacket(x0, p0, sigma, mass, hbar)
    return GaussianPointerState((packet,) * n, label)


def free_evolve(state: GaussianPointerState, t: float) -> GaussianPointerState:
    """Evolve every packet freely by time ``t``."""
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    return GaussianPointerState(
        tuple(p.evolved(t) for p in state.packets), state.label
    )


def total_momentum(state: GaussianPointerState) -> float:
    """Sum of the packet momenta; conserved under free evolution."""
    return float(sum(p.p0 for p in state.packets))


def mean_momentum(state: GaussianPointerState) -> float:
    return total_momentum(state) / state.num_particles


def com_position(state: GaussianPointerState) -> float:
    return float(
        sum(p.mass * p.x0 for p in state.packets) / state.total_mass
    )


def com_trajectory(state: GaussianPointerState, times) -> tuple[np.ndarray, np.ndarray]:
    """Center-of-mass position along a time grid (exactly affine in t)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    positions = np.array([com_position(free_evolve(state, t)) for t in times])
    return times, positions


def _check_hbar(a: GaussianPacket, b: GaussianPacket) -> None:
    if abs(a.hbar - b.hbar) > 1e-12:
        raise ValueError("packets use different hbar")


def gaussian_overlap(a: GaussianPacket, b: GaussianPacket) -> complex:
    """Exact inner product ``<a|b>`` of two (possibly chirped) packets."""
    _check_hbar(a, b)
    ca = 1.0 / (4.0 * np.conj(a.complex_width))
    cb = 1.0 / (4.0 * b.complex_width)
    c = ca + cb
    lin = 2.0 * ca * a.x0 + 2.0 * cb * b.x0 + 1j * (b.p0 - a.p0) / a.hbar
    const = (
        -ca * a.x0**2
        - cb * b.x0**2
        + 1j * (a.p0 * a.x0 - b.p0 * b.x0) / a.hbar
        + 1j * (b.phase - a.phase)
    )
    prefactor = np.conj(a._prefactor()) * b._prefactor()
    return complex(
        prefactor * np.sqrt(math.pi / c) * np.exp(lin * lin / (4.0 * c) + const)
    )


def spatial_overlap(a: GaussianPacket, b: GaussianPacket) -> float:
    """Coincidence integral ``int |a(x)| |b(x)| dx`` (phase-blind)."""
    wa, wb = a.width, b.width
    ss = wa**2 + wb**2
    prefactor = math.sqrt(2.0 * wa * wb / ss)
    return prefactor * math.exp(-((a.x0 - b.x0) ** 2) / (4.0 * ss))


def _paired_packets(state_i: GaussianPointerState, state_j: GaussianPointerState):
    if state_i.num_particles != state_j.num_particles:
        raise ValueError("branches must have the same particle number")
    return zip(state_i.packets, state_j.packets)


def branch_log_overlap(
    state_i: GaussianPointerState, state_j: GaussianPointerState, t: float = 0.0
) -> float:
    """``log |<branch_i(t)|branch_j(t)>|``, an exact sum of per-packet logs."""
    total = 0.0
    for a, b in _paired_packets(free_evolve(state_i, t), free_evolve(state_j, t)):
        total += math.log(abs(gaussian_overlap(a, b)))
    return total


def branch_overlap(
    state_i: GaussianPointerState, state_j: GaussianPointerState, t: float = 0.0
) -> float:
    """``|<branch_i(t)|branch_j(t)>|`` as a product over packets."""
    product = 1.0
    for a, b in _paired_packets(free_evolve(state_i, t), free_evolve(state_j, t)):
        product *= abs(gaussian_overlap(a, b))
    return product


def branch_spatial_overlap(
    state_i: GaussianPointerState, state_j: GaussianPointerState, t: float = 0.0
) -> float:
    """Product of per-packet coincidence integrals at time ``t``."""
    product = 1.0
    for a, b in _paired_packets(free_evolve(state_i, t), free_evolve(state_j, t)):
        product *= spatial_overlap(a, b)
    return product


def classical_crossing_time(
    state_i: GaussianPointerState, state_j: GaussianPointerState
) -> float:
    """COM meeting time of two branches with differing velocities."""
    xi, xj = com_position(state_i), com_position(state_j)
    vi = total_momentum(state_i) / state_i.total_mass
    vj = total_momentum(state_j) / state_j.total_mass
    if abs(vi - vj) < 1e-15:
        raise ValueError("branches share a velocity and never cross")
    return (xj - xi) / (vi - vj)


def sigma_crossing_time(
    state_i: GaussianPointerState, state_j: GaussianPointerState
) -> float:
    """Time for the relative coordinate to sweep one width near crossing."""
    t_star = classical_crossing_time(state_i, state_j)
    width = max(
        p.evolved(t_star).width
        for p in state_i.packets + state_j.packets
    )
    vi = total_momentum(state_i) / state_i.total_mass
    vj = total_momentum(state_j) / state_j.total_mass
    return width / abs(vi - vj)


@dataclass(frozen=True)
class PointerRevival:
    """Overlap and midpoint interference along a time grid.

    ``overlap`` is the conserved-magnitude inner product; ``coincidence``
    the spatial product that peaks at the crossing; the density columns
    compare the superposition's configuration density against the 50/50
    mixture at the instantaneous midpoint.
    """

    times: np.ndarray
    overlap: np.ndarray
    coincidence: np.ndarray
    density_superposition: np.ndarray
    density_mixture: np.ndarray
    interference: np.ndarray
    crossing_time: float
    sigma_time: float


def revival_trajectory(
    state_i: GaussianPointerState,
    state_j: GaussianPointerState,
    times,
    relative_phase: float = 0.0,
) -> PointerRevival:
    """Follow two branches through a crossing and record the fringes."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t_star = classical_crossing_time(state_i, state_j)
    t_sigma = sigma_crossing_time(state_i, state_j)
    alpha = np.exp(1j * relative_phase)

    overlap = np.empty(times.size)
    coincidence = np.empty(times.size)
    rho_sup = np.empty(times.size)
    rho_mix = np.empty(times.size)
    for k, t in enumerate(times):
        branch_i = free_evolve(state_i, t)
        branch_j = free_evolve(state_j, t)
        inner = complex(1.0)
        amp_i = complex(1.0)
        amp_j = complex(1.0)
        x_mid = 0.5 * (com_position(branch_i) + com_position(branch_j))
        coincidence_k = 1.0
        for a, b in _paired_packets(branch_i, branch_j):
            inner *= gaussian_overlap(a, b)
            coincidence_k *= spatial_overlap(a, b)
            amp_i *= a.amplitude(x_mid)
            amp_j *= b.amplitude(x_mid)
        overlap[k] = abs(inner)
        coincidence[k] = coincidence_k
        norm_sq = 2.0 + 2.0 * float(np.real(alpha * inner))
        rho_sup[k] = abs(amp_i + alpha * amp_j) ** 2 / norm_sq
        rho_mix[k] = 0.5 * (abs(amp_i) ** 2 + abs(amp_j) ** 2)
    return PointerRevival(
        times=times,
        overlap=overlap,
        coincidence=coincidence,
        density_superposition=rho_sup,
        density_mixture=rho_mix,
        interference=rho_sup - rho_mix,
        crossing_time=t_star,
        sigma_time=t_sigma,
    )


def phase_cell_labels(
    states: Sequence[GaussianPointerState], delta_p: float
) -> list[int]:
    """Cluster branches by mean momentum per particle at resolution ``delta_p``.

    Single-linkage: branches whose sorted means are separated by a gap
    larger than ``delta_p`` land in distinct cells; labels are dense
    integers ordered by ascending momentum.
    """
    if delta_p <= 0:
        raise ValueError("delta_p must be positive")
    means = np.array([mean_momentum(s) for s in states])
    order = np.argsort(means, kind="stable")
    labels = np.zeros(len(states), dtype=int)
    current = 0
    for rank in range(1, len(states)):
        if means[order[rank]] - means[order[rank - 1]] > delta_p:
            current += 1
        labels[order[rank]] = current
    return labels.tolist()
