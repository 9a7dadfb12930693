"""Intensive collective observables built from replicated few-site templates.

A collective observable is the normalized placement sum

    A = (1/c_f) * sum_P  embed(template, P)

over a family of placements ``P`` of an ``n``-site template in an
``f``-site space, with ``c_f`` equal to the number of placements.  The
normalization keeps the spectral norm bounded by the template's norm
independently of ``f`` (each summand has the template's norm), which is
what makes pairs of such observables asymptotically commuting: their
commutator norm decays like ``1/f``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    HilbertSpace,
    LocalOperator,
    ManyBodyOperator,
    accumulate_placement,
    product_state,
)

__all__ = [
    "MacroObservable",
    "OverlapReport",
    "CommutatorScaling",
    "build_intensive",
    "commutator_norm",
    "commutator_scaling_sweep",
    "offdiag_overlap",
]

PLACEMENTS = ("all-subsets", "nearest-neighbor-chain")


@dataclass(frozen=True)
class MacroObservable:
    """A realized intensive observable together with its construction data."""

    template: LocalOperator
    space: HilbertSpace
    placement: str
    normalization: float
    operator: ManyBodyOperator = field(repr=False)

    @property
    def body_count(self) -> int:
        return self.template.body_count


def _placements(f: int, n: int, placement: str) -> list[tuple[int, ...]]:
    if placement == "all-subsets":
        return list(itertools.combinations(range(f), n))
    if placement == "nearest-neighbor-chain":
        return [tuple(range(k, k + n)) for k in range(f - n + 1)]
    raise ValueError(f"unknown placement rule {placement!r}")


def build_intensive(
    template: LocalOperator,
    space: HilbertSpace,
    placement: str = "all-subsets",
) -> MacroObservable:
    """Replicate ``template`` over placements and divide by their count."""
    n = template.body_count
    f = space.num_sites
    if n > f:
        raise ValueError(f"template spans {n} sites but the space has only {f}")
    if n > f / 2:
        warnings.warn(
            f"template body count {n} is not small against {f} sites; "
            "the observable is barely collective",
            stacklevel=2,
        )
    expected = space.local_dim**n
    if template.matrix.shape[0] != expected:
        raise ValueError(
            f"template matrix dimension {template.matrix.shape[0]} != "
            f"{space.local_dim}**{n}"
        )
    sites_list = _placements(f, n, placement)
    out = np.zeros((space.dimension, space.dimension), dtype=np.complex128)
    for sites in sites_list:
        accumulate_placement(out, template.matrix, sites, space)
    c_f = float(len(sites_list))
    out /= c_f
    operator = ManyBodyOperator(space, out, hermitian=template.hermitian)
    return MacroObservable(template, space, placement, c_f, operator)


def commutator_norm(a: MacroObservable, b: MacroObservable) -> float:
    """Spectral norm of ``[A, B]``."""
    if a.space != b.space:
        raise ValueError("observables live on different spaces")
    comm = a.operator.matrix @ b.operator.matrix - b.operator.matrix @ a.operator.matrix
    if a.operator.hermitian and b.operator.hermitian:
        # i[A, B] is hermitian, so its extremal eigenvalue is the norm.
        return float(np.max(np.abs(np.linalg.eigvalsh(1j * comm))))
    return float(np.linalg.norm(comm, 2))


@dataclass(frozen=True)
class CommutatorScaling:
    """Commutator norms across system sizes with a log-log slope."""

    num_sites: np.ndarray
    norms: np.ndarray
    slope: float | None


def commutator_scaling_sweep(
    template_a: LocalOperator,
    template_b: LocalOperator,
    f_values,
    placement: str = "all-subsets",
    local_dim: int = 2,
) -> CommutatorScaling:
    """Measure ``||[A, B]||`` for each system size and fit log-log decay.

    For commuting templates every norm vanishes and the slope is
    undefined, reported as ``None``.
    """
    f_values = [int(f) for f in f_values]
    norms = []
    for f in f_values:
        space = HilbertSpace(f, local_dim)
        a = build_intensive(template_a, space, placement)
        b = build_intensive(template_b, space, placement)
        norms.append(commutator_norm(a, b))
    norms = np.asarray(norms)
    if len(f_values) >= 2 and np.all(norms > 1e-13):
        slope = float(
            np.polyfit(np.log(np.asarray(f_values, dtype=float)), np.log(norms), 1)[0]
        )
    else:
        slope = None
    return CommutatorScaling(np.asarray(f_values), norms, slope)


@dataclass(frozen=True)
class OverlapReport:
    """Exact off-diagonal matrix element between product states, with bound.

    ``bound`` is the combinatorial estimate
    ``binom(N, n)/c_f * a_max * tau**(N-n)`` where ``a_max`` is the largest
    per-placement template element between the two states and ``tau`` the
    common per-site overlap magnitude (geometric mean of the ``N - n``
    largest ones when they differ).
    """

    value: complex
    bound: float
    num_sites: int
    body_count: int
    tau: float


def _as_site_states(space: HilbertSpace, states) -> list[np.ndarray]:
    try:
        vectors = [np.asarray(v, dtype=np.complex128) for v in states]
    except (TypeError, ValueError) as exc:
        raise ValueError("expected a sequence of per-site state vectors") from exc
    if len(vectors) != space.num_sites or any(
        v.shape != (space.local_dim,) for v in vectors
    ):
        raise ValueError(
            "product states must supply one local vector per site; "
            "full many-body vectors are not accepted here"
        )
    for v in vectors:
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("site states must be normalized")
    return vectors


def offdiag_overlap(
    observable: MacroObservable,
    phi_i,
    phi_j,
    allow_unequal: bool = False,
) -> OverlapReport:
    """Exact ``<phi_i| A |phi_j>`` for product states, with its decay bound.

    Requires all per-site overlap magnitudes to agree within 1e-9 so that
    a single ``tau`` controls the bound, unless ``allow_unequal`` is set,
    in which case the bound uses the product of the ``N - n`` largest
    per-site overlaps (reported via their geometric mean as ``tau``).
    """
    space = observable.space
    n = observable.body_count
    f = space.num_sites
    left = _as_site_states(space, phi_i)
    right = _as_site_states(space, phi_j)

    vec_i = product_state(space, left)
    vec_j = product_state(space, right)
    value = complex(vec_i.conj() @ (observable.operator.matrix @ vec_j))

    site_overlaps = np.array([l.conj() @ r for l, r in zip(left, right)])
    mags = np.abs(site_overlaps)
    spectators = f - n
    if mags.size and mags.max() - mags.min() > 1e-9:
        if not allow_unequal:
            raise ValueError(
                "per-site overlaps are unequal; pass allow_unequal=True to "
                "bound with the largest ones"
            )
        largest = np.sort(mags)[::-1][:spectators]
        spectator_factor = float(np.prod(largest))
        tau = float(spectator_factor ** (1.0 / spectators)) if spectators else 1.0
    else:
        tau = float(mags.mean()) if mags.size else 1.0
        spectator_factor = tau**spectators

    # Largest template element over placements, between the placed clusters.
    a_max = 0.0
    for sites in _placements(f, n, observable.placement):
        ci = left[sites[0]]
        cj = right[sites[0]]
        for s in sites[1:]:
            ci = np.kron(ci, left[s])
            cj = np.kron(cj, right[s])
        element = abs(ci.conj() @ (observable.template.matrix @ cj))
        a_max = max(a_max, float(element))

    bound = (
        math.comb(f, n) / observable.normalization * a_max * spectator_factor
    )
    return OverlapReport(value, float(bound), f, n, tau)
