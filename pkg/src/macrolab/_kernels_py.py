"""Pure-numpy fallback for the compiled embedding kernel.

A few-site operator placed on sites ``S`` of an ``f``-site space touches
the dense matrix only at index pairs

    (sup_offsets[i] + rest_offsets[m], sup_offsets[j] + rest_offsets[m])

where ``sup_offsets`` enumerates the base-d digit patterns of the placed
sites and ``rest_offsets`` those of the spectator sites.  Within one
placement every such pair is distinct, so a fancy-indexed ``+=`` per
nonzero block entry is safe.
"""

from __future__ import annotations

import numpy as np


def accumulate_embedded(
    out: np.ndarray,
    block: np.ndarray,
    sup_offsets: np.ndarray,
    rest_offsets: np.ndarray,
    coeff: complex,
) -> None:
    """Add ``coeff * block`` into ``out`` at one tensor placement, in place."""
    for i, j in np.argwhere(block != 0):
        out[sup_offsets[i] + rest_offsets, sup_offsets[j] + rest_offsets] += (
            coeff * block[i, j]
        )
