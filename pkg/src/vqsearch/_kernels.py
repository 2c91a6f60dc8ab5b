"""Single-pass numba loops over amplitude pairs.

A pair index ``i`` in ``[0, 2^(q-1))`` expands to the basis index with a 0
inserted at the target bit; ``cmask`` holds the control bits that must be set.
Loops are serial so results are bit-identical run to run.
"""
from __future__ import annotations

import numba as nb
import numpy as np

_opts = dict(cache=True, nogil=True)


@nb.njit(**_opts)
def _base(i, tbit, low_mask):
    return ((i & ~low_mask) << 1) | (i & low_mask)


@nb.njit(**_opts)
def rotate(amps, target, cmask, c, s):
    tbit = np.int64(1) << target
    low = tbit - 1
    for i in range(amps.shape[0] >> 1):
        i0 = _base(i, tbit, low)
        if (i0 & cmask) != cmask:
            continue
        i1 = i0 | tbit
        a = amps[i0]
        b = amps[i1]
        amps[i0] = c * a - s * b
        amps[i1] = s * a + c * b


@nb.njit(**_opts)
def hadamard(amps, target, r):
    tbit = np.int64(1) << target
    low = tbit - 1
    for i in range(amps.shape[0] >> 1):
        i0 = _base(i, tbit, low)
        i1 = i0 | tbit
        a = amps[i0]
        b = amps[i1]
        amps[i0] = r * (a + b)
        amps[i1] = r * (a - b)


@nb.njit(**_opts)
def flip(amps, target, cmask):
    tbit = np.int64(1) << target
    low = tbit - 1
    for i in range(amps.shape[0] >> 1):
        i0 = _base(i, tbit, low)
        if (i0 & cmask) != cmask:
            continue
        i1 = i0 | tbit
        a = amps[i0]
        amps[i0] = amps[i1]
        amps[i1] = a


@nb.njit(**_opts)
def phase(amps, target, cmask):
    tbit = np.int64(1) << target
    mask = cmask | tbit
    for i in range(amps.shape[0]):
        if (i & mask) == mask:
            amps[i] = -amps[i]


@nb.njit(**_opts)
def rotation_derivative_overlap(lam, state, target, cmask):
    """sum over pairs of lam1*a - lam0*b, i.e. <lam| Ry(pi) |state> on the pair subspace."""
    tbit = np.int64(1) << target
    low = tbit - 1
    acc = 0.0
    for i in range(state.shape[0] >> 1):
        i0 = _base(i, tbit, low)
        if (i0 & cmask) != cmask:
            continue
        i1 = i0 | tbit
        acc += lam[i1] * state[i0] - lam[i0] * state[i1]
    return acc
