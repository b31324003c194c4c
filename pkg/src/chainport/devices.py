"""Z4 measuring devices: entangled pointer pairs, couplings and readout arithmetic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import VERIFY_TOL
from .hilbert import PureState, apply_controlled_shift

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class PointerPair:
    """Device pair for link j: Q_j at site j and Q'_{j+1} at site j+1 (N+1 wraps to 1)."""

    link: int
    unprimed: str
    primed: str
    axis: str

    def __post_init__(self):
        if self.unprimed == self.primed:
            raise ValueError("pair registers must be distinct")
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")


def z4(value: int) -> int:
    return int(value) % 4


def difference_mod4(q: int, q_prime: int) -> int:
    return (int(q) - int(q_prime)) % 4


def init_entangled_pair(state: PureState, pair: PointerPair) -> PureState:
    """Replace the fiducial |0>|0> of a pair by (1/2) sum_q |q>|q>.

    Both pointers must currently sit in |0>; any amplitude elsewhere is an error.
    """
    layout = state.layout
    for rid in (pair.unprimed, pair.primed):
        reg = layout.register(rid)
        if reg.dim != 4:
            raise ValueError(f"{rid} is not a Z4 register")
        if abs(state.probability_of(rid, 0) - 1.0) > VERIFY_TOL:
            raise ValueError(f"register {rid} is not in the fiducial |0> state")
    a, b = layout.index(pair.unprimed), layout.index(pair.primed)
    t = state.tensor
    idx = [slice(None)] * t.ndim
    idx[a] = 0
    idx[b] = 0
    rest = t[tuple(idx)]
    out = np.zeros_like(t)
    for q in range(4):
        idx[a] = q
        idx[b] = q
        out[tuple(idx)] = rest / 2
    return PureState(layout, out.reshape(-1))


def couple(state: PureState, spin: str, pointer: str, axis: str) -> PureState:
    """Impulsive P sigma_axis coupling: shifts the pointer by the spin's eigenvalue."""
    return apply_controlled_shift(state, spin, axis, pointer, steps_for_plus=1)
