"""Dense pure-state engine over mixed qubit / Z4 registers.

States are stored as flat complex vectors in row-major order over the layout's
register order. Operators are only ever built at the size of the register they
act on; the full-space matrix is never materialised.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import INPUT_NORM_TOL, NORM_TOL, ZERO_PROB

ROLES = ("spin", "pointer", "pointer-primed", "difference")
_ROLE_DIM = {"spin": 2, "pointer": 4, "pointer-primed": 4, "difference": 4}

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
IDENTITY2 = np.eye(2, dtype=complex)
PAULI = {"I": IDENTITY2, "X": SIGMA["x"], "Y": SIGMA["y"], "Z": SIGMA["z"]}


def shift_matrix(steps: int = 1, dim: int = 4) -> np.ndarray:
    """Cyclic shift |q> -> |q + steps mod dim>."""
    return np.roll(np.eye(dim, dtype=complex), steps % dim, axis=0)


def eigenprojector(axis: str, sign: int) -> np.ndarray:
    """Projector onto the sign (+1/-1) eigenspace of sigma_axis."""
    return (IDENTITY2 + sign * SIGMA[axis]) / 2


def eigenbasis_rotation(axis: str) -> np.ndarray:
    """Unitary V taking the +1/-1 eigenvectors of sigma_axis to |0>, |1>."""
    _, vecs = np.linalg.eigh(SIGMA[axis])
    # eigh sorts ascending: column 0 is the -1 eigenvector
    return np.stack([vecs[:, 1], vecs[:, 0]]).conj()


@dataclass(frozen=True)
class Register:
    id: str
    dim: int
    role: str


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[Register, ...]

    def __post_init__(self):
        object.__setattr__(self, "registers", tuple(self.registers))
        ids = [r.id for r in self.registers]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate register ids in {ids}")
        for r in self.registers:
            if r.role not in _ROLE_DIM:
                raise ValueError(f"unknown role {r.role!r} for register {r.id}")
            if r.dim != _ROLE_DIM[r.role]:
                raise ValueError(f"register {r.id} with role {r.role} must have dim {_ROLE_DIM[r.role]}")

    @classmethod
    def of(cls, *specs: tuple[str, str]) -> "RegisterLayout":
        """Build from (id, role) pairs; dims follow from the roles."""
        return cls(tuple(Register(rid, _ROLE_DIM[role], role) for rid, role in specs))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.registers)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.registers)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.registers else 1

    def index(self, rid: str) -> int:
        for i, r in enumerate(self.registers):
            if r.id == rid:
                return i
        raise KeyError(f"unknown register {rid!r}")

    def register(self, rid: str) -> Register:
        return self.registers[self.index(rid)]

    def without(self, rids: Iterable[str]) -> "RegisterLayout":
        drop = set(rids)
        return RegisterLayout(tuple(r for r in self.registers if r.id not in drop))

    def subset(self, rids: Sequence[str]) -> "RegisterLayout":
        return RegisterLayout(tuple(self.register(r) for r in rids))


@dataclass(frozen=True, eq=False)
class PureState:
    layout: RegisterLayout
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.total_dim:
            raise ValueError(f"expected {self.layout.total_dim} amplitudes, got {amps.size}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probability_of(self, rid: str, value: int) -> float:
        t = np.moveaxis(self.tensor, self.layout.index(rid), 0)
        return float(np.sum(np.abs(t[value]) ** 2))


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    matrix: np.ndarray
    target: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise ValueError(f"local unitary must be 2x2 or 4x4, got shape {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=NORM_TOL, rtol=0):
            raise ValueError("matrix is not unitary")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        m = np.asarray(self.matrix, dtype=complex)
        d = int(np.prod(self.dims))
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match dims {self.dims}")
        object.__setattr__(self, "matrix", m)

    def trace_distance(self, other: "DensityMatrix") -> float:
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        return float(0.5 * np.abs(np.linalg.eigvalsh(self.matrix - other.matrix)).sum())


def _apply_on_axis(tensor: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(matrix, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def product_state(layout: RegisterLayout, factors: Sequence[Sequence[complex]]) -> PureState:
    if len(factors) != len(layout.registers):
        raise ValueError(f"expected {len(layout.registers)} factors, got {len(factors)}")
    amps = np.ones(1, dtype=complex)
    for reg, f in zip(layout.registers, factors):
        v = np.asarray(f, dtype=complex).reshape(-1)
        if v.size != reg.dim:
            raise ValueError(f"factor for {reg.id} has dim {v.size}, register has dim {reg.dim}")
        nrm = np.linalg.norm(v)
        if nrm < INPUT_NORM_TOL:
            raise ValueError(f"zero-norm factor for register {reg.id}")
        amps = np.kron(amps, v / nrm)
    return PureState(layout, amps)


def basis_state(layout: RegisterLayout, values: Sequence[int]) -> PureState:
    factors = []
    for reg, v in zip(layout.registers, values):
        e = np.zeros(reg.dim, dtype=complex)
        e[v] = 1
        factors.append(e)
    return product_state(layout, factors)


def apply_local(state: PureState, u: LocalUnitary) -> PureState:
    reg = state.layout.register(u.target)
    if u.matrix.shape[0] != reg.dim:
        raise ValueError(f"{u.matrix.shape[0]}-dim unitary on {reg.dim}-dim register {reg.id}")
    t = _apply_on_axis(state.tensor, u.matrix, state.layout.index(u.target))
    return PureState(state.layout, t.reshape(-1))


def apply_controlled_shift(
    state: PureState, control: str, axis: str, pointer: str, steps_for_plus: int
) -> PureState:
    """Shift `pointer` by s * steps_for_plus (mod 4), s the sigma_axis eigenvalue of `control`.

    This is the impulsive limit of exp(-i P sigma_axis) for a Z4 pointer. It is
    applied as sum_s Pi_s (x) Shift^(s*steps), which equals V^dag C V with C
    the shift controlled in the computational basis.
    """
    layout = state.layout
    creg, preg = layout.register(control), layout.register(pointer)
    if creg.role != "spin":
        raise ValueError(f"control {control} must be a spin register, has role {creg.role}")
    if preg.dim != 4 or preg.role == "spin":
        raise ValueError(f"target {pointer} must be a dim-4 pointer register")
    if axis not in SIGMA:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    ci, pi = layout.index(control), layout.index(pointer)
    t = state.tensor
    out = np.zeros_like(t)
    for s in (1, -1):
        branch = _apply_on_axis(t, eigenprojector(axis, s), ci)
        out += np.roll(branch, s * steps_for_plus, axis=pi)
    return PureState(layout, out.reshape(-1))


def _project(state: PureState, target: str, value: int) -> np.ndarray:
    t = state.tensor
    ax = state.layout.index(target)
    out = np.zeros_like(t)
    idx = [slice(None)] * t.ndim
    idx[ax] = value
    out[tuple(idx)] = t[tuple(idx)]
    return out.reshape(-1)


def measure_register(state: PureState, target: str, rng: np.random.Generator):
    """Projective computational-basis measurement of one register.

    Returns (outcome, probability, post-measurement state on the full layout).
    """
    reg = state.layout.register(target)
    t = np.moveaxis(state.tensor, state.layout.index(target), 0).reshape(reg.dim, -1)
    probs = np.sum(np.abs(t) ** 2, axis=1)
    total = probs.sum()
    if total < ZERO_PROB:
        raise ValueError("state has numerically zero norm")
    probs = probs / total
    outcome = int(rng.choice(reg.dim, p=probs))
    p = float(probs[outcome])
    post = _project(state, target, outcome) / np.sqrt(p * total)
    return outcome, p, PureState(state.layout, post)


def enumerate_branches(state: PureState, targets: Sequence[str]):
    """All measurement outcomes of `targets` with non-zero probability.

    Each branch is (outcomes, probability, conditional) where `conditional`
    lives on the layout with the measured registers removed.
    """
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    layout = state.layout
    axes = [layout.index(r) for r in targets]
    tdims = [layout.dims[a] for a in axes]
    rest = layout.without(targets)
    t = np.moveaxis(state.tensor, axes, list(range(len(axes)))).reshape(int(np.prod(tdims)), -1)
    probs = np.sum(np.abs(t) ** 2, axis=1)
    probs = probs / probs.sum()
    branches = []
    for flat, outcome in enumerate(itertools.product(*[range(d) for d in tdims])):
        p = probs[flat]
        if p <= ZERO_PROB:
            continue
        row = t[flat]
        branches.append((outcome, float(p), PureState(rest, row / np.linalg.norm(row))))
    return branches


def reduced_density(state: PureState, keep: Sequence[str]) -> DensityMatrix:
    keep = list(keep)
    if not keep:
        raise ValueError("keep set must be non-empty")
    layout = state.layout
    axes = [layout.index(r) for r in keep]
    kdim = int(np.prod([layout.dims[a] for a in axes]))
    t = np.moveaxis(state.tensor, axes, list(range(len(axes)))).reshape(kdim, -1)
    return DensityMatrix(tuple(layout.dims[a] for a in axes), t @ t.conj().T)


def fidelity(a: PureState, b: PureState) -> float:
    if a.layout != b.layout:
        raise ValueError("layout mismatch")
    f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(1.0, f))
