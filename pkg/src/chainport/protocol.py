"""Schedules and execution of the two-way and chain teleportation protocols.

Site j (1-based) carries spin ``s{j}``. In full mode it also carries the
unprimed pointer ``q{j}`` (coupled at t1) and the primed pointer ``qp{j}``
(coupled at t2). Link j pairs ``q{j}`` with ``qp{j+1}`` (n+1 wraps to 1) and
its readout difference is ``q_j - q'_{j+1} mod 4``.

Compact mode replaces each pair by one Z4 register ``d{j}`` starting in |0>;
the t1 coupling shifts it by +sigma and the t2 coupling by -sigma, so measuring
it yields the link difference directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .config import COMPACT_MODE_MAX_N, FULL_MODE_MAX_N, ZERO_PROB
from .devices import PointerPair, couple, difference_mod4, init_entangled_pair
from .errors import ConfigError, SizeLimitError
from .hilbert import (
    PAULI,
    PureState,
    RegisterLayout,
    apply_controlled_shift,
    fidelity,
    measure_register,
    enumerate_branches,
    product_state,
)

FAMILIES = ("two-way-vaa", "chain")
END_LINKS = ("z", "x", "y", "auto")
MODES = ("full", "compact")

SpinInputs = Union[Sequence[Sequence[complex]], PureState, np.ndarray]


@dataclass(frozen=True)
class ProtocolSpec:
    n: int
    family: str = "chain"
    end_link: str = "z"
    sim_mode: str = "full"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.end_link not in END_LINKS:
            raise ConfigError(f"end_link must be one of {END_LINKS}, got {self.end_link!r}")
        if self.sim_mode not in MODES:
            raise ConfigError(f"sim_mode must be one of {MODES}, got {self.sim_mode!r}")
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool) or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        if self.family == "two-way-vaa" and self.n != 2:
            raise ConfigError("two-way-vaa requires n = 2")

    @property
    def end_axis(self) -> str:
        """Axis of the closing link n -> 1.

        The two-way protocol always closes with the y crossing; ``end_link`` is
        ignored for it.
        """
        if self.family == "two-way-vaa":
            return "y"
        if self.end_link == "auto":
            return "x" if self.n % 2 else "y"
        return self.end_link

    def fingerprint(self) -> dict:
        return {"n": int(self.n), "family": self.family, "end_link": self.end_axis}

    def with_mode(self, sim_mode: str) -> "ProtocolSpec":
        return ProtocolSpec(self.n, self.family, self.end_link, sim_mode)

    def check_size(self) -> None:
        limit = FULL_MODE_MAX_N if self.sim_mode == "full" else COMPACT_MODE_MAX_N
        if self.n > limit:
            raise SizeLimitError(f"{self.sim_mode} mode supports n <= {limit}, got n = {self.n}")


@dataclass(frozen=True)
class Coupling:
    site: int
    spin: str
    pointer: str
    axis: str
    link: int
    steps: int = 1


@dataclass(frozen=True)
class Schedule:
    spec: ProtocolSpec
    layer_t1: tuple[Coupling, ...]
    layer_t2: tuple[Coupling, ...]
    links: tuple[PointerPair, ...]
    readout_order: tuple[str, ...]
    layout: RegisterLayout


@dataclass(frozen=True)
class OutcomeRecord:
    raw_q: tuple[int, ...]
    raw_q_prime: tuple[int, ...]
    d: tuple[int, ...]

    @property
    def supported(self) -> bool:
        return all(v in (0, 2) for v in self.d)


@dataclass(frozen=True, eq=False)
class TrialResult:
    outcome: OutcomeRecord
    prob: float
    spin_state_before_correction: PureState
    spin_state_after_correction: PureState | None
    fidelity_before_correction: float
    fidelity_to_target: float


@dataclass(frozen=True, eq=False)
class BranchReport:
    readout: tuple[int, ...]
    d: tuple[int, ...]
    prob: float
    spin_state: PureState
    fidelity_before: float
    fidelity_after: float | None


def spin_id(site: int) -> str:
    return f"s{site}"


def spin_layout(n: int) -> RegisterLayout:
    return RegisterLayout.of(*[(spin_id(j), "spin") for j in range(1, n + 1)])


def link_axes(spec: ProtocolSpec) -> list[str]:
    """Axis of link j = 1..n: x for odd j < n, y for even j < n, end axis for j = n."""
    return ["x" if j % 2 else "y" for j in range(1, spec.n)] + [spec.end_axis]


def build_schedule(spec: ProtocolSpec) -> Schedule:
    n = spec.n
    axes = link_axes(spec)
    nxt = lambda j: j % n + 1  # noqa: E731
    links = tuple(PointerPair(j, f"q{j}", f"qp{nxt(j)}", axes[j - 1]) for j in range(1, n + 1))
    spins = [(spin_id(j), "spin") for j in range(1, n + 1)]
    if spec.sim_mode == "full":
        layout = RegisterLayout.of(
            *spins,
            *[(f"q{j}", "pointer") for j in range(1, n + 1)],
            *[(f"qp{j}", "pointer-primed") for j in range(1, n + 1)],
        )
        t1 = tuple(Coupling(p.link, spin_id(p.link), p.unprimed, p.axis, p.link) for p in links)
        t2 = tuple(
            sorted(
                (Coupling(nxt(p.link), spin_id(nxt(p.link)), p.primed, p.axis, p.link) for p in links),
                key=lambda c: c.site,
            )
        )
        readout = tuple(f"q{j}" for j in range(1, n + 1)) + tuple(f"qp{j}" for j in range(1, n + 1))
    else:
        layout = RegisterLayout.of(*spins, *[(f"d{j}", "difference") for j in range(1, n + 1)])
        t1 = tuple(Coupling(p.link, spin_id(p.link), f"d{p.link}", p.axis, p.link, 1) for p in links)
        t2 = tuple(
            sorted(
                (Coupling(nxt(p.link), spin_id(nxt(p.link)), f"d{p.link}", p.axis, p.link, -1) for p in links),
                key=lambda c: c.site,
            )
        )
        readout = tuple(f"d{j}" for j in range(1, n + 1))
    return Schedule(spec, t1, t2, links, readout, layout)


def as_spin_state(n: int, inputs: SpinInputs) -> PureState:
    """Accept n single-spin vectors, a joint 2**n vector, or a spin-layout PureState."""
    layout = spin_layout(n)
    if isinstance(inputs, PureState):
        if inputs.layout != layout:
            raise ConfigError("input state does not live on the spin layout")
        return inputs
    arr = np.asarray(inputs, dtype=complex)
    if arr.ndim == 1 and arr.size == 2**n:
        nrm = np.linalg.norm(arr)
        if nrm == 0:
            raise ConfigError("zero-norm joint input")
        return PureState(layout, arr / nrm)
    if len(inputs) != n:
        raise ConfigError(f"expected {n} single-spin inputs, got {len(inputs)}")
    return product_state(layout, inputs)


def initial_state(schedule: Schedule, spins: PureState) -> PureState:
    """Spins (x) fiducial |0> devices, with the full-mode pointer pairs entangled."""
    n = schedule.spec.n
    n_dev = len(schedule.layout.registers) - n
    dev = np.zeros(4**n_dev, dtype=complex)
    dev[0] = 1
    state = PureState(schedule.layout, np.kron(spins.amplitudes, dev))
    if schedule.spec.sim_mode == "full":
        for pair in schedule.links:
            state = init_entangled_pair(state, pair)
    return state


def evolve(schedule: Schedule, spins: PureState) -> PureState:
    """Initial state through the t1 layer and then the t2 layer (state at T, before readout)."""
    state = initial_state(schedule, spins)
    for c in schedule.layer_t1 + schedule.layer_t2:
        if schedule.spec.sim_mode == "full":
            state = couple(state, c.spin, c.pointer, c.axis)
        else:
            state = apply_controlled_shift(state, c.spin, c.axis, c.pointer, c.steps)
    return state


def differences(schedule: Schedule, readout: Sequence[int]) -> tuple[int, ...]:
    """Link differences from a readout tuple given in ``schedule.readout_order``."""
    if schedule.spec.sim_mode == "compact":
        return tuple(int(v) % 4 for v in readout)
    values = dict(zip(schedule.readout_order, readout))
    return tuple(difference_mod4(values[p.unprimed], values[p.primed]) for p in schedule.links)


def _outcome_record(schedule: Schedule, readout: Sequence[int]) -> OutcomeRecord:
    n = schedule.spec.n
    d = differences(schedule, readout)
    if schedule.spec.sim_mode == "compact":
        return OutcomeRecord((), (), d)
    return OutcomeRecord(tuple(readout[:n]), tuple(readout[n:]), d)


def target_state(inputs: SpinInputs, n: int | None = None) -> PureState:
    """Cyclically permuted inputs: the state of site j moves to site j+1 (mod n).

    ``n`` is only needed when ``inputs`` is a flat joint vector.
    """
    if isinstance(inputs, PureState):
        n = len(inputs.layout.registers)
    elif n is None:
        n = len(inputs)
    return apply_cyclic_permutation(as_spin_state(n, inputs))


def apply_cyclic_permutation(spins: PureState) -> PureState:
    n = len(spins.layout.registers)
    return PureState(spins.layout, np.moveaxis(spins.tensor, n - 1, 0).reshape(-1))


def cyclic_permutation_unitary(n: int) -> np.ndarray:
    """Matrix of |b_1 ... b_n> -> |b_n b_1 ... b_{n-1}> on n qubits."""
    if n < 2:
        raise ConfigError("n must be >= 2")
    dim = 2**n
    perm = np.moveaxis(np.arange(dim).reshape((2,) * n), n - 1, 0).reshape(-1)
    u = np.zeros((dim, dim))
    # new[k] = old[perm[k]]
    u[np.arange(dim), perm] = 1
    return u


def apply_corrections(spins: PureState, labels: Sequence[str]) -> PureState:
    t = spins.tensor
    for axis, lab in enumerate(labels):
        if lab != "I":
            t = np.moveaxis(np.tensordot(PAULI[lab], t, axes=([1], [axis])), 0, axis)
    return PureState(spins.layout, t.reshape(-1))


def _spin_slice(schedule: Schedule, state: PureState, readout: Sequence[int]) -> np.ndarray:
    n = schedule.spec.n
    t = state.tensor.reshape((2**n,) + state.layout.dims[n:])
    return t[(slice(None),) + tuple(readout)]


def _finish(spec, schedule, inputs_state, spins_after, readout, prob, table, correct):
    target = apply_cyclic_permutation(inputs_state)
    outcome = _outcome_record(schedule, readout)
    f_before = fidelity(spins_after, target)
    if correct is None:
        correct = table is not None
    if correct:
        if table is None:
            raise ConfigError("correction requested but no correction table supplied")
        table.check_spec(spec)
        corrected = apply_corrections(spins_after, table.labels_for(outcome.d))
        return TrialResult(outcome, prob, spins_after, corrected, f_before, fidelity(corrected, target))
    return TrialResult(outcome, prob, spins_after, None, f_before, f_before)


def run_trial(spec: ProtocolSpec, inputs: SpinInputs, rng: np.random.Generator, table=None, correct=None) -> TrialResult:
    """One sampled run: couplings, local readout of every device, differences, corrections.

    ``correct`` defaults to applying the table when one is given; asking for a
    correction without a table is an error.
    """
    if spec.sim_mode == "compact":
        return run_compact(spec, inputs, rng, table=table, correct=correct)
    spec.check_size()
    schedule = build_schedule(spec)
    spins = as_spin_state(spec.n, inputs)
    state = evolve(schedule, spins)
    readout, prob = _sample_readout(schedule, state, rng)
    return _finish(spec, schedule, spins, _conditional(schedule, state, readout), readout, prob, table, correct)


def run_compact(spec: ProtocolSpec, inputs: SpinInputs, rng: np.random.Generator, table=None, correct=None) -> TrialResult:
    if spec.sim_mode != "compact":
        raise ConfigError("run_compact requires sim_mode = compact")
    spec.check_size()
    schedule = build_schedule(spec)
    spins = as_spin_state(spec.n, inputs)
    state = evolve(schedule, spins)
    readout, prob = _sample_readout(schedule, state, rng)
    return _finish(spec, schedule, spins, _conditional(schedule, state, readout), readout, prob, table, correct)


def _sample_readout(schedule: Schedule, state: PureState, rng):
    readout, prob = [], 1.0
    for rid in schedule.readout_order:
        value, p, state = measure_register(state, rid, rng)
        readout.append(value)
        prob *= p
    return tuple(readout), prob


def _conditional(schedule: Schedule, state: PureState, readout) -> PureState:
    # readout order is the layout's device order in both modes
    v = _spin_slice(schedule, state, readout)
    return PureState(spin_layout(schedule.spec.n), v / np.linalg.norm(v))


def enumerate_protocol_branches(spec: ProtocolSpec, inputs: SpinInputs, table=None) -> list[BranchReport]:
    """Every non-zero-probability device readout with its conditional spin state."""
    spec.check_size()
    schedule = build_schedule(spec)
    spins = as_spin_state(spec.n, inputs)
    target = apply_cyclic_permutation(spins)
    if table is not None:
        table.check_spec(spec)
    state = evolve(schedule, spins)
    reports = []
    for readout, p, cond in enumerate_branches(state, schedule.readout_order):
        d = differences(schedule, readout)
        f_after = None
        if table is not None:
            f_after = fidelity(apply_corrections(cond, table.labels_for(d)), target)
        reports.append(BranchReport(tuple(readout), d, p, cond, fidelity(cond, target), f_after))
    return reports


@dataclass(frozen=True, eq=False)
class DifferenceClass:
    d: tuple[int, ...]
    prob: float
    spin_state: PureState
    # worst infidelity between any readout in the class and spin_state
    spread: float


def difference_classes(spec: ProtocolSpec, inputs: SpinInputs) -> dict[tuple[int, ...], DifferenceClass]:
    """Readouts grouped by difference vector, computed vectorised from the final state."""
    spec.check_size()
    schedule = build_schedule(spec)
    spins = as_spin_state(spec.n, inputs)
    state = evolve(schedule, spins)
    return _group_classes(schedule, state)


def _readout_differences(schedule: Schedule) -> np.ndarray:
    ndev = len(schedule.readout_order)
    grid = np.indices((4,) * ndev).reshape(ndev, -1)
    if schedule.spec.sim_mode == "compact":
        return grid.T
    pos = {rid: i for i, rid in enumerate(schedule.readout_order)}
    cols = [(grid[pos[p.unprimed]] - grid[pos[p.primed]]) % 4 for p in schedule.links]
    return np.stack(cols, axis=1)


def _group_classes(schedule: Schedule, state: PureState):
    n = schedule.spec.n
    rows = state.amplitudes.reshape(2**n, -1)
    probs = np.sum(np.abs(rows) ** 2, axis=0)
    probs = probs / probs.sum()
    dvec = _readout_differences(schedule)
    keys = dvec @ (4 ** np.arange(n)[::-1])
    layout = spin_layout(n)
    out = {}
    for key in np.unique(keys[probs > ZERO_PROB]):
        members = np.nonzero((keys == key) & (probs > ZERO_PROB))[0]
        best = members[np.argmax(probs[members])]
        ref = rows[:, best] / np.linalg.norm(rows[:, best])
        sub = rows[:, members]
        overlaps = np.abs(ref.conj() @ sub) ** 2 / np.sum(np.abs(sub) ** 2, axis=0)
        d = tuple(int(v) for v in dvec[best])
        out[d] = DifferenceClass(d, float(probs[members].sum()), PureState(layout, ref), float(np.max(1 - overlaps)))
    return dict(sorted(out.items()))


def canonical_readout(schedule: Schedule, d: Sequence[int]) -> tuple[int, ...]:
    """A readout realising difference vector d: q_j = d_j, all primed pointers 0."""
    if schedule.spec.sim_mode == "compact":
        return tuple(int(v) % 4 for v in d)
    return tuple(int(v) % 4 for v in d) + (0,) * schedule.spec.n


def kraus_operators(spec: ProtocolSpec) -> dict[tuple[int, ...], np.ndarray]:
    """Unnormalised branch operators K_d on the spin space, one per reachable d.

    Column b of K_d is the spin part of the final state for basis input |b>,
    projected on the canonical readout of d.
    """
    spec.check_size()
    schedule = build_schedule(spec)
    n = spec.n
    dim = 2**n
    layout = spin_layout(n)
    cands = list(itertools.product(range(4), repeat=n))
    readouts = [canonical_readout(schedule, d) for d in cands]
    cols = {d: np.zeros((dim, dim), dtype=complex) for d in cands}
    for b in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[b] = 1
        state = evolve(schedule, PureState(layout, e))
        for d, r in zip(cands, readouts):
            cols[d][:, b] = _spin_slice(schedule, state, r)
    return {d: k for d, k in cols.items() if np.linalg.norm(k) > 1e-12}


def channel_overlap(kraus: np.ndarray, unitary: np.ndarray) -> float:
    """|Tr(U^dag K)| / sqrt(dim Tr(K^dag K)); equals 1 iff K is proportional to U."""
    dim = unitary.shape[0]
    num = abs(np.trace(unitary.conj().T @ kraus))
    den = np.sqrt(dim * np.real(np.trace(kraus.conj().T @ kraus)))
    return float(num / den)


def unitarity_deviation(kraus: np.ndarray) -> float:
    """max |K^dag K / c - I| with c the mean eigenvalue of K^dag K."""
    m = kraus.conj().T @ kraus
    c = np.real(np.trace(m)) / m.shape[0]
    return float(np.max(np.abs(m / c - np.eye(m.shape[0]))))
