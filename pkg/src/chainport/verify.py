"""Property checks over protocol runs: no-signaling, outcome support, mode
agreement, sampling statistics, readout pairing and branch operators."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .config import FIDELITY_TOL, VERIFY_TOL, ZERO_PROB
from .corrections import LABELS, _label_matrix
from .errors import ConfigError
from .hilbert import DensityMatrix, PureState, fidelity, reduced_density
from .protocol import (
    ProtocolSpec,
    _readout_differences,
    as_spin_state,
    build_schedule,
    channel_overlap,
    cyclic_permutation_unitary,
    difference_classes,
    enumerate_protocol_branches,
    evolve,
    initial_state,
    kraus_operators,
    spin_id,
    unitarity_deviation,
)


@dataclass
class NoSignalingReport:
    max_pointer_deviation: float
    max_remote_trace_distance: float
    pass_: bool
    pointers_checked: bool = True
    details: dict = field(default_factory=dict)


def _differing_sites(n, input_a, input_b) -> list[int]:
    if len(input_a) != n or len(input_b) != n:
        raise ConfigError(f"no-signaling check needs {n} single-spin inputs per variant")
    out = []
    for j, (a, b) in enumerate(zip(input_a, input_b), start=1):
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        if not np.allclose(a / np.linalg.norm(a), b / np.linalg.norm(b), atol=1e-14, rtol=0):
            out.append(j)
    return out


def _dephase(rho: DensityMatrix, dephased_axes: list[int]) -> DensityMatrix:
    """Zero coherences between different values of the given register axes."""
    dims = rho.dims
    k = len(dims)
    t = rho.matrix.reshape(dims + dims).copy()
    for ax in dephased_axes:
        shape = [1] * (2 * k)
        shape[ax] = dims[ax]
        shape[k + ax] = dims[ax]
        t = t * np.eye(dims[ax]).reshape(shape)
    return DensityMatrix(dims, t.reshape(rho.matrix.shape))


def _local_views(spec: ProtocolSpec, state: PureState) -> dict[str, DensityMatrix]:
    """Pre-communication local states of every site (pointers read out and averaged)."""
    views = {}
    for j in range(1, spec.n + 1):
        views[f"spin{j}"] = reduced_density(state, [spin_id(j)])
        if spec.sim_mode == "full":
            site = reduced_density(state, [spin_id(j), f"q{j}", f"qp{j}"])
            views[f"site{j}"] = _dephase(site, [1, 2])
    return views


def check_no_signaling(spec: ProtocolSpec, input_a, input_b) -> NoSignalingReport:
    """Compare every site's local pre-communication state between two input variants.

    The variants may differ at one site r at most; sites other than r must see
    identical local states, and every pointer must be maximally mixed.
    """
    spec.check_size()
    diff = _differing_sites(spec.n, input_a, input_b)
    if len(diff) > 1:
        raise ConfigError(f"inputs differ at sites {diff}; expected at most one")
    r = diff[0] if diff else None
    schedule = build_schedule(spec)
    sa = evolve(schedule, as_spin_state(spec.n, input_a))
    sb = evolve(schedule, as_spin_state(spec.n, input_b))

    pointer_dev = 0.0
    details = {}
    full = spec.sim_mode == "full"
    if full:
        uniform = DensityMatrix((4,), np.eye(4) / 4)
        for state in (sa, sb):
            for rid in schedule.readout_order:
                dev = reduced_density(state, [rid]).trace_distance(uniform)
                details[f"pointer:{rid}"] = max(details.get(f"pointer:{rid}", 0.0), dev)
                pointer_dev = max(pointer_dev, dev)

    remote = 0.0
    va, vb = _local_views(spec, sa), _local_views(spec, sb)
    for key in va:
        site = int(key.removeprefix("spin").removeprefix("site"))
        if site == r:
            continue
        dist = va[key].trace_distance(vb[key])
        details[f"remote:{key}"] = dist
        remote = max(remote, dist)
    ok = pointer_dev < VERIFY_TOL and remote < VERIFY_TOL
    return NoSignalingReport(pointer_dev, remote, ok, full, details)


def check_outcome_support(spec: ProtocolSpec, inputs) -> bool:
    return all(all(v in (0, 2) for v in b.d) for b in enumerate_protocol_branches(spec, inputs))


def cross_check_modes(spec: ProtocolSpec, inputs) -> float:
    """Largest disagreement between full and compact mode over difference classes.

    Per class, the larger of |p_full - p_compact| and the infidelity of the
    conditional spin states; a class present in one mode only counts as 1.
    """
    full = difference_classes(spec.with_mode("full"), inputs)
    compact = difference_classes(spec.with_mode("compact"), inputs)
    worst = 0.0
    for d in set(full) | set(compact):
        if d not in full or d not in compact:
            return 1.0
        worst = max(
            worst,
            abs(full[d].prob - compact[d].prob),
            1 - fidelity(full[d].spin_state, compact[d].spin_state),
        )
    return float(worst)


@dataclass
class OutcomeHistogram:
    counts: dict
    total: int
    seed: int
    expected: dict = field(default_factory=dict)
    chi2: float | None = None
    p_value: float | None = None
    # largest |count - N p| in units of the multinomial standard deviation
    max_sigma: float | None = None

    def within_sigma(self, k: float = 5.0) -> bool:
        return self.max_sigma is not None and self.max_sigma <= k


def outcome_statistics(spec: ProtocolSpec, inputs, trials: int, seed: int, enumerate_expected: bool = True) -> OutcomeHistogram:
    """Seeded histogram of sampled difference vectors for fixed inputs.

    The state at T does not depend on the random stream, so it is evolved once
    and all device readouts of all trials are drawn in one call from its joint
    Born distribution (the same law as reading the devices one by one).
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    spec.check_size()
    rng = np.random.default_rng(seed)
    schedule = build_schedule(spec)
    state = evolve(schedule, as_spin_state(spec.n, inputs))
    rows = state.amplitudes.reshape(2**spec.n, -1)
    probs = np.sum(np.abs(rows) ** 2, axis=0)
    draws = rng.choice(probs.size, size=trials, p=probs / probs.sum())
    dvec = _readout_differences(schedule)
    counts = Counter(tuple(int(v) for v in dvec[k]) for k in draws)
    hist = OutcomeHistogram(dict(sorted(counts.items())), trials, seed)
    if enumerate_expected:
        classes = difference_classes(spec, inputs)
        hist.expected = {d: c.prob for d, c in classes.items()}
        keys = sorted(set(hist.expected) | set(counts))
        obs = np.array([counts.get(d, 0) for d in keys], dtype=float)
        p = np.array([hist.expected.get(d, 0.0) for d in keys])
        if np.any((p <= ZERO_PROB) & (obs > 0)):
            hist.chi2, hist.p_value, hist.max_sigma = float("inf"), 0.0, float("inf")
        else:
            keep = p > ZERO_PROB
            if keep.sum() > 1:
                res = stats.chisquare(obs[keep], p[keep] * trials)
                hist.chi2, hist.p_value = float(res.statistic), float(res.pvalue)
            else:
                hist.chi2, hist.p_value = 0.0, 1.0
            sd = np.sqrt(trials * p[keep] * (1 - p[keep]))
            dev = np.abs(obs[keep] - trials * p[keep])
            sig = np.where(sd > 0, dev / np.where(sd > 0, sd, 1), np.where(dev > 0, np.inf, 0.0))
            hist.max_sigma = float(sig.max())
    return hist


@dataclass
class PairingCheck:
    name: str
    minuend: str
    subtrahend: str
    support_without_coupling: dict
    support: dict
    # max |P(combination = v) - P(spin-observable difference = +/-v)|
    spin_observable_mismatch: float
    deterministic: bool


def _combination_distribution(state: PureState, schedule, a: str, b: str) -> dict:
    n = schedule.spec.n
    rows = state.amplitudes.reshape(2**n, -1)
    probs = np.sum(np.abs(rows) ** 2, axis=0)
    probs = probs.reshape((4,) * len(schedule.readout_order))
    ia, ib = schedule.readout_order.index(a), schedule.readout_order.index(b)
    joint = probs.sum(axis=tuple(k for k in range(probs.ndim) if k not in (ia, ib)))
    if ia > ib:
        joint = joint.T
    out = {v: 0.0 for v in range(4)}
    for qa, qb in itertools.product(range(4), repeat=2):
        out[(qa - qb) % 4] += float(joint[qa, qb])
    return out


def check_difference_pairing(spec: ProtocolSpec, inputs) -> list[PairingCheck]:
    """Test which pointer combinations read out the crossed spin observables.

    A combination counts as deterministic when, with no spin coupling, it is
    sharply 0 (no device noise survives) and, with the couplings on, its
    distribution equals that of the spin-only difference sigma(t1) - sigma(t2)
    computed in compact mode. Checked for the pair (Q_j, Q'_{j+1}) of every
    link and for the alternative (Q'_k, Q_{k+1}) of every even link k < n.
    """
    full = spec.with_mode("full")
    full.check_size()
    schedule = build_schedule(full)
    spins = as_spin_state(spec.n, inputs)
    final = evolve(schedule, spins)
    baseline = initial_state(schedule, spins)
    compact = difference_classes(spec.with_mode("compact"), spins)
    n = spec.n

    def link_marginal(j):
        m = {v: 0.0 for v in range(4)}
        for d, c in compact.items():
            m[d[j - 1]] += c.prob
        return m

    combos = [(f"link {p.link}: Q{p.link} - Q'{p.primed[2:]}", p.unprimed, p.primed, p.link) for p in schedule.links]
    for k in range(2, n, 2):
        combos.append((f"link {k} alt: Q'{k} - Q{k + 1}", f"qp{k}", f"q{k + 1}", k))
    checks = []
    for name, a, b, link in combos:
        base = _combination_distribution(baseline, schedule, a, b)
        dist = _combination_distribution(final, schedule, a, b)
        ref = link_marginal(link)
        mismatch = min(
            max(abs(dist[v] - ref[v]) for v in range(4)),
            max(abs(dist[v] - ref[(-v) % 4]) for v in range(4)),
        )
        sharp = abs(base[0] - 1) < VERIFY_TOL
        checks.append(PairingCheck(name, a, b, base, dist, mismatch, sharp and mismatch < VERIFY_TOL))
    return checks


@dataclass
class KrausReport:
    fingerprint: dict
    unitarity: dict
    weights: dict
    zero_branch_overlap: float
    zero_branch_residual: dict

    @property
    def all_unitary(self) -> bool:
        return all(v < FIDELITY_TOL for v in self.unitarity.values())

    @property
    def zero_branch_completes(self) -> bool:
        return abs(self.zero_branch_overlap - 1) < FIDELITY_TOL


def pauli_decomposition(op: np.ndarray, n: int, tol: float = 1e-9) -> dict:
    """Non-negligible coefficients c_L of op = sum_L c_L L over n-qubit Pauli strings."""
    out = {}
    for labels in itertools.product(LABELS, repeat=n):
        c = np.trace(_label_matrix(labels).conj().T @ op) / 2**n
        if abs(c) > tol:
            out["".join(labels)] = complex(c)
    return out


def kraus_report(spec: ProtocolSpec) -> KrausReport:
    """Branch operators: unitarity per class and how the all-zero branch relates to the cycle.

    The residual is P^dag K_0 normalised to unit spectral scale and expanded in
    Pauli strings; a single 'I...I' term means K_0 is the cyclic permutation.
    """
    kraus = kraus_operators(spec)
    total = sum(np.real(np.trace(k.conj().T @ k)) for k in kraus.values())
    unit = {d: unitarity_deviation(k) for d, k in kraus.items()}
    weights = {d: float(np.real(np.trace(k.conj().T @ k)) / total) for d, k in kraus.items()}
    zero = (0,) * spec.n
    perm = cyclic_permutation_unitary(spec.n)
    k0 = kraus[zero]
    scale = np.sqrt(np.real(np.trace(k0.conj().T @ k0)) / 2**spec.n)
    residual = pauli_decomposition(perm.conj().T @ k0 / scale, spec.n)
    return KrausReport(spec.fingerprint(), unit, weights, channel_overlap(k0, perm), residual)
