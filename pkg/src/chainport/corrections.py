"""Per-site Pauli correction tables: brute-force derivation, validation, persistence.

Table file format (JSON, UTF-8, keys in the order shown)::

    {
      "format_version": 1,
      "fingerprint": {"n": 2, "family": "two-way-vaa", "end_link": "y"},
      "entries": [
        {"d": [0, 0], "labels": ["I", "I"]},
        {"d": [0, 2], "labels": ["X", "X"]},
        ...
      ]
    }

``d`` lists the link differences (each 0 or 2) for links 1..n; ``labels`` holds
one of I, X, Y, Z per site 1..n, applied after the branch. Entries are sorted
by ``d``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import FIDELITY_TOL
from .errors import ConfigError, NoPauliCorrection, ValidationFailure
from .hilbert import PAULI, PureState, fidelity
from .inputs import haar_joint_state, haar_qubit
from .protocol import (
    ProtocolSpec,
    apply_corrections,
    apply_cyclic_permutation,
    channel_overlap,
    cyclic_permutation_unitary,
    difference_classes,
    kraus_operators,
    spin_layout,
)

FORMAT_VERSION = 1
LABELS = ("I", "X", "Y", "Z")

_VALIDATION_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True)
class CorrectionTable:
    fingerprint: dict
    entries: dict = field(default_factory=dict)

    def labels_for(self, d: Sequence[int]) -> tuple[str, ...]:
        key = tuple(int(v) for v in d)
        try:
            return self.entries[key]
        except KeyError:
            raise KeyError(f"no correction entry for d={list(key)}") from None

    def check_spec(self, spec: ProtocolSpec) -> None:
        if self.fingerprint != spec.fingerprint():
            raise ConfigError(f"table fingerprint {self.fingerprint} does not match spec {spec.fingerprint()}")

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "fingerprint": {k: self.fingerprint[k] for k in ("n", "family", "end_link")},
            "entries": [{"d": list(d), "labels": list(lab)} for d, lab in sorted(self.entries.items())],
        }

    def dumps(self) -> str:
        data = self.to_dict()
        entries = ",\n".join("    " + json.dumps(e) for e in data["entries"])
        return (
            "{\n"
            f'  "format_version": {data["format_version"]},\n'
            f'  "fingerprint": {json.dumps(data["fingerprint"])},\n'
            f'  "entries": [\n{entries}\n  ]\n'
            "}\n"
        )

    @classmethod
    def from_dict(cls, data: dict) -> "CorrectionTable":
        if data.get("format_version") != FORMAT_VERSION:
            raise ConfigError(f"unsupported correction table version {data.get('format_version')!r}")
        fp = data["fingerprint"]
        fp = {"n": int(fp["n"]), "family": str(fp["family"]), "end_link": str(fp["end_link"])}
        entries = {}
        for rec in data["entries"]:
            d = tuple(int(v) for v in rec["d"])
            labels = tuple(rec["labels"])
            if len(d) != fp["n"] or len(labels) != fp["n"] or any(l not in LABELS for l in labels):
                raise ConfigError(f"malformed table entry {rec}")
            if d in entries:
                raise ConfigError(f"duplicate table entry for d={list(d)}")
            entries[d] = labels
        return cls(fp, entries)

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def read(cls, path) -> "CorrectionTable":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _label_matrix(labels: Sequence[str]) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for lab in labels:
        m = np.kron(m, PAULI[lab])
    return m


def best_pauli_correction(kraus: np.ndarray, n: int):
    """Scan all 4**n label vectors in I < X < Y < Z order.

    Returns (labels, overlap, labels) for the first vector making L K
    proportional to the cyclic permutation, else (None, best overlap, best labels).
    """
    target = cyclic_permutation_unitary(n)
    best, best_labels = -1.0, None
    for labels in itertools.product(LABELS, repeat=n):
        ov = channel_overlap(_label_matrix(labels) @ kraus, target)
        if ov >= 1 - FIDELITY_TOL:
            return labels, ov, labels
        if ov > best + 1e-12:
            best, best_labels = ov, labels
    return None, best, best_labels


def derive_table(spec: ProtocolSpec) -> CorrectionTable:
    """Find, for every reachable difference vector, the lexicographically first Pauli fix.

    Raises NoPauliCorrection for the first d (in sorted order) that has none.
    """
    kraus = kraus_operators(spec)
    entries = {}
    for d in sorted(kraus):
        found = best_pauli_correction(kraus[d], spec.n)
        if found[0] is None:
            raise NoPauliCorrection(d, found[1], "".join(found[2]))
        entries[d] = tuple(found[0])
    return CorrectionTable(spec.fingerprint(), entries)


@dataclass
class ValidationReport:
    fingerprint: dict
    checks: int
    worst_fidelity: float
    worst_d: tuple
    worst_input: str
    passed: bool
    failures: list = field(default_factory=list)


def validation_inputs(n: int, seed: int = 0, n_random_product: int = 20, n_random_entangled: int = 5):
    """Labelled inputs: {0, 1, +, +i}^n, seeded Haar product states, seeded Haar joint states."""
    for labels in itertools.product(_VALIDATION_STATES, repeat=n):
        yield "|" + ",".join(labels) + ">", [_VALIDATION_STATES[l] for l in labels]
    rng = np.random.default_rng(seed)
    for k in range(n_random_product):
        yield f"random-product[{k}]", [haar_qubit(rng) for _ in range(n)]
    for k in range(n_random_entangled):
        yield f"random-entangled[{k}]", haar_joint_state(n, rng)


def validate_table(spec: ProtocolSpec, table: CorrectionTable, seed: int = 0, raise_on_failure: bool = True) -> ValidationReport:
    """Simulate every validation input, correct every branch class, compare with the target."""
    table.check_spec(spec)
    worst = (2.0, None, None)
    failures = []
    checks = 0
    for label, inp in validation_inputs(spec.n, seed):
        classes = difference_classes(spec, inp)
        if isinstance(inp, np.ndarray):
            spins = PureState(spin_layout(spec.n), inp)
        else:
            spins = PureState(spin_layout(spec.n), _kron_all(inp))
        target = apply_cyclic_permutation(spins)
        for d, cls in classes.items():
            checks += 1
            if d not in table.entries:
                f = 0.0
            else:
                f = fidelity(apply_corrections(cls.spin_state, table.labels_for(d)), target)
            if f < worst[0]:
                worst = (f, d, label)
            if f < 1 - FIDELITY_TOL:
                failures.append((d, label, f))
    report = ValidationReport(
        spec.fingerprint(), checks, float(worst[0]), tuple(worst[1] or ()), worst[2] or "", not failures, failures
    )
    if failures and raise_on_failure:
        raise ValidationFailure(*failures[0])
    return report


def _kron_all(vectors) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        out = np.kron(out, v / np.linalg.norm(v))
    return out
