import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainport.hilbert import (
    SIGMA,
    DensityMatrix,
    LocalUnitary,
    PureState,
    RegisterLayout,
    apply_controlled_shift,
    apply_local,
    basis_state,
    enumerate_branches,
    fidelity,
    measure_register,
    product_state,
    reduced_density,
    shift_matrix,
)

import oracles

SPIN = RegisterLayout.of(("a", "spin"))
TWO_SPINS = RegisterLayout.of(("a", "spin"), ("b", "spin"))
SPIN_PTR = RegisterLayout.of(("s", "spin"), ("p", "pointer"))
PLUS = np.array([1, 1]) / np.sqrt(2)
MINUS = np.array([1, -1]) / np.sqrt(2)


def e(k, dim):
    v = np.zeros(dim, dtype=complex)
    v[k] = 1
    return v


# -- layout / construction --------------------------------------------------------


def test_layout_rejects_duplicates_and_bad_dims():
    with pytest.raises(ValueError):
        RegisterLayout.of(("a", "spin"), ("a", "pointer"))
    from chainport.hilbert import Register

    with pytest.raises(ValueError):
        RegisterLayout((Register("a", 4, "spin"),))
    assert SPIN_PTR.total_dim == 8


def test_product_state_examples():
    assert np.allclose(product_state(SPIN, [[1, 0]]).amplitudes, [1, 0])
    assert np.allclose(product_state(TWO_SPINS, [[1, 0], [0, 1]]).amplitudes, [0, 1, 0, 0])
    s = product_state(SPIN_PTR, [[1, 0], np.ones(4) / 2])
    assert np.allclose(s.amplitudes, [0.5] * 4 + [0] * 4)


def test_product_state_renormalises_and_rejects():
    s = product_state(SPIN, [[3, 4]])
    assert s.norm == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        product_state(SPIN, [[0, 0]])
    with pytest.raises(ValueError):
        product_state(SPIN, [[1, 0, 0]])


def test_state_is_immutable():
    s = product_state(SPIN, [[1, 0]])
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2


# -- local unitaries ----------------------------------------------------------------


def test_apply_local_examples():
    s = apply_local(product_state(SPIN, [[1, 0]]), LocalUnitary(SIGMA["x"], "a"))
    assert np.allclose(s.amplitudes, [0, 1])
    s0 = product_state(SPIN_PTR, [PLUS, [0.1, 0.2, 0.3, 0.4]])
    assert np.allclose(apply_local(s0, LocalUnitary(np.eye(4), "p")).amplitudes, s0.amplitudes)
    s3 = basis_state(SPIN_PTR, [0, 3])
    assert np.allclose(apply_local(s3, LocalUnitary(shift_matrix(1), "p")).amplitudes, basis_state(SPIN_PTR, [0, 0]).amplitudes)


def test_apply_local_errors():
    s = product_state(SPIN, [[1, 0]])
    with pytest.raises(KeyError):
        apply_local(s, LocalUnitary(SIGMA["x"], "nope"))
    with pytest.raises(ValueError):
        LocalUnitary(np.array([[1, 1], [0, 1]]), "a")
    with pytest.raises(ValueError):
        apply_local(s, LocalUnitary(np.eye(4), "a"))


# -- controlled shift ---------------------------------------------------------------


@pytest.mark.parametrize(
    "axis, spin, ptr, expected_spin, expected_ptr",
    [
        ("z", [1, 0], 1, [1, 0], 2),
        ("z", [0, 1], 1, [0, 1], 0),
        ("x", PLUS, 0, PLUS, 1),
    ],
)
def test_controlled_shift_eigenstates(axis, spin, ptr, expected_spin, expected_ptr):
    s = product_state(SPIN_PTR, [spin, e(ptr, 4)])
    out = apply_controlled_shift(s, "s", axis, "p", 1)
    want = product_state(SPIN_PTR, [expected_spin, e(expected_ptr, 4)])
    assert fidelity(out, want) == pytest.approx(1, abs=1e-12)


def test_controlled_shift_x_on_zero_matches_matrix_oracle():
    s = basis_state(SPIN_PTR, [0, 0])
    out = apply_controlled_shift(s, "s", "x", "p", 1)
    by_matrix = oracles.controlled_shift_matrix("x") @ s.amplitudes
    expected = (np.kron(PLUS, e(1, 4)) + np.kron(MINUS, e(3, 4))) / np.sqrt(2)
    assert np.allclose(by_matrix, expected, atol=1e-12)
    assert np.allclose(out.amplitudes, expected, atol=1e-12)


@pytest.mark.parametrize("axis", ["x", "y", "z"])
@pytest.mark.parametrize("steps", [1, 2, 3, -1])
def test_controlled_shift_equals_rotated_controlled_shift(axis, steps):
    oracle = oracles.controlled_shift_matrix(axis, steps)
    cols = [apply_controlled_shift(basis_state(SPIN_PTR, [b // 4, b % 4]), "s", axis, "p", steps).amplitudes for b in range(8)]
    assert np.allclose(np.array(cols).T, oracle, atol=1e-12)


@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_controlled_shift_unitary_on_full_space(axis):
    layout = RegisterLayout.of(("s1", "spin"), ("s2", "spin"), ("p", "pointer"), ("q", "pointer"))
    dim = layout.total_dim  # 64
    cols = []
    for b in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[b] = 1
        cols.append(apply_controlled_shift(PureState(layout, v), "s2", axis, "q", 1).amplitudes)
    u = np.array(cols).T
    assert np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-12)


def test_controlled_shift_role_errors():
    s = basis_state(SPIN_PTR, [0, 0])
    with pytest.raises(ValueError):
        apply_controlled_shift(s, "p", "x", "s", 1)
    with pytest.raises(ValueError):
        apply_controlled_shift(basis_state(TWO_SPINS, [0, 0]), "a", "x", "b", 1)


# -- properties ---------------------------------------------------------------------

LAYOUT4 = RegisterLayout.of(("s1", "spin"), ("s2", "spin"), ("p1", "pointer"), ("p2", "pointer"))
ops = st.lists(
    st.tuples(st.sampled_from(["s1", "s2"]), st.sampled_from(["x", "y", "z"]), st.sampled_from(["p1", "p2"]), st.integers(-3, 3)),
    min_size=1,
    max_size=8,
)


def random_state(seed, layout=LAYOUT4):
    r = np.random.default_rng(seed)
    return PureState(layout, oracles.haar(r, layout.total_dim))


@given(seed=st.integers(0, 2**32 - 1), seq=ops)
def test_norm_preserved_under_any_sequence(seed, seq):
    s = random_state(seed)
    for spin, axis, ptr, steps in seq:
        s = apply_controlled_shift(s, spin, axis, ptr, steps)
        s = apply_local(s, LocalUnitary(SIGMA[axis], spin))
    assert abs(s.norm - 1) < 1e-10


@given(seed=st.integers(0, 2**32 - 1), a1=st.sampled_from("xyz"), a2=st.sampled_from("xyz"), k1=st.integers(-3, 3), k2=st.integers(-3, 3))
def test_disjoint_controlled_shifts_commute(seed, a1, a2, k1, k2):
    s = random_state(seed)
    ab = apply_controlled_shift(apply_controlled_shift(s, "s1", a1, "p1", k1), "s2", a2, "p2", k2)
    ba = apply_controlled_shift(apply_controlled_shift(s, "s2", a2, "p2", k2), "s1", a1, "p1", k1)
    assert np.allclose(ab.amplitudes, ba.amplitudes, atol=1e-12)


# -- measurement --------------------------------------------------------------------


def test_measure_eigenstate(rng):
    out, p, post = measure_register(product_state(SPIN, [[0, 1]]), "a", rng)
    assert (out, p) == (1, pytest.approx(1.0))
    assert np.allclose(post.amplitudes, [0, 1])


def test_measure_pointer_superposition(rng):
    layout = RegisterLayout.of(("p", "pointer"))
    s = product_state(layout, [[1, 0, 1, 0]])
    seen = set()
    for _ in range(50):
        out, p, post = measure_register(s, "p", rng)
        assert out in (0, 2) and p == pytest.approx(0.5)
        assert abs(post.norm - 1) < 1e-12
        seen.add(out)
    assert seen == {0, 2}


def test_measure_plus_in_computational_basis(rng):
    outs = [measure_register(product_state(SPIN, [PLUS]), "a", rng)[:2] for _ in range(40)]
    assert {o for o, _ in outs} == {0, 1}
    assert all(p == pytest.approx(0.5) for _, p in outs)


def test_measure_zero_state_errors(rng):
    with pytest.raises(ValueError):
        measure_register(PureState(SPIN, [0, 0]), "a", rng)


def test_enumerate_branches_examples():
    b = enumerate_branches(product_state(SPIN, [PLUS]), ["a"])
    assert [o for o, _, _ in b] == [(0,), (1,)]
    assert [p for _, p, _ in b] == pytest.approx([0.5, 0.5])
    b = enumerate_branches(basis_state(TWO_SPINS, [0, 0]), ["a", "b"])
    assert len(b) == 1 and b[0][1] == pytest.approx(1)
    with pytest.raises(ValueError):
        enumerate_branches(basis_state(TWO_SPINS, [0, 0]), ["a", "a"])


@given(seed=st.integers(0, 2**32 - 1))
def test_enumerate_branches_sum_and_normalisation(seed):
    s = random_state(seed)
    branches = enumerate_branches(s, ["p1", "s2"])
    assert sum(p for _, p, _ in branches) == pytest.approx(1, abs=1e-10)
    for _, _, cond in branches:
        assert abs(cond.norm - 1) < 1e-12
        assert cond.layout.ids == ("s1", "p2")


def test_enumeration_matches_sampling_frequencies():
    s = random_state(7)
    branches = enumerate_branches(s, ["p1"])
    expected = {o[0]: p for o, p, _ in branches}
    r = np.random.default_rng(11)
    trials = 10_000
    counts = np.zeros(4)
    for _ in range(trials):
        counts[measure_register(s, "p1", r)[0]] += 1
    for k in range(4):
        p = expected.get(k, 0.0)
        assert abs(counts[k] - trials * p) <= 5 * np.sqrt(trials * p * (1 - p)) + 1e-9


# -- reduced states / fidelity ------------------------------------------------------


def test_reduced_density_examples():
    s = product_state(TWO_SPINS, [PLUS, [0, 1]])
    rho = reduced_density(s, ["a"])
    assert np.allclose(rho.matrix, np.outer(PLUS, PLUS))
    bell = PureState(TWO_SPINS, np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(reduced_density(bell, ["a"]).matrix, np.eye(2) / 2)
    pp = RegisterLayout.of(("p", "pointer"), ("q", "pointer-primed"))
    epr = PureState(pp, sum(np.kron(e(q, 4), e(q, 4)) for q in range(4)) / 2)
    assert np.allclose(reduced_density(epr, ["q"]).matrix, np.eye(4) / 4)
    with pytest.raises(ValueError):
        reduced_density(bell, [])


@given(seed=st.integers(0, 2**32 - 1))
def test_reduced_density_is_a_state(seed):
    rho = reduced_density(random_state(seed), ["s2", "p1"]).matrix
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_fidelity_examples():
    a = product_state(SPIN, [[1, 0]])
    assert fidelity(a, a) == pytest.approx(1)
    assert fidelity(a, product_state(SPIN, [[0, 1]])) == pytest.approx(0)
    assert fidelity(a, product_state(SPIN, [PLUS])) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fidelity(a, basis_state(TWO_SPINS, [0, 0]))


def test_trace_distance():
    a = DensityMatrix((2,), np.diag([1, 0]))
    b = DensityMatrix((2,), np.diag([0, 1]))
    assert a.trace_distance(b) == pytest.approx(1)
    assert a.trace_distance(a) == pytest.approx(0)
