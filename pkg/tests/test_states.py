from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualcnot.errors import CPTPError, DomainError, LabelError, ShapeError, UnitarityError
from dualcnot.linalg import partial_trace
from dualcnot.metrics import concurrence
from dualcnot.noise import GadmParams, gadm_kraus
from dualcnot.protocol import initial_register, ProtocolConfig
from dualcnot.states import (
    QubitParams,
    Register,
    apply_channel,
    apply_gate,
    basis_ket,
    bell_phi_plus,
    controlled,
    gate,
    measure,
    prepare_qubit,
    project,
)

angles = st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_prepare_qubit_examples():
    assert np.allclose(prepare_qubit(QubitParams(0, 0)), [1, 0])
    one = prepare_qubit(QubitParams(math.pi, 1.0))
    assert abs(one[0]) < 1e-16 and np.isclose(one[1], np.exp(1j))
    assert np.allclose(prepare_qubit(QubitParams(math.pi / 2, 0)), [1 / math.sqrt(2), 1 / math.sqrt(2)])


@pytest.mark.parametrize("theta,phi", [(-0.1, 0), (3.2, 0), (0, -0.1), (0, 6.3), (float("nan"), 0)])
def test_qubit_params_reject_out_of_range(theta, phi):
    with pytest.raises(DomainError):
        QubitParams(theta, phi)


def test_qubit_params_clamp_round_off():
    q = QubitParams(math.pi + 1e-13, -1e-13)
    assert q.theta == math.pi and q.phi == 0.0


@given(angles)
def test_prepare_qubit_unit_norm(a):
    assert abs(np.linalg.norm(prepare_qubit(QubitParams(*a))) - 1) <= 1e-12


def test_bell_state():
    phi = bell_phi_plus()
    assert np.allclose(phi, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
    rho = np.outer(phi, phi.conj())
    assert np.allclose(partial_trace(rho, [0], 2), np.eye(2) / 2)
    assert np.allclose(partial_trace(rho, [1], 2), np.eye(2) / 2)
    assert abs(concurrence(rho) - 1) <= 1e-12


def test_cnot_truth_table():
    cnot = gate("CNOT")
    assert np.array_equal(cnot @ basis_ket("10"), basis_ket("11"))
    assert np.array_equal(cnot @ basis_ket("11"), basis_ket("10"))
    for w in "01":
        assert np.array_equal(cnot @ basis_ket("0" + w), basis_ket("0" + w))


def test_toffoli_truth_table():
    t = gate("TOFFOLI")
    assert np.array_equal(t @ basis_ket("110"), basis_ket("111"))
    assert np.array_equal(t @ basis_ket("010"), basis_ket("010"))
    assert np.array_equal(t @ basis_ket("100"), basis_ket("100"))


@pytest.mark.parametrize("name", ["I", "X", "Y", "Z", "H", "CNOT", "CZ", "TOFFOLI", "cnot"])
def test_gates_unitary(name):
    g = gate(name)
    assert np.max(np.abs(g.conj().T @ g - np.eye(g.shape[0]))) <= 1e-12


def test_gate_returns_copy_and_rejects_unknown():
    g = gate("X")
    g[0, 0] = 5
    assert gate("X")[0, 0] == 0
    with pytest.raises(LabelError):
        gate("SWAP")


def test_controlled_fires_on_given_values():
    c = controlled(gate("X"), (0, 1))
    assert np.array_equal(c @ basis_ket("010"), basis_ket("011"))
    assert np.array_equal(c @ basis_ket("110"), basis_ket("110"))


def test_apply_gate_examples():
    reg = Register(("q",), basis_ket("0"))
    assert np.allclose(apply_gate(reg, gate("X"), ["q"]).state, basis_ket("1"))
    reg = Register(("Psi_A", "BellA"), basis_ket("10"))
    assert np.allclose(apply_gate(reg, gate("CNOT"), ["Psi_A", "BellA"]).state, basis_ket("11"))
    # control on the less significant qubit
    reg = Register(("Psi_A", "BellA"), basis_ket("01"))
    assert np.allclose(apply_gate(reg, gate("CNOT"), ["BellA", "Psi_A"]).state, basis_ket("11"))


def test_apply_gate_errors():
    reg = Register(("a", "b"), basis_ket("00"))
    with pytest.raises(UnitarityError):
        apply_gate(reg, np.diag([1.0, 2.0]), ["a"])
    with pytest.raises(LabelError):
        apply_gate(reg, gate("X"), ["c"])
    with pytest.raises(LabelError):
        apply_gate(reg, gate("CNOT"), ["a", "a"])
    with pytest.raises(LabelError):
        apply_gate(reg, gate("CNOT"), ["a"])


def test_register_validation():
    with pytest.raises(LabelError):
        Register(("a", "a"), basis_ket("00"))
    with pytest.raises(ShapeError):
        Register(("a",), basis_ket("00"))
    with pytest.raises(ShapeError):
        Register(("a",), np.zeros((2, 2, 2)))


def _random_register(rng, n, mixed=False):
    labels = tuple(f"q{i}" for i in range(n))
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    v /= np.linalg.norm(v)
    reg = Register(labels, v)
    return reg.as_mixed() if mixed else reg


def _random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@settings(max_examples=30, deadline=None)
@given(seeds, st.booleans())
def test_apply_gate_preserves_norm_and_hermiticity(seed, mixed):
    rng = np.random.default_rng(seed)
    reg = _random_register(rng, 4, mixed)
    targets = list(rng.permutation(reg.labels)[:2])
    out = apply_gate(reg, _random_unitary(rng, 4), targets)
    assert out.norm_error() <= 1e-12
    if mixed:
        assert np.max(np.abs(out.state - out.state.conj().T)) <= 1e-12


def test_apply_gate_agrees_on_ket_and_density():
    rng = np.random.default_rng(11)
    reg = _random_register(rng, 3)
    u = _random_unitary(rng, 4)
    a = apply_gate(reg, u, ["q2", "q0"])
    b = apply_gate(reg.as_mixed(), u, ["q2", "q0"])
    assert np.allclose(a.density_matrix(), b.state, atol=1e-14)


def test_step_one_entangles_control_into_bell_pair():
    a, b = QubitParams(1.1, 0.3), QubitParams(2.2, 1.7)
    reg = initial_register(ProtocolConfig(a, b, QubitParams.one()))
    out = apply_gate(reg, gate("TOFFOLI"), ["Qaux", "Psi_A", "BellA"])
    alpha, beta = prepare_qubit(a)
    gamma, delta = prepare_qubit(b)
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)  # |00> + |11>
    psi = np.array([0, 1, 1, 0]) / math.sqrt(2)  # |10> + |01>
    one, zero = basis_ket("1"), basis_ket("0")
    expected = 0
    for ca, ka, pair in ((alpha, zero, phi), (beta, one, psi)):
        for cb, kb in ((gamma, zero), (delta, one)):
            parts = [one, zero, ka, pair, kb, zero]
            v = parts[0]
            for p in parts[1:]:
                v = np.kron(v, p)
            expected = expected + ca * cb * v
    assert np.allclose(out.state, expected, atol=1e-15)


def test_measure_plus_state():
    plus = Register(("q",), np.array([1, 1]) / math.sqrt(2))
    m0, m1 = measure(plus, "q")
    assert math.isclose(m0.probability, 0.5) and math.isclose(m1.probability, 0.5)
    assert np.allclose(m0.collapsed.state, basis_ket("0"))


def test_measure_zero_state_flags_impossible():
    m0, m1 = measure(Register(("q",), basis_ket("0")), "q")
    assert m0.probability == 1.0 and not m0.impossible
    assert m1.probability == 0.0 and m1.impossible and m1.collapsed is None


def test_storage_measurement_branches():
    a, b = QubitParams(0.9, 0.4), QubitParams(1.9, 2.5)
    reg = initial_register(ProtocolConfig(a, b, QubitParams.one()))
    reg = apply_gate(reg, gate("TOFFOLI"), ["Qaux", "Psi_A", "BellA"])
    reg = apply_gate(reg, gate("TOFFOLI"), ["BellA", "Qaux", "RA"])
    m0, m1 = measure(reg, "RA")
    assert math.isclose(m0.probability, 0.5, abs_tol=1e-14)
    assert math.isclose(m1.probability, 0.5, abs_tol=1e-14)
    coeff = np.kron(prepare_qubit(a), prepare_qubit(b)).reshape(2, 2)
    for m in (m0, m1):
        t = m.collapsed.state.reshape((2,) * 7)
        for x in (0, 1):
            for y in (0, 1):
                # Bell qubit B holds Psi_A on outcome 0 and its complement on outcome 1
                bell_b = x ^ m.result
                amp = t[1, m.result, x, m.result, bell_b, y, 0]
                assert np.isclose(amp, coeff[x, y], atol=1e-14)
        assert math.isclose(np.linalg.norm(t), 1.0, abs_tol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seeds, st.booleans())
def test_measure_probabilities_and_repeatability(seed, mixed):
    rng = np.random.default_rng(seed)
    reg = _random_register(rng, 3, mixed)
    m0, m1 = measure(reg, "q1")
    assert abs(m0.probability + m1.probability - 1) <= 1e-12
    for m in (m0, m1):
        if m.impossible:
            continue
        again = project(m.collapsed, "q1", m.result)[0]
        assert abs(again - 1) <= 1e-12


def test_apply_channel_identity_and_noiseless_gad():
    rng = np.random.default_rng(3)
    reg = _random_register(rng, 2, mixed=True)
    assert np.allclose(apply_channel(reg, [np.eye(2)], ["q0"]).state, reg.state)
    same = apply_channel(reg, gadm_kraus(GadmParams(0.0, 0.37)), ["q1"])
    assert np.allclose(same.state, reg.state, atol=1e-15)


def test_apply_channel_rejects_incomplete():
    reg = Register(("q",), basis_ket("0"))
    with pytest.raises(CPTPError):
        apply_channel(reg, [0.5 * np.eye(2)], ["q"])
    with pytest.raises(CPTPError):
        apply_channel(reg, [], ["q"])


def _random_kraus(rng, d, k):
    v, _ = np.linalg.qr(rng.normal(size=(d * k, d)) + 1j * rng.normal(size=(d * k, d)))
    return [v[i * d : (i + 1) * d] for i in range(k)]


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=4))
def test_apply_channel_preserves_trace_and_positivity(seed, k):
    rng = np.random.default_rng(seed)
    reg = _random_register(rng, 3, mixed=True)
    out = apply_channel(reg, _random_kraus(rng, 4, k), ["q2", "q0"])
    assert abs(np.trace(out.state) - 1) <= 1e-12
    assert np.linalg.eigvalsh(out.state).min() >= -1e-10


def test_register_product_and_reduced():
    reg = Register.product([("a", basis_ket("1")), (("b", "c"), bell_phi_plus())])
    assert reg.labels == ("a", "b", "c")
    assert np.allclose(reg.reduced(["a"]), np.diag([0, 1]))
    assert np.allclose(reg.reduced(["c"]), np.eye(2) / 2)
    mixed = Register.product([("a", np.eye(2) / 2), ("b", basis_ket("0"))])
    assert not mixed.is_pure and np.allclose(mixed.reduced(["b"]), np.diag([1, 0]))
