import math

import numpy as np
import pytest

from sqem.core import (
    QUASI,
    CheckInfeasibleError,
    Circuit,
    Distribution,
    EmptyPostSelectionError,
    Gate,
    ValidationError,
    parse_circuit,
)
from sqem.pcs import CheckPair, build_z_check, check_residual, frame_gates, post_select, verify_check_condition, wrap
from sqem.sim import NoiseModel, exact_probabilities, execute_exact
from sqem.vqe import AnsatzSpec, ParameterSet, build_ansatz

from oracles import oracle_condition, oracle_probabilities, random_circuit

ANSATZ = build_ansatz(AnsatzSpec(3), ParameterSet(np.linspace(0.1, 1.2, 12)), "100")


# ---------------------------------------------------------------- construction


def test_entangler_admits_plain_z_checks():
    n = 4
    cascade = Circuit(n, tuple(Gate("cz", (q, q + 1)) for q in range(n - 1)))
    for k in range(n):
        pair = build_z_check(cascade, k)
        assert pair.left == (Gate("z", (k,)),) == pair.right
        assert verify_check_condition(cascade, pair)


def test_full_ansatz_needs_frame():
    with pytest.raises(CheckInfeasibleError):
        build_z_check(ANSATZ, 0)
    for k in range(3):
        pair = build_z_check(ANSATZ, k, frame="auto")
        assert verify_check_condition(ANSATZ, pair)


def test_noncommuting_gate_is_named():
    with pytest.raises(CheckInfeasibleError, match="gate 0"):
        build_z_check(Circuit(1, (Gate("h", (0,)),)), 0)
    c = parse_circuit("qubits 2\nH q0\nCX q0,q1\nRX(0.3) q0\nCZ q0,q1\nH q0\nmeasure all\n")
    with pytest.raises(CheckInfeasibleError, match="gate 2"):
        build_z_check(c, 0, frame="auto")


def test_empty_circuit_check():
    pair = build_z_check(Circuit(1, ()), 0)
    assert verify_check_condition(Circuit(1, ()), pair)


def test_explicit_frame_is_verified():
    c = parse_circuit("qubits 1\nH q0\nRZ(0.4) q0\nH q0\nmeasure all\n")
    lead, trail = (Gate("h", (0,)),), (Gate("h", (0,)),)
    assert verify_check_condition(c, build_z_check(c, 0, frame=(lead, trail)))
    with pytest.raises(CheckInfeasibleError):
        build_z_check(c, 0, frame=((), trail))


def test_frame_gates_split():
    c = parse_circuit("qubits 2\nRY(0.1) q0\nRZ(0.2) q0\nCZ q0,q1\nRY(0.3) q0\nmeasure all\n")
    assert frame_gates(c, 0) == ([0, 1], [3])
    assert frame_gates(c, 1) == ([], [])


# ---------------------------------------------------------------- check condition


def test_check_condition_examples():
    z0 = CheckPair(0, (Gate("z", (0,)),), (Gate("z", (0,)),))
    assert verify_check_condition(Circuit(2, (Gate("cz", (0, 1)),)), z0)
    assert not verify_check_condition(Circuit(2, (Gate("rx", (0,), (0.3,)),)), z0)
    assert verify_check_condition(Circuit(2, ()), z0)


def test_check_condition_agrees_with_dense_oracle(rng):
    disagreements = 0
    for i in range(100):
        n = int(rng.integers(1, 4))
        c = random_circuit(rng, n, int(rng.integers(0, 7)), one_q=("rz", "z", "s", "rx", "h", "ry"))
        k = int(rng.integers(n))
        if i % 2 == 0:
            try:
                pair = build_z_check(c, k, frame="auto")
            except CheckInfeasibleError:
                pair = CheckPair(k, (Gate("z", (k,)),), (Gate("z", (k,)),))
        else:
            kinds = ("rx", "ry", "rz", "h", "s", "z")
            left = []
            for kind in rng.choice(kinds, 2):
                params = (float(rng.uniform(-3, 3)),) if kind.startswith("r") else ()
                left.append(Gate(str(kind), (k,), params))
            left = tuple(left)
            pair = CheckPair(k, left, tuple(g.inverse() for g in reversed(left)))
        disagreements += verify_check_condition(c, pair) != oracle_condition(c, pair)
    assert disagreements == 0


# ---------------------------------------------------------------- wrapping


def test_wrap_identity_layout():
    s = wrap(Circuit(1, ()), [build_z_check(Circuit(1, ()), 0)])
    assert s.circuit.gates == (Gate("h", (1,)), Gate("cz", (1, 0)), Gate("cz", (1, 0)), Gate("h", (1,)))
    assert s.ancilla_bits == (1,) and s.compute_bits == (0,)


def test_wrap_orders_pairs_and_appends_ancillas():
    c = Circuit(3, tuple(Gate("cz", (q, q + 1)) for q in range(2)))
    pairs = [build_z_check(c, k) for k in range(3)]
    s = wrap(c, pairs)
    assert s.circuit.num_qubits == 6 and s.ancilla_bits == (3, 4, 5)
    # pair 1 innermost: its left check is applied last before U, its right check first after U
    assert s.left_blocks[0][0] > s.left_blocks[2][0]
    assert s.right_blocks[0][0] < s.right_blocks[2][0]
    with pytest.raises(ValidationError):
        wrap(c, [CheckPair(0, (), (), ancilla=3), CheckPair(1, (), (), ancilla=3)])


def test_noiseless_sandwich_never_flags(rng):
    for _ in range(15):
        n = int(rng.integers(1, 4))
        c = random_circuit(rng, n, 6, one_q=("rz", "ry", "rx", "h", "s"), two_q=("cz",))
        pairs = []
        for k in range(n):
            try:
                pairs.append(build_z_check(c, k, frame="auto"))
                break
            except CheckInfeasibleError:
                continue
        if not pairs:
            continue
        s = wrap(c, pairs)
        d = execute_exact(s.circuit).distribution
        assert math.isclose(post_select(d, s.ancilla_bits).retained_fraction, 1.0, abs_tol=1e-9)


def test_general_frame_uses_controlled_unitary():
    c = parse_circuit("qubits 1\nRY(0.4) q0\nRZ(0.3) q0\nmeasure all\n")
    pair = CheckPair(0, (Gate("ry", (0,), (0.7,)), Gate("z", (0,))), (Gate("x", (0,)),))
    kinds = [g.kind for g in wrap(c, [pair]).circuit.gates]
    assert kinds.count("cu") == 2 and kinds.count("cz") == 0


# ---------------------------------------------------------------- post-selection


def test_post_select_arithmetic():
    d = Distribution(2, {"00": 0.5, "01": 0.3, "10": 0.2})
    r = post_select(d, [1])
    assert math.isclose(r.retained_fraction, 0.7)
    assert math.isclose(r.distribution["0"], 0.5 / 0.7) and math.isclose(r.distribution["1"], 0.2 / 0.7)


def test_post_select_trivial_and_empty():
    d = Distribution(2, {"00": 0.25, "10": 0.75})
    r = post_select(d, [1])
    assert r.retained_fraction == 1.0 and dict(r.distribution.table) == {"0": 0.25, "1": 0.75}
    with pytest.raises(EmptyPostSelectionError):
        post_select(Distribution(2, {"01": 1.0}), [1])


def test_post_select_clips_after_restriction():
    d = Distribution(2, {"00": 0.8, "10": -0.1, "01": 0.3}, QUASI)
    r = post_select(d, [1])
    assert math.isclose(r.retained_fraction, 0.7)
    assert math.isclose(r.clipped_mass, 0.1)
    assert dict(r.distribution.table) == {"0": 1.0}


# ---------------------------------------------------------------- error removal


def diagonal_on_first_qubit(rng, n, depth):
    """Random circuit that touches qubit 0 only with diagonal phase gates."""
    gates = []
    for _ in range(depth):
        r = rng.random()
        if r < 0.15:
            gates.append(Gate("rz", (0,), (float(rng.uniform(-3, 3)),)))
        elif r < 0.3:
            gates.append(Gate(str(rng.choice(["s", "z"])), (0,)))
        elif r < 0.5:
            gates.append(Gate("cx", (1, 2)))
        else:
            gates.append(Gate(str(rng.choice(["ry", "rx"])), (int(rng.integers(1, n)),), (float(rng.uniform(-3, 3)),)))
    return Circuit(n, tuple(gates), None, ("+",) + ("0",) * (n - 1))


def noisy_sandwich(c, k, noise, frame=None, u_gates=None):
    """Post-selected sandwich with noise on U's gates (all of them by default)."""
    s = wrap(c, [build_z_check(c, k, frame=frame)])
    lo, hi = s.left_blocks[0][1], s.right_blocks[0][0]
    noisy = range(lo, hi) if u_gates is None else [lo + i for i in u_gates]
    probs = exact_probabilities(s.circuit, noise, noisy_gates=noisy)
    d = Distribution.from_dense(probs, s.circuit.num_measured)
    return post_select(d, s.ancilla_bits)


@pytest.mark.parametrize("p", [0.05, 0.2, 0.5])
def test_xy_noise_removed_on_identity_equivalent_qubit(rng, p):
    # every gate on qubit 0 is followed by an X/Y channel; products of several
    # errors reduce to Z on qubit 0, which a Z-basis readout cannot see
    noise = NoiseModel(0.0, 0.0, per_qubit_pauli=((0, (p / 2, p / 2, 0.0)),))
    for _ in range(5):
        c = diagonal_on_first_qubit(rng, 3, 10)
        r = noisy_sandwich(c, 0, noise)
        assert np.max(np.abs(r.distribution.to_dense() - oracle_probabilities(c))) < 1e-9


@pytest.mark.parametrize("p", [0.05, 0.2, 0.5])
def test_single_xy_channel_removed_in_random_circuits(rng, p):
    noise = NoiseModel(0.0, 0.0, per_qubit_pauli=((0, (p / 4, 3 * p / 4, 0.0)),))
    done = 0
    while done < 6:
        c = random_circuit(rng, 3, 9, one_q=("rz", "ry", "rx", "h", "s"), two_q=("cz", "cx"))
        try:
            s = wrap(c, [build_z_check(c, 0, frame="auto")])
        except CheckInfeasibleError:
            continue
        lead, trail = frame_gates(c, 0)
        offset = s.left_blocks[0][1]
        core_on_0 = [offset + i for i in c.gates_on(0) if i not in lead and i not in trail]
        if not core_on_0:
            continue
        probs = exact_probabilities(s.circuit, noise, noisy_gates=[core_on_0[0]])
        r = post_select(Distribution.from_dense(probs, 4), s.ancilla_bits)
        assert np.max(np.abs(r.distribution.to_dense() - oracle_probabilities(c))) < 1e-9
        assert math.isclose(r.retained_fraction, 1 - p, abs_tol=1e-12)
        done += 1


@pytest.mark.parametrize("p", [0.05, 0.2, 0.5])
def test_single_xy_location_removed_with_frames(p):
    c = parse_circuit("qubits 2\nRY(0.7) q0\nH q1\nCZ q0,q1\nRY(-0.4) q0\nmeasure all\n")
    s = wrap(c, [build_z_check(c, 0, frame="auto")])
    cz = next(i for i, g in enumerate(s.circuit.gates) if g == Gate("cz", (0, 1)))
    noise = NoiseModel(0.0, 0.0, per_qubit_pauli=((0, (p / 3, 2 * p / 3, 0.0)),))
    probs = exact_probabilities(s.circuit, noise, noisy_gates=[cz])
    r = post_select(Distribution.from_dense(probs, 3), s.ancilla_bits)
    assert np.max(np.abs(r.distribution.to_dense() - oracle_probabilities(c))) < 1e-9
    assert math.isclose(r.retained_fraction, 1 - p, abs_tol=1e-12)


@pytest.mark.parametrize("pz", [0.05, 0.2, 0.5])
def test_z_noise_untouched(pz):
    c = parse_circuit("qubits 2\nRY(0.4) q1\nH q0\nCZ q0,q1\nRZ(0.3) q0\nCZ q0,q1\nH q0\nmeasure all\n")
    noise = NoiseModel(0.0, 0.0, per_qubit_pauli=((0, (0.0, 0.0, pz)),))
    # the H frames are noiseless on both sides: a Z error outside the core is
    # not a Z error in the check's frame
    core = [2, 3, 4]
    r = noisy_sandwich(c, 0, noise, frame="auto", u_gates=core)
    unmitigated = exact_probabilities(c, noise, noisy_gates=core)
    assert math.isclose(r.retained_fraction, 1.0, abs_tol=1e-12)
    assert np.max(np.abs(r.distribution.to_dense() - unmitigated)) < 1e-9
    assert np.max(np.abs(unmitigated - oracle_probabilities(c))) > 1e-3


@pytest.mark.parametrize("k", [1, 2, 3])
def test_retained_fraction_decays_geometrically(k):
    p = 0.1
    c = Circuit(k, tuple(Gate("rz", (q,), (0.3 + q,)) for q in range(k)))
    noise = NoiseModel(0.0, 0.0, per_qubit_pauli=tuple((q, (p, 0.0, 0.0)) for q in range(k)))
    s = wrap(c, [build_z_check(c, q) for q in range(k)])
    # pair 1 is innermost, so U sits between its two blocks
    u_gates = range(s.left_blocks[0][1], s.right_blocks[0][0])
    probs = exact_probabilities(s.circuit, noise, noisy_gates=u_gates)
    r = post_select(Distribution.from_dense(probs, s.circuit.num_measured), s.ancilla_bits)
    assert abs(r.retained_fraction - (1 - p) ** k) <= 1e-9


def test_check_residual_is_zero_for_valid_pairs():
    pair = build_z_check(ANSATZ, 1, frame="auto")
    assert check_residual(ANSATZ, pair) < 1e-12
