import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqem.core import Distribution, ValidationError
from sqem.recombine import (
    MarginalTable,
    RecombinationConfig,
    bitwise_marginal,
    hellinger,
    recombine,
    update_step,
)


def dist(table, n=None):
    n = n or len(next(iter(table)))
    return Distribution(n, table)


def oracle_update(p: dict, targets: dict) -> dict:
    """Plain-python update: P(s) + sum_k P(s) t_k(s[k]) / w_k(s[k]), renormalized.

    Denominators are floored at 1e-12, matching the library's guard.
    """
    marg = {(k, j): max(sum(w for s, w in p.items() if s[k] == str(j)), 1e-12) for k in targets for j in (0, 1)}
    new = {s: w + sum(w * targets[k][int(s[k])] / marg[(k, int(s[k]))] for k in targets) for s, w in p.items()}
    z = sum(new.values())
    return {s: w / z for s, w in new.items()}


def oracle_recombine(p: dict, targets: dict, threshold: float, cap: int = 10_000) -> dict:
    for _ in range(cap):
        q = oracle_update(p, targets)
        step = math.sqrt(max(1 - sum(math.sqrt(p[s] * q[s]) for s in p), 0.0))
        p = q
        if step < threshold:
            break
    return p


def test_bitwise_marginal_examples():
    assert bitwise_marginal(dist({"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25}), 1, 1) == 0.5
    assert bitwise_marginal(dist({"00": 1.0}), 1, 0) == 1.0
    d = dist({"00": 0.1, "01": 0.2, "10": 0.3, "11": 0.4})
    assert math.isclose(bitwise_marginal(d, 0, 1), 0.7)
    with pytest.raises(ValidationError):
        bitwise_marginal(d, 2, 0)
    with pytest.raises(ValidationError):
        bitwise_marginal(d, 0, 2)


def test_marginal_table_sums_to_one():
    d = dist({"00": 0.1, "01": 0.2, "10": 0.3, "11": 0.4})
    m = MarginalTable.of(d)
    for k in range(2):
        assert abs(m[(k, 0)] + m[(k, 1)] - 1) < 1e-12


def test_hellinger_examples():
    p = dist({"0": 0.5, "1": 0.5})
    assert hellinger(p, p) < 1e-7
    assert math.isclose(hellinger(dist({"0": 1.0}), dist({"1": 1.0})), 1.0)
    assert abs(hellinger(p, dist({"0": 1.0})) - math.sqrt(1 - math.sqrt(0.5))) < 1e-12
    assert abs(hellinger(p, dist({"0": 1.0})) - 0.5412) < 1e-4
    with pytest.raises(ValidationError):
        hellinger(p, dist({"00": 1.0}))


def test_single_step_hand_example():
    p = dist({"0": 0.5, "1": 0.5})
    target = MarginalTable({(0, 0): 0.9, (0, 1): 0.1})
    out = update_step(p, {0: target})
    assert abs(out["0"] - 0.7) < 1e-12 and abs(out["1"] - 0.3) < 1e-12


def test_fixed_point_is_exact():
    p = dist({"000": 0.1, "011": 0.3, "101": 0.2, "110": 0.15, "111": 0.25})
    out = update_step(p, {0: p, 1: p, 2: p})
    for s in p.table:
        assert abs(out[s] - p[s]) <= 1e-12


def test_recombine_returns_input_when_already_matching():
    p = dist({"00": 0.4, "01": 0.1, "10": 0.2, "11": 0.3})
    r = recombine(p, {0: p, 1: p})
    assert r.iterations == 1 and r.converged
    assert all(abs(r.distribution[s] - p[s]) <= 1e-12 for s in p.table)


@pytest.mark.parametrize("w0,t0", [(0.5, 0.9), (0.2, 0.6), (0.95, 0.05)])
def test_single_bit_converges_to_target(w0, t0):
    threshold = 1e-4
    r = recombine(dist({"0": w0, "1": 1 - w0}), {0: dist({"0": t0, "1": 1 - t0})}, RecombinationConfig(threshold))
    # scalar recurrence iterated independently
    w = w0
    for _ in range(r.iterations):
        w = (w + t0) / 2
    assert abs(r.distribution["0"] - w) < 1e-12
    assert abs(r.distribution["0"] - t0) <= threshold


def test_two_qubit_product_inputs_match_oracle_and_targets():
    a, b = np.array([0.6, 0.4]), np.array([0.3, 0.7])
    p = {f"{i}{j}": float(a[i] * b[j]) for i in (0, 1) for j in (0, 1)}
    targets = {0: (0.8, 0.2), 1: (0.45, 0.55)}
    mitigated = {
        0: dist({"00": 0.8, "10": 0.2}),
        1: dist({"00": 0.45, "01": 0.55}),
    }
    threshold = 1e-4
    r = recombine(dist(p), mitigated, RecombinationConfig(threshold))
    expect = oracle_recombine(p, targets, threshold)
    assert r.converged
    assert all(abs(r.distribution[s] - expect[s]) < 1e-12 for s in p)
    for k in (0, 1):
        assert abs(bitwise_marginal(r.distribution, k, 0) - targets[k][0]) <= 10 * threshold
    assert r.max_deviation <= 10 * threshold


def test_non_convergence_is_flagged():
    p = dist({"00": 0.7, "01": 0.1, "10": 0.1, "11": 0.1})
    m = {0: dist({"10": 1.0}), 1: dist({"01": 1.0})}
    r = recombine(p, m, RecombinationConfig(1e-6, 3))
    assert not r.converged
    assert r.iterations == 3
    assert r.final_step >= 1e-6
    assert r.distribution.metadata["converged"] is False


def test_zero_marginal_is_guarded():
    # P_R never produces bit 0 = 1, but the target asks for it
    p = dist({"00": 0.5, "01": 0.5})
    r = recombine(p, {0: dist({"00": 0.5, "10": 0.5})}, RecombinationConfig(1e-4, 50))
    assert all(math.isfinite(w) for _, w in r.distribution.items())
    assert "10" not in r.distribution.table and "11" not in r.distribution.table


def test_tiny_marginal_keeps_precision():
    # w_0 = 1e-10 must be summed, not obtained as 1 - w_1
    p = {"0": 1e-10, "1": 1 - 1e-10}
    out = update_step(dist(p), {0: dist({"0": 1.0})})
    expect = oracle_update(p, {0: (1.0, 0.0)})
    assert abs(out["0"] - expect["0"]) < 1e-12


def test_trace_csv_shape():
    p = dist({"00": 0.5, "11": 0.5})
    r = recombine(p, {0: dist({"00": 0.9, "11": 0.1}), 1: dist({"00": 0.8, "11": 0.2})})
    lines = r.trace_csv().strip().splitlines()
    assert lines[0] == "iteration,hellinger_step,deviation_q0,deviation_q1"
    assert len(lines) == r.iterations + 1


def test_config_validation():
    for bad in (0.0, 1.0, -1e-3):
        with pytest.raises(ValidationError):
            RecombinationConfig(bad)
    with pytest.raises(ValidationError):
        RecombinationConfig(1e-4, 0)
    with pytest.raises(ValidationError):
        recombine(dist({"0": 1.0}), {})
    with pytest.raises(ValidationError):
        recombine(dist({"0": 1.0}), {0: dist({"00": 1.0})})


@st.composite
def distributions(draw, n):
    weights = draw(st.lists(st.floats(0.0, 1.0), min_size=2**n, max_size=2**n))
    if sum(weights) < 1e-3:
        weights[0] = 1.0
    z = sum(weights)
    keys = ["".join(b) for b in itertools.product("01", repeat=n)]
    return Distribution(n, {k: w / z for k, w in zip(keys, weights) if w > 0})


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_update_preserves_normalization_and_support(data):
    n = data.draw(st.integers(1, 3))
    p = data.draw(distributions(n))
    qubits = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    mitigated = {k: data.draw(distributions(n)) for k in qubits}
    out = update_step(p, mitigated)
    assert abs(out.total() - 1) < 1e-9
    assert all(w >= 0 for _, w in out.items())
    assert set(k for k, w in out.items() if w > 0) <= set(p.table)
    expect = oracle_update(dict(p.table), {k: (bitwise_marginal(m, k, 0), bitwise_marginal(m, k, 1)) for k, m in mitigated.items()})
    assert all(abs(out[s] - expect[s]) < 1e-9 for s in p.table)
