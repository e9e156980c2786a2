import numpy as np
import pytest

from sqem.campaign import CampaignConfig, SqemJob, _split_for_job, plan_cuts_for_check, run_campaign, run_job
from sqem.core import CheckInfeasibleError, Distribution, Gate, PlanningError, SqemError, ValidationError, load_circuit, parse_circuit
from sqem.core.distribution import total_variation
from sqem.cut import HARDWARE, NOISELESS
from sqem.pcs import CheckPair, build_z_check, wrap
from sqem.sim import NoiseModel
from sqem.vqe import AnsatzSpec, ParameterSet, build_ansatz, load_json

from oracles import DATA, oracle_probabilities

CHAIN4 = load_circuit(DATA / "circuits" / "chain4.txt")
DEPOL = NoiseModel(0.001, 0.01)


def dense(d):
    return d.to_dense()


def test_one_qubit_plan_has_two_cuts_and_main_fragment_is_u():
    c = parse_circuit("qubits 1\nRZ(0.4) q0\nS q0\nmeasure all\n")
    s = wrap(c, [build_z_check(c, 0)])
    cuts = plan_cuts_for_check(s, 0)
    assert len(cuts) == 2 and all(cp.qubit == 0 for cp in cuts)
    fs = _split_for_job(s, 0)
    main = next(f for f in fs.fragments if f.backend == HARDWARE)
    mit = next(f for f in fs.fragments if f.backend == NOISELESS)
    assert [g.kind for g in main.circuit.gates] == ["rz", "s"]
    assert len(mit.circuit.gates) == 4


def test_ansatz_main_fragment_holds_whole_circuit():
    s = wrap(CHAIN4, [build_z_check(CHAIN4, 0, frame="auto")])
    fs = _split_for_job(s, 0)
    main = next(f for f in fs.fragments if f.backend == HARDWARE)
    lo = s.left_blocks[0][1]
    assert sorted(main.gate_indices) == list(range(lo, lo + len(CHAIN4.gates)))
    assert main.circuit.num_qubits == 4


def test_plan_rejects_multiple_pairs():
    c = parse_circuit("qubits 2\nRZ(0.1) q0\nRZ(0.2) q1\nmeasure all\n")
    s = wrap(c, [build_z_check(c, 0), build_z_check(c, 1)])
    with pytest.raises(PlanningError):
        plan_cuts_for_check(s, 0)


@pytest.mark.parametrize("name", ["bell.txt", "ghz3.txt", "chain4.txt", "mixed5.txt"])
def test_noiseless_job_equals_ideal(name):
    c = load_circuit(DATA / "circuits" / name)
    ideal = oracle_probabilities(c)
    feasible = []
    for k in range(c.num_qubits):
        try:
            build_z_check(c, k, frame="auto")
        except CheckInfeasibleError:
            continue
        feasible.append(k)
        d = run_job(SqemJob(c, k, None, None, seed=3))
        assert np.max(np.abs(dense(d) - ideal)) < 1e-9
        assert d.metadata["variants"] == 64
        assert d.metadata["hardware_configurations"] == 18
    assert feasible


def test_x_noise_on_protected_qubit_removed():
    # qubit 0 sees only phases and a CZ after its RY frame; any leftover Z on
    # qubit 1 meets only diagonal gates and a control, so it cannot reach the
    # readout.
    c = parse_circuit(
        "qubits 3\nRY(0.7) q0\nH q1\nRY(0.8) q2\nRZ(0.4) q0\nCZ q0,q1\nRZ(-0.9) q0\nCX q1,q2\nRY(0.3) q2\n"
        "RZ(0.2) q1\nmeasure all\n"
    )
    noise = NoiseModel(0.0, 0.0, per_qubit_pauli=((0, (0.2, 0.0, 0.0)),))
    ideal = oracle_probabilities(c)
    assert np.max(np.abs(oracle_probabilities(c, noise) - ideal)) > 1e-3
    d = run_job(SqemJob(c, 0, noise, None, frame="auto"))
    assert np.max(np.abs(dense(d) - ideal)) < 1e-9


def four_qubit_corpus():
    spec = AnsatzSpec.from_json_obj(load_json(DATA / "vqe" / "ansatz.json"))
    circuits = {"chain4": CHAIN4}
    for mol in ("mol_a", "mol_b", "mol_c"):
        params = ParameterSet.from_json_obj(load_json(DATA / "vqe" / f"{mol}.params.json"))
        circuits[mol] = build_ansatz(spec, params, "1100")
    return circuits


def test_depolarizing_mitigation_beats_unmitigated_on_most_seeds():
    wins = total = 0
    for c in four_qubit_corpus().values():
        ideal = Distribution.from_dense(oracle_probabilities(c), 4)
        for seed in range(20):
            camp = run_campaign(CampaignConfig(c, (0, 1, 2, 3), DEPOL, 10000, seed))
            tv_um = total_variation(camp.unmitigated.distribution, ideal)
            for d in camp.mitigated.values():
                wins += total_variation(d, ideal) <= tv_um
                total += 1
    assert wins / total >= 0.9


def test_exact_mitigation_never_increases_tv():
    # on chain4 qubit 3 the removed errors only move weight inside pairs that
    # are both below the ideal, so TV is unchanged there (a tie, not a loss)
    for c in four_qubit_corpus().values():
        ideal = Distribution.from_dense(oracle_probabilities(c), 4)
        camp = run_campaign(CampaignConfig(c, (0, 1, 2, 3), DEPOL, None, 0))
        tv_um = total_variation(camp.unmitigated.distribution, ideal)
        for d in camp.mitigated.values():
            assert total_variation(d, ideal) <= tv_um + 1e-12


def test_campaign_structure_and_costs():
    c = parse_circuit("qubits 2\nRY(0.4) q0\nRY(0.9) q1\nCZ q0,q1\nRX(0.3) q1\nmeasure all\n")
    camp = run_campaign(CampaignConfig(c, (0, 1), DEPOL, 1000, 5))
    assert sorted(camp.mitigated) == [0, 1]
    assert camp.unmitigated.distribution.num_bits == 2
    assert all(d.num_bits == 2 for d in camp.mitigated.values())
    assert all(camp.costs[k]["variants"] == 64 for k in (0, 1))
    assert camp.hardware_executions == 1 + 2 * 18
    assert all(camp.costs[k]["shots_per_configuration"] == 1000 for k in (0, 1))


def test_all_exact_noiseless_campaign_coincides():
    camp = run_campaign(CampaignConfig(CHAIN4, (0, 2), None, None, 0))
    um = dense(camp.unmitigated.distribution)
    for d in camp.mitigated.values():
        assert np.max(np.abs(dense(d) - um)) < 1e-9


def test_campaign_is_deterministic_and_jobs_do_not_matter():
    cfg = CampaignConfig(CHAIN4, (1, 3), DEPOL, 2000, 11)
    a = run_campaign(cfg).dumps()
    b = run_campaign(cfg).dumps()
    c = run_campaign(CampaignConfig(CHAIN4, (1, 3), DEPOL, 2000, 11, jobs=2)).dumps()
    assert a == b == c
    assert a != run_campaign(CampaignConfig(CHAIN4, (1, 3), DEPOL, 2000, 12)).dumps()


@pytest.mark.parametrize("qubits", [(), (0, 0), (4,), (-1,)])
def test_campaign_rejects_bad_qubit_lists(qubits):
    with pytest.raises(ValidationError):
        run_campaign(CampaignConfig(CHAIN4, qubits, None, None))


def test_infeasible_job_aborts_campaign_with_context():
    # neither qubit admits a Z check; the abort names the first failing job
    c = parse_circuit("qubits 2\nH q0\nCX q0,q1\nRX(0.3) q0\nCZ q0,q1\nH q0\nmeasure all\n")
    with pytest.raises(SqemError, match="campaign aborted at qubit 0"):
        run_campaign(CampaignConfig(c, (0, 1), None, None, frame="auto"))


def test_mitigation_fragment_never_gets_noise(monkeypatch):
    import sqem.cut as cut_mod

    seen = []
    real = cut_mod.execute_and_reconstruct

    def spy(fs, variants, backends, *a, **kw):
        seen.append(backends)
        return real(fs, variants, backends, *a, **kw)

    monkeypatch.setattr("sqem.campaign.execute_and_reconstruct", spy)
    run_job(SqemJob(CHAIN4, 2, DEPOL, 500, seed=1))
    (b,) = seen
    assert b[NOISELESS].noise is None and b[NOISELESS].exact
    assert b[HARDWARE].noise == DEPOL


def test_empty_post_selection_reports_qubit(monkeypatch):
    c = parse_circuit("qubits 1\nRZ(0.3) q0\nmeasure all\n")
    # a deliberately broken check: the right side multiplies to -I, so the
    # ancilla always reads 1
    z, x = Gate("z", (0,)), Gate("x", (0,))
    bad = CheckPair(0, (z, z), (z, x, z, x))
    monkeypatch.setattr("sqem.campaign.build_z_check", lambda *a, **kw: bad)
    with pytest.raises(SqemError, match="job on qubit 0"):
        run_job(SqemJob(c, 0, None, None))
