import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bsim.validation as validation
from bsim.circuits import device_interferometer, haar_random_unitary, transfer_matrix
from bsim.distributions import Distribution, Domain
from bsim.validation import (
    SampleRecord,
    SbsModel,
    ValidationVerdict,
    ZeroLikelihoodError,
    bayesian_compare,
    bayesian_compare_multi,
    distribution_model,
    gbs_models,
    likelihood_ratio_test,
    load_samples,
    lrt_step,
    records_from_distribution,
    rownorm_test,
    save_samples,
    simulate_sbs,
    simulate_uniform_sbs,
)

SBS_XI = (0.25, 0.21, 0.18, 0.17)


def table_model(table):
    return lambda rec: table[rec.output]


def recs(*outs):
    return [SampleRecord("gbs", o, (), i) for i, o in enumerate(outs)]


@pytest.fixture(scope="module")
def device():
    return transfer_matrix(device_interferometer(1))


def test_identical_models_stay_undecided():
    samples = recs((1, 0), (0, 1), (1, 0))
    m = table_model({(1, 0): 0.3, (0, 1): 0.7})
    v = bayesian_compare(samples, m, m)
    assert np.all(v.confidence_trace == 0.5)
    assert v.final_decision == "inconclusive"


def test_single_sample_bayes():
    v = bayesian_compare(recs((1, 0)), table_model({(1, 0): 0.9}), table_model({(1, 0): 0.1}))
    assert v.final_confidence == pytest.approx(0.9)


probs = st.floats(1e-6, 1.0)


@settings(max_examples=40, deadline=None)
@given(
    pi=st.lists(probs, min_size=4, max_size=4),
    pa=st.lists(probs, min_size=4, max_size=4),
    seq=st.lists(st.integers(0, 3), min_size=1, max_size=20),
    perm_seed=st.integers(0, 2**32 - 1),
)
def test_bayes_properties(pi, pa, seq, perm_seed):
    outs = [(i,) for i in range(4)]
    ideal = table_model(dict(zip(outs, pi)))
    alt = table_model(dict(zip(outs, pa)))
    samples = recs(*[outs[i] for i in seq])
    v = bayesian_compare(samples, ideal, alt)
    # log-space result equals the direct product for short runs
    li = np.cumprod([pi[i] for i in seq])
    la = np.cumprod([pa[i] for i in seq])
    assert np.allclose(v.confidence_trace, li / (li + la), rtol=1e-10, atol=1e-300)
    # confidences of the two hypotheses sum to one at every prefix
    w = bayesian_compare(samples, alt, ideal)
    assert np.allclose(v.confidence_trace + w.confidence_trace, 1.0, atol=1e-12)
    # only the multiset of samples matters
    shuffled = list(np.random.default_rng(perm_seed).permutation(len(samples)))
    u = bayesian_compare([samples[i] for i in shuffled], ideal, alt)
    assert u.final_confidence == pytest.approx(v.final_confidence, rel=1e-10, abs=1e-300)


def test_multi_model_reductions():
    outs = [(i,) for i in range(3)]
    ideal = table_model(dict(zip(outs, [0.5, 0.3, 0.2])))
    alt = table_model(dict(zip(outs, [0.2, 0.3, 0.5])))
    samples = recs((0,), (2,), (0,), (1,))
    one = bayesian_compare(samples, ideal, alt)
    multi = bayesian_compare_multi(samples, ideal, [alt])
    assert np.allclose(one.confidence_trace, multi.confidence_trace, rtol=1e-12)
    m = 3
    many = bayesian_compare_multi(samples, ideal, [alt] * m)
    r = np.cumprod([0.4, 2.5, 0.4, 1.0])
    assert np.allclose(many.confidence_trace, 1 / (1 + m * r), rtol=1e-12)
    assert np.all(many.lower_bound <= many.confidence_trace + 1e-15)
    assert np.all(many.confidence_trace <= many.upper_bound + 1e-15)


def test_zero_ideal_probability_is_an_error():
    with pytest.raises(ZeroLikelihoodError):
        bayesian_compare(recs((1,)), table_model({(1,): 0.0}), table_model({(1,): 0.5}))


def test_records_and_verdict_io(tmp_path):
    rs = [SampleRecord("sbs", (1, 0, 1), (1, 1, 0), 0), SampleRecord("gbs", (2, 0, 0), (), 1)]
    save_samples(rs, tmp_path / "s.jsonl")
    assert load_samples(tmp_path / "s.jsonl") == rs
    with pytest.raises(ValueError):
        SampleRecord("sbs", (1, 0), (1, 1), 0)
    v = ValidationVerdict("ideal", np.array([0.5, 0.75]))
    assert v.to_csv() == "index,confidence\n1,0.5\n2,0.75\n"
    c = ValidationVerdict("alternative", counter_trace=np.array([-1, -2]))
    assert c.to_csv() == "index,counter\n1,-1\n2,-2\n"


def test_six_photon_sbs_beats_distinguishable():
    t = transfer_matrix(haar_random_unitary(12, 21, tuple(range(3, 9))))
    xi = (0.2,) * 6
    ideal = SbsModel(t)
    data = simulate_sbs(t, xi, 6, 500, 5, model=ideal)
    v = bayesian_compare(data, ideal, SbsModel(t, "distinguishable"))
    assert v.final_confidence > 0.999
    assert v.final_decision == "ideal"


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_confidence_collapses_on_alternative_data(device, seed):
    ideal, alt = SbsModel(device), SbsModel(device, "distinguishable")
    data = simulate_sbs(device, SBS_XI, 3, 500, seed, kind="distinguishable", model=alt)
    v = bayesian_compare(data, ideal, alt)
    assert v.final_confidence < 1e-3
    assert v.final_decision == "alternative"


def test_rownorm_step_rule():
    t = np.eye(2)
    rec = SampleRecord("standard", (1, 0), (1, 0), 0)
    v = rownorm_test([rec], t, 2, 1)
    assert list(v.counter_trace) == [1]
    tie = rownorm_test([rec], t, 2, 1, threshold=1.0)
    assert list(tie.counter_trace) == [-1]


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_rownorm_signs(device, seed):
    uniform = simulate_uniform_sbs(4, 12, 3, 1000, seed)
    bs = simulate_sbs(device, SBS_XI, 3, 1000, seed)
    assert rownorm_test(uniform, device, 12, 3).final_counter < 0
    assert rownorm_test(bs, device, 12, 3).final_counter > 0


def test_rownorm_never_evaluates_permanents(device, monkeypatch):
    data = simulate_uniform_sbs(4, 12, 3, 50, 0)

    def boom(*args, **kwargs):
        raise AssertionError("permanent called")

    monkeypatch.setattr(validation, "permanent", boom)
    rownorm_test(data, device, 12, 3)


def test_lrt_branches():
    assert [lrt_step(x, 0.75, 2.0) for x in (2.0, 5.0)] == [2, 2]
    assert lrt_step(1.5, 0.75, 2.0) == 1
    assert lrt_step(1.0, 0.75, 2.0) == 0
    assert lrt_step(0.6, 0.75, 2.0) == -1
    assert lrt_step(0.4, 0.75, 2.0) == -2


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_lrt_signs(device, seed):
    good = simulate_sbs(device, SBS_XI, 3, 500, seed)
    bad = simulate_sbs(device, SBS_XI, 3, 500, seed, kind="distinguishable")
    assert likelihood_ratio_test(good, device).final_counter > 0
    assert likelihood_ratio_test(bad, device).final_counter < 0


def test_multi_model_agrees_with_pairwise_on_gbs_data(device):
    dom = Domain("collision-free", 12, 4)
    laws = gbs_models(device, (0.11, 0.09, 0.07, 0.07), dom)
    data = records_from_distribution(laws["ideal"], 300, 4)
    ideal = distribution_model(laws["ideal"])
    rivals = [distribution_model(laws[k]) for k in ("thermal", "coherent", "distinguishable-sms", "tms")]
    pair = [bayesian_compare(data, ideal, r).final_confidence for r in rivals]
    joint = bayesian_compare_multi(data, ideal, rivals).final_confidence
    assert (joint > 0.999) == all(p > 0.999 for p in pair)
    assert joint <= min(pair) + 1e-12


def test_distribution_model_lookup():
    d = Distribution(((1, 0), (0, 1)), np.array([0.25, 0.75]), "collision-free-1")
    m = distribution_model(d)
    assert m(SampleRecord("gbs", (0, 1))) == 0.75
    assert m(SampleRecord("gbs", (2, 0))) == 0.0
