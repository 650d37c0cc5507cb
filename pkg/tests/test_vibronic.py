import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsim.distributions import Domain, gbs_probabilities, prob_gbs
from bsim.gaussian import lossy_squeezed_state, squeezed_state
from bsim.vibronic import (
    FcProfile,
    MoleculeSpec,
    doktorov_decompose,
    enhancement_curve,
    fc9_forward,
    fc_factor,
    fc_patterns,
    fc_profile,
    fc_state,
    postprocess_rescale,
    profile_fidelity,
    quantum_enhancement,
    random_molecule,
    vacuum_profile,
)
from oracles import fock_gbs_probability


def identity_molecule(m=3):
    w = np.array([900.0, 1300.0, 1700.0])[:m]
    return MoleculeSpec(w, w, np.eye(m))


def test_identity_molecule_decomposition():
    dok = doktorov_decompose(identity_molecule())
    assert np.all(dok.xi == 0) and np.all(dok.alpha == 0)
    assert np.allclose(np.abs(dok.u_left), np.eye(3)) and np.allclose(np.abs(dok.u_right), np.eye(3))


def test_engineered_singular_values():
    mol = MoleculeSpec([1000.0, 1200.0], [4000.0, 1200.0], np.eye(2))
    dok = doktorov_decompose(mol)
    assert np.allclose(dok.xi, [math.log(2), 0.0], atol=1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_svd_reconstructs_j(seed):
    dok = doktorov_decompose(random_molecule(4, seed))
    rebuilt = dok.u_left @ np.diag(np.exp(dok.xi)) @ dok.u_right.T
    assert np.max(np.abs(rebuilt - dok.j_matrix)) < 1e-10
    assert np.all(dok.alpha == 0)


def test_molecule_validation(tmp_path):
    with pytest.raises(ValueError):
        MoleculeSpec([1.0, 2.0], [1.0, 2.0], [[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        MoleculeSpec([-1.0], [1.0], [[1.0]])
    with pytest.raises(FileNotFoundError, match="nope.json"):
        MoleculeSpec.load(tmp_path / "nope.json")


def test_single_mode_overlap_closed_form():
    # ground-state overlap of two oscillators: 2 sqrt(w w') / (w + w')
    w, wp = 800.0, 1900.0
    dok = doktorov_decompose(MoleculeSpec([w], [wp], [[1.0]]))
    assert fc_factor(dok, (0,)) == pytest.approx(2 * math.sqrt(w * wp) / (w + wp), rel=1e-12)


def test_fc_factor_delegates_to_prob_gbs():
    dok = doktorov_decompose(random_molecule(3, 4))
    state = fc_state(dok)
    for pat in [(0, 0, 0), (2, 0, 0), (1, 1, 0), (1, 1, 2)]:
        assert fc_factor(dok, pat) == prob_gbs(state, pat)
    assert fc_factor(dok, (0, 0, 0)) == pytest.approx(1 / math.sqrt(state.det_sigma_q))


def test_zero_squeezing_molecule():
    dok = doktorov_decompose(identity_molecule())
    assert fc_factor(dok, (0, 0, 0)) == 1.0
    assert fc_factor(dok, (2, 0, 0)) == 0.0
    prof = fc_profile(dok, [900.0, 1300.0, 1700.0], 4)
    assert prof.masses[prof.frequencies == 0] == pytest.approx(1.0)
    assert np.all(prof.masses[prof.frequencies != 0] == 0)


@pytest.mark.parametrize("seed", [3, 7])
def test_fc_factors_match_fock_oracle(seed):
    dok = doktorov_decompose(random_molecule(4, seed))
    for pat in Domain("full-truncated", 4, 4).patterns():
        ref = fock_gbs_probability(dok.u_left.T, dok.xi, pat)
        assert abs(fc_factor(dok, pat) - ref) < 1e-8


def test_single_mode_profile_has_even_support():
    dok = doktorov_decompose(MoleculeSpec([1000.0], [1500.0], [[1.0]]))
    prof = fc_profile(dok, [1500.0], 8)
    assert np.array_equal(prof.frequencies, 1500.0 * np.arange(9))
    assert np.all(prof.masses[1::2] == 0) and np.all(prof.masses[0::2] > 0)


def test_profile_mass_is_conserved():
    mol = random_molecule(3, 2)
    dok = doktorov_decompose(mol)
    prof = fc_profile(dok, mol.omega_prime, 5)
    pats = fc_patterns(3, 5)
    assert prof.total == pytest.approx(gbs_probabilities(fc_state(dok), pats).sum(), abs=1e-12)


positive_lists = st.lists(
    st.tuples(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.floats(1e-6, 1.0)),
    min_size=1,
    max_size=12,
    unique_by=lambda x: tuple(x[0]),
)


@settings(max_examples=50, deadline=None)
@given(raw=positive_lists, eta=st.floats(0.05, 1.0), gamma=st.floats(0.05, 1.0))
def test_rescale_inverts_forward_map(raw, eta, gamma):
    total = sum(p for _, p in raw)
    norm = [(tuple(k), p / total) for k, p in raw]
    back = postprocess_rescale(fc9_forward(norm, eta, gamma), eta, gamma)
    assert [k for k, _ in back] == [k for k, _ in norm]
    assert np.allclose([p for _, p in back], [p for _, p in norm], rtol=1e-12, atol=0)


def test_rescale_identity_at_unit_parameters():
    raw = [((1, 1), 0.2), ((0, 0), 0.6)]
    out = postprocess_rescale(raw, 1.0, 1.0)
    assert [k for k, _ in out] == [(1, 1), (0, 0)]
    assert [p for _, p in out] == pytest.approx([0.25, 0.75], rel=1e-15)


def _device_inversion_error(eta):
    mol = random_molecule(3, 11)
    dok = doktorov_decompose(mol)
    gamma = 0.5
    dev_xi = np.arctanh(gamma * np.tanh(dok.xi))
    pats = fc_patterns(3, 4)
    state = lossy_squeezed_state(dok.u_left.T, dev_xi, eta)
    recorded = gbs_probabilities(state, pats, 12)
    rec = postprocess_rescale(list(zip(map(tuple, pats), recorded)), eta, gamma)
    ideal = gbs_probabilities(squeezed_state(dok.u_left.T, dok.xi), pats)
    ideal = ideal / ideal.sum()
    return np.max(np.abs(np.array([p for _, p in rec]) - ideal))


def test_rescale_recovers_squeezing_only_device():
    assert _device_inversion_error(1.0) < 1e-12


def test_rescale_recovers_lossy_rescaled_device():
    assert _device_inversion_error(0.8) < 1e-6


def test_profile_fidelity_and_enhancement():
    p = FcProfile(np.array([0.0, 1.0, 2.0]), np.array([0.5, 0.5, 0.0]), 2)
    q = FcProfile(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.0, 1.0]), 2)
    assert profile_fidelity(p, p) == pytest.approx(1.0)
    assert profile_fidelity(p, q) == 0.0
    with pytest.raises(ValueError):
        profile_fidelity(p, FcProfile(np.array([0.0, 3.0]), np.array([1.0, 0.0]), 2))
    assert vacuum_profile(p).masses.tolist() == [1.0, 0.0, 0.0]
    assert quantum_enhancement(0.9, 0.7) == pytest.approx(0.2)


def test_zero_squeezing_has_no_enhancement():
    mol = identity_molecule()
    dok = doktorov_decompose(mol)
    rows = enhancement_curve(dok.u_left, np.zeros(3), mol.omega_prime, [1.0, 2.0, 5.0], 3)
    for _, fq, fc, c in rows:
        assert fq == pytest.approx(1.0) and fc == pytest.approx(1.0) and c == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_enhancement_is_unimodal(seed):
    mol = random_molecule(3, seed)
    dok = doktorov_decompose(mol)
    dev = np.arctanh(0.3 * np.tanh(dok.xi))
    amps = np.linspace(0.5, 0.99 / np.abs(np.tanh(dev)).max(), 14)
    c = np.array([r[3] for r in enhancement_curve(dok.u_left, dev, mol.omega_prime, amps, 4, reference_n=12)])
    peak = int(np.argmax(c))
    assert 0 < peak < len(c) - 1
    assert np.all(np.diff(c[: peak + 1]) > 0) and np.all(np.diff(c[peak:]) < 0)
