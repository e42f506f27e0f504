import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qepi.channels import (
    ChannelSpec, apply_amplifier, apply_channel, apply_classical_noise, apply_pure_loss, apply_thermal,
    beam_splitter_output, beam_splitter_outputs, beam_splitter_unitary, loss_amplifier_parameters,
    limit_consistency_check, trace_distance,
)
from qepi.conventions import TruncationError
from qepi.fock import embed, make_coherent, make_fock, make_thermal, mean_photon_number, moments, random_state, truncate
from qepi.information import von_neumann_entropy

# entropy of |1> boxplus_{1/2} |2>, from a symbolic expansion of the creation-operator polynomial
S_FOCK12_HALF = 1.2554823251787535
# entropy of |1> boxplus_{1/3} |0>: binary entropy of 1/3
S_FOCK10_THIRD = 0.63651416829481278


def test_beam_splitter_unitary_is_unitary():
    U = beam_splitter_unitary(4, 3, 0.3)
    M = U.reshape(U.shape[0] * U.shape[1], -1)
    np.testing.assert_allclose(M.conj().T @ M, np.eye(12), atol=1e-12)


def test_single_photon_splits_evenly():
    z = beam_splitter_output(make_fock(1, 2), make_fock(0, 2), 0.5)
    np.testing.assert_allclose(z.populations()[:2], [0.5, 0.5], atol=1e-13)
    assert von_neumann_entropy(z) == pytest.approx(math.log(2), abs=1e-13)


def test_single_photon_populations_follow_lambda():
    z = beam_splitter_output(make_fock(1, 2), make_fock(0, 2), 1 / 3)
    np.testing.assert_allclose(z.populations()[:2], [2 / 3, 1 / 3], atol=1e-13)
    assert von_neumann_entropy(z) == pytest.approx(S_FOCK10_THIRD, abs=1e-12)


def test_fock_pair_entropy_matches_symbolic_oracle():
    z = beam_splitter_output(make_fock(1, 2), make_fock(2, 3), 0.5)
    np.testing.assert_allclose(z.populations()[:4], [0.375, 0.125, 0.125, 0.375], atol=1e-13)
    assert von_neumann_entropy(z) == pytest.approx(S_FOCK12_HALF, abs=1e-12)


def test_hong_ou_mandel_bunching():
    joint_z, joint_w = beam_splitter_outputs(make_fock(1, 2), make_fock(1, 2), 0.5)
    np.testing.assert_allclose(joint_z.populations()[:3], [0.5, 0.0, 0.5], atol=1e-13)


@given(st.floats(0.05, 0.95), st.integers(0, 10**6), st.integers(0, 10**6))
def test_beam_splitter_combines_means_and_covariances(lam, s1, s2):
    x, y = random_state(4, seed=s1), random_state(5, seed=s2)
    z = beam_splitter_output(x, y, lam)
    # pad first: truncated Q^2 is wrong on the top level
    mx, gx = moments(embed(x, 6))
    my, gy = moments(embed(y, 7))
    mz, gz = moments(embed(z, z.dims[0] + 2))
    np.testing.assert_allclose(mz, math.sqrt(lam) * mx + math.sqrt(1 - lam) * my, atol=1e-10)
    np.testing.assert_allclose(gz, lam * gx + (1 - lam) * gy, atol=1e-9)
    assert abs(z.trace() - 1) < 1e-12


def test_both_arms_conserve_photons():
    x, y = random_state(4, seed=1), random_state(3, seed=2)
    z, w = beam_splitter_outputs(x, y, 0.37)
    total = mean_photon_number(x) + mean_photon_number(y)
    assert mean_photon_number(z) + mean_photon_number(w) == pytest.approx(total, abs=1e-11)


def test_thermal_channel_routes_agree():
    st_ = make_coherent(0.4 + 0.2j, 20)
    a = apply_thermal(st_, 0.6, 0.7, method="beam_splitter", out_cutoff=30)
    b = apply_thermal(st_, 0.6, 0.7, method="kraus", out_cutoff=30)
    assert trace_distance(a, b) < 1e-7


def test_loss_amplifier_parameters():
    G, a = loss_amplifier_parameters(0.25, 5.0)
    assert G == pytest.approx(4.75)
    assert a == pytest.approx(0.25 / 4.75)


def test_pure_loss_on_fock_is_binomial():
    out = apply_pure_loss(make_fock(3, 4), 0.4)
    expected = [math.comb(3, k) * 0.4**k * 0.6 ** (3 - k) for k in range(4)]
    np.testing.assert_allclose(out.populations(), expected, atol=1e-14)


def test_amplifier_on_vacuum_is_thermal():
    out = apply_amplifier(make_fock(0, 2), 1.8)
    ref = make_thermal(0.8, out.dims[0])
    assert trace_distance(out, ref) < 1e-8


def test_classical_noise_on_vacuum_is_thermal_nu():
    out = apply_classical_noise(make_fock(0, 2), 0.5, out_cutoff=50)
    assert trace_distance(out, make_thermal(0.5, 50)) < 1e-8


def test_classical_noise_leak_is_reported():
    with pytest.raises(TruncationError):
        apply_classical_noise(make_fock(0, 2), 3.0, out_cutoff=10)


def test_thermal_limit_approaches_classical_noise():
    nu = 0.5
    lams = [0.5, 0.9, 0.99, 0.999]
    rep = limit_consistency_check(lams, [nu / (1 - l) for l in lams], nu, cutoff=60)
    assert rep.monotone
    assert rep.distances[-1] < 1e-3
    np.testing.assert_allclose(rep.photon_thermal, [l + nu for l in lams], atol=1e-9)
    assert rep.photon_classical == pytest.approx(1 + nu, abs=1e-9)


def test_channel_spec_validation_and_json():
    spec = ChannelSpec("thermal", lam=0.3, N_E=2.0)
    assert ChannelSpec.from_json(spec.to_json()) == spec
    assert json.loads(spec.to_json())["lambda"] == 0.3
    with pytest.raises(ValueError):
        ChannelSpec("thermal", lam=0.3)
    with pytest.raises(ValueError):
        ChannelSpec("amplifier", G=0.5)
    with pytest.raises(ValueError):
        ChannelSpec("warp", lam=0.1)


def test_apply_channel_dispatch():
    st_ = make_fock(1, 3)
    out = apply_channel(st_, ChannelSpec("pure_loss", lam=0.5))
    np.testing.assert_allclose(out.populations()[:2], [0.5, 0.5])


def test_output_truncation_guard():
    z = beam_splitter_output(make_fock(5, 6), make_fock(5, 6), 0.5)
    with pytest.raises(TruncationError):
        truncate(z, 6)


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.83])
def test_diagonal_input_path_matches_joint_unitary(lam):
    # the Fock-diagonal shortcut against the full two-mode unitary route
    from qepi.corpus import _clipped_thermal

    cases = [(random_state(5, seed=2), _clipped_thermal(0.7, 9)),
             (_clipped_thermal(0.4, 7), random_state(6, rank=2, seed=3)),
             (make_fock(2, 4), _clipped_thermal(1.1, 8))]
    for x, y in cases:
        fast = beam_splitter_output(x, y, lam)
        z, _ = beam_splitter_outputs(x, y, lam)
        assert np.abs(fast.rho - z.rho).max() < 1e-13
