import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qepi.bounds import g, g_prime
from qepi.conventions import LEDGER, NotFullRankError
from qepi.diffusion import smooth
from qepi.fock import QuadratureIndex, TruncatedState, displacement_generator, make_fock, make_thermal, random_state
from qepi.information import (
    calibrate_debruijn_scale, convexity_check, de_bruijn_check, fisher_additivity_defect, fisher_analytic,
    fisher_along, fisher_data_processing_margin, fisher_reparametrization_ratio, fisher_total,
    relative_entropy, stam_check, von_neumann_entropy,
)


@pytest.mark.parametrize("N", [0.5, 1.0, 2.0, 3.0])
def test_thermal_entropy_is_g(N):
    assert von_neumann_entropy(make_thermal(N)) == pytest.approx(g(N), abs=1e-8)


def test_pure_states_have_zero_entropy():
    assert von_neumann_entropy(make_fock(3, 5)) == 0.0


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_relative_entropy_is_nonnegative(s1, s2):
    a, b = random_state(5, seed=s1), random_state(5, seed=s2)
    assert relative_entropy(a, b) >= 0
    assert relative_entropy(a, a) == pytest.approx(0.0, abs=1e-10)


def test_relative_entropy_is_infinite_off_support():
    assert relative_entropy(make_fock(1, 3), make_fock(0, 3)) == math.inf


def test_relative_entropy_data_processing_under_partial_trace():
    from qepi.fock import partial_trace

    a, b = random_state((3, 3), seed=1), random_state((3, 3), seed=2)
    assert relative_entropy(partial_trace(a, [0]), partial_trace(b, [0])) <= relative_entropy(a, b) + 1e-12


@pytest.mark.parametrize("N", [0.5, 1.0, 2.0])
def test_thermal_fisher_matches_closed_form(N):
    st_ = make_thermal(N, 80)
    res = fisher_total(st_)
    assert res.total == pytest.approx(g_prime(N), rel=1e-6)
    assert res.per_quadrature["Q1"] == pytest.approx(res.per_quadrature["P1"], rel=1e-9)


def test_stencil_matches_analytic_form_on_smoothed_state():
    st_ = smooth(random_state(4, rank=2, seed=3), 0.1, cutoff=22)
    for kind in "QP":
        G = displacement_generator(QuadratureIndex(0, kind), st_.cutoff)
        fd = fisher_along(st_, QuadratureIndex(0, kind))
        assert fd == pytest.approx(fisher_analytic(st_, G), rel=1e-6)


def test_rank_deficient_state_is_rejected():
    with pytest.raises(NotFullRankError):
        fisher_total(make_fock(1, 10))


def test_de_bruijn_on_thermal_ladder():
    for N in (0.5, 1.0, 2.0):
        assert de_bruijn_check(make_thermal(N, 60)).value < 1e-5


def test_de_bruijn_on_smoothed_fock():
    res = de_bruijn_check(smooth(make_fock(1, 3), 0.05, cutoff=30))
    assert res.value < 1e-3
    assert res.to_dict()["conventions"]["debruijn_scale"] == LEDGER.debruijn_scale


def test_calibrated_debruijn_scale_is_one():
    assert calibrate_debruijn_scale() == pytest.approx(1.0, rel=1e-5)


def test_fisher_additivity_and_reparametrization():
    a = smooth(make_fock(1, 3), 0.1, cutoff=16)
    b = smooth(make_fock(0, 2), 0.2, cutoff=16)
    assert abs(fisher_additivity_defect(a, b)) < 1e-6
    assert fisher_reparametrization_ratio(a, 3.0) == pytest.approx(1.0, rel=1e-6)


def test_fisher_decreases_under_diffusion():
    a = smooth(random_state(4, seed=9), 0.1, cutoff=22)
    assert fisher_data_processing_margin(a, 0.2) > 0


def test_stam_and_convexity_on_thermal_pair():
    x, y = make_thermal(0.5, 60), make_thermal(1.5, 60)
    stam = stam_check(x, y)
    # thermal inputs: 2/g'((Nx+Ny)/2) vs 1/g'(Nx) + 1/g'(Ny)
    assert stam.value == pytest.approx(2 / g_prime(1.0) - 1 / g_prime(0.5) - 1 / g_prime(1.5), abs=1e-5)
    assert stam.value >= 0
    conv = convexity_check(x, y, 0.3)
    assert conv.value == pytest.approx(0.3 * g_prime(0.5) + 0.7 * g_prime(1.5) - g_prime(0.3 * 0.5 + 0.7 * 1.5),
                                       abs=1e-5)


def test_truncated_state_validation_in_fisher_inputs():
    with pytest.raises(ValueError):
        TruncatedState(np.eye(3), 3)
