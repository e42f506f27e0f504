import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qepi import bounds as B

# reference values computed independently at 30 significant digits
G2 = 1.90954250488443845
G1 = 1.38629436111989062
HOLEVO_HALF_2_4 = 0.863046217355342782
EPI_HALF_2_4 = 1.29456932603301417
HALF_EPI_2_4 = 0.89479491566992308
ADDITIVE_QUARTER_5_10 = 0.983230922921311643

lams = st.floats(0.0, 1.0)
photons = st.floats(0.0, 50.0)


def test_frozen_values():
    assert B.g(2.0) == pytest.approx(G2, abs=1e-14)
    assert B.g(1.0) == pytest.approx(G1, abs=1e-14)
    assert B.g(0.0) == 0.0
    assert B.holevo_lb(0.5, 2.0, 4.0) == pytest.approx(HOLEVO_HALF_2_4, abs=1e-14)
    assert B.epi_ub(0.5, 2.0, 4.0) == pytest.approx(EPI_HALF_2_4, abs=1e-14)
    assert B.half_epi_ub(2.0, 4.0) == pytest.approx(HALF_EPI_2_4, abs=1e-14)
    assert B.additive_extension_ub(0.25, 5.0, 10.0) == pytest.approx(ADDITIVE_QUARTER_5_10, abs=1e-14)


def test_g_rejects_negative_and_vectorizes():
    with pytest.raises(ValueError):
        B.g(-0.1)
    with pytest.raises(ValueError):
        B.g_prime(0.0)
    assert np.allclose(B.g(np.array([1.0, 2.0])), [G1, G2])


@given(st.floats(0.01, 100.0))
def test_g_prime_matches_finite_difference(x):
    h = 1e-5 * x
    fd = (B.g(x + h) - B.g(x - h)) / (2 * h)
    assert B.g_prime(x) == pytest.approx(fd, rel=1e-6)


@given(lams, photons, photons)
def test_upper_bounds_dominate_holevo(lam, ne, n):
    lb = B.holevo_lb(lam, ne, n)
    slack = 1e-10 * max(1.0, B.g(n + ne))
    for ub in (B.additive_extension_ub(lam, ne, n), B.epi_ub(lam, ne, n), B.conjectured_ub(lam, ne, n)):
        assert ub >= lb - slack


@given(lams, photons, photons)
def test_conjectured_bound_is_tighter_than_linear_one(lam, ne, n):
    assert B.conjectured_ub(lam, ne, n) <= B.epi_ub(lam, ne, n) + 1e-10


@given(photons, photons)
def test_conjectured_bound_at_half_is_proven_bound(ne, n):
    assert B.conjectured_ub(0.5, ne, n) == pytest.approx(B.half_epi_ub(ne, n), abs=1e-10)


@given(lams, photons)
def test_zero_environment_gives_pure_loss_capacity(lam, n):
    expected = B.g(lam * n)
    assert B.holevo_lb(lam, 0.0, n) == pytest.approx(expected, abs=1e-12)
    assert B.additive_extension_ub(lam, 0.0, n) == pytest.approx(expected, abs=1e-12)
    assert B.epi_ub(lam, 0.0, n) == pytest.approx(expected, abs=1e-12)
    assert B.conjectured_ub(lam, 0.0, n) == pytest.approx(expected, abs=1e-12)


def test_smax_components():
    c = B.smax_ub_components(0.5, 2.0, 4.0)
    assert c.epi_ub == pytest.approx(EPI_HALF_2_4)
    assert c.half_epi_ub == pytest.approx(HALF_EPI_2_4)
    assert B.smax_ub_components(0.3, 2.0, 4.0).half_epi_ub is None
    assert B.evaluate("smax_ub", 4.0, 0.5, 2.0) == pytest.approx(EPI_HALF_2_4)


@given(st.floats(0.01, 10.0), photons)
def test_classical_noise_bounds_are_ordered(nu, n):
    lb, ub = B.classical_noise_bounds(nu, n)
    assert ub >= lb
    assert ub - lb == pytest.approx(B.g(nu) - math.log1p(math.e * nu), abs=1e-10)


def test_classical_noise_limit_tends_to_e_nu():
    vals = B.classical_noise_limit(0.7, [0.9, 0.99, 0.999, 0.9999])
    errs = [abs(v - math.e * 0.7) for v in vals]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


def test_thermal_bounds_converge_to_classical_noise_bounds():
    nu, n = 0.8, 3.0
    lb, ub = B.classical_noise_bounds(nu, n)
    lam = 1 - 1e-6
    ne = nu / (1 - lam)
    assert B.holevo_lb(lam, ne, n) == pytest.approx(lb, abs=1e-4)
    assert B.conjectured_ub(lam, ne, n) == pytest.approx(ub, abs=1e-4)


def test_parameter_validation():
    with pytest.raises(ValueError):
        B.holevo_lb(1.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        B.epi_ub(0.5, -1.0, 1.0)
    with pytest.raises(ValueError):
        B.classical_noise_bounds(0.0, 1.0)
    with pytest.raises(ValueError):
        B.evaluate("half_epi_ub", 1.0, lam=0.3)
    with pytest.raises(ValueError):
        B.identity("nonsense")


def test_identity_metadata():
    assert B.identity("conjectured_ub").conditional
    assert B.identity("cn_ub").conditional
    assert not B.identity("half_epi_ub").conditional
    assert set(B.FORMULAS) == set(B.IDENTITIES)


def test_curve_csv_columns_and_flags():
    c = B.curve(None, np.linspace(0, 10, 11), lam=0.5, N_E=2.0)
    rows = list(csv.reader(io.StringIO(c.to_csv())))
    assert rows[0] == ["N", "identity", "nats", "bits", "conditional_flag"]
    assert len(rows) == 1 + 11 * 5
    flagged = {r[1] for r in rows[1:] if r[4] == "true"}
    assert flagged == {"conjectured_ub"}
    assert c.ordering_ok()
    d = json.loads(c.to_json())
    assert d["conditional"]["conjectured_ub"] is True


def test_lambda_sweep_ordering():
    c = B.lambda_sweep(None, np.linspace(0, 1, 21), 5.0, 2.0)
    assert c.sweep == "lambda" and c.ordering_ok()


def test_gap_scans():
    half = B.half_epi_gap_scan(np.linspace(0, 50, 101), [0.5, 1, 2, 5, 10])
    assert half.holds and half.supremum == pytest.approx(0.0555157, abs=1e-6)
    assert half.argmax[1] == 1.0
    n, ne = half.argmax
    assert half.supremum == pytest.approx((B.half_epi_ub(ne, n) - B.holevo_lb(0.5, ne, n)) / B.LN2, abs=1e-12)
    dense = B.half_epi_gap_scan()
    assert dense.holds and dense.supremum == pytest.approx(0.0567316, abs=1e-6)
    cn = B.classical_noise_gap_scan(np.linspace(0.01, 10, 400), [0.0, 10.0])
    assert cn.holds and cn.supremum == pytest.approx(0.10702, abs=2e-4)


@given(photons, photons)
def test_half_gap_does_not_depend_on_signal_energy(n, ne):
    gap = B.half_epi_ub(ne, n) - B.holevo_lb(0.5, ne, n)
    assert gap == pytest.approx(B.half_epi_ub(ne, 0.0) - B.holevo_lb(0.5, ne, 0.0), abs=1e-9)
