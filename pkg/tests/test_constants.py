import numpy as np
import pytest
from hypothesis import given, strategies as st

from rydbeat import H_MEV_PS, HBAR_MEV_PS, inverse_linewidth, mev_to_thz, thz_to_mev
from rydbeat.errors import InvalidInputError


def test_planck_constants_consistent():
    assert abs(HBAR_MEV_PS - H_MEV_PS / (2 * np.pi)) / HBAR_MEV_PS < 1e-9


def test_thz_to_mev_reference_points():
    # printed conversions round to 1.24 and 0.27 meV
    assert thz_to_mev(0.30) == pytest.approx(1.2407, abs=5e-5)
    assert round(thz_to_mev(0.30), 2) == 1.24
    assert thz_to_mev(0.065) == pytest.approx(0.2688, abs=5e-5)
    assert round(thz_to_mev(0.065), 2) == 0.27
    assert thz_to_mev(0.0) == 0.0


def test_mev_to_thz_reference_points():
    assert mev_to_thz(1.21) == pytest.approx(1.21 / H_MEV_PS, rel=1e-12)
    assert mev_to_thz(1.21) == pytest.approx(0.2926, abs=5e-5)
    assert mev_to_thz(0.0) == 0.0
    assert mev_to_thz(H_MEV_PS) == pytest.approx(1.0, rel=1e-15)


def test_negative_inputs_rejected():
    with pytest.raises(InvalidInputError):
        thz_to_mev(-0.1)
    with pytest.raises(InvalidInputError):
        mev_to_thz(-1.0)
    for bad in (0.0, -2.0):
        with pytest.raises(InvalidInputError):
            inverse_linewidth(bad)


@given(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
def test_conversion_round_trip(nu):
    assert mev_to_thz(thz_to_mev(nu)) == pytest.approx(nu, rel=1e-12)
    assert thz_to_mev(mev_to_thz(nu)) == pytest.approx(nu, rel=1e-12)


def test_inverse_linewidth_values():
    assert inverse_linewidth(HBAR_MEV_PS) == pytest.approx(1.0, rel=1e-15)
    # inverting the tabulated hbar/Gamma values recovers them
    assert inverse_linewidth(HBAR_MEV_PS / 2.85) == pytest.approx(2.85, rel=1e-12)
    assert inverse_linewidth(HBAR_MEV_PS / 5.0) == pytest.approx(5.0, rel=1e-12)
    assert round(inverse_linewidth(0.2310), 2) == 2.85
    assert round(inverse_linewidth(0.1316), 2) == 5.00


@given(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
def test_inverse_linewidth_involution(gamma):
    # Gamma -> hbar/Gamma maps back onto itself (units swapped)
    assert inverse_linewidth(inverse_linewidth(gamma)) == pytest.approx(gamma, rel=1e-12)
