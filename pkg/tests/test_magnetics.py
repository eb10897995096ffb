import numpy as np
import pytest
import hypothesis.strategies as st
from hypothesis import given

from gcsim import magnetics
from gcsim.magnetics import CoreLegGeometry, SaturationCurve, Permeance, WindingGyrator, MU0
from gcsim.utils import central_difference

AREA = 0.0103
GAP = 0.002014


def test_mu0():
    assert MU0 == pytest.approx(1.2566370614e-6, rel=1e-10)


@pytest.mark.parametrize("length, mu_r, expected", [
    (GAP, 1.0, 6.427e-6),
    (0.8636, 8000.0, 1.199e-4),
    (0.4572, 8000.0, 2.265e-4),
])
def test_linear_permeance_table_values(length, mu_r, expected):
    p = magnetics.linear_permeance(CoreLegGeometry(length, AREA), mu_r)
    assert p.value == pytest.approx(expected, rel=1e-3)


def test_linear_permeance_rejects_mu_r_below_one():
    with pytest.raises(ValueError):
        magnetics.linear_permeance(CoreLegGeometry(1.0, 1.0), 0.5)


@pytest.mark.parametrize("length, area", [(0.0, 1.0), (1.0, -1.0), (np.nan, 1.0)])
def test_geometry_validation(length, area):
    with pytest.raises(ValueError):
        CoreLegGeometry(length, area)


@pytest.mark.parametrize("b_sat, mu_r", [(0.0, 8000.0), (1.34, 1.0), (1.34, np.inf)])
def test_curve_validation(b_sat, mu_r):
    with pytest.raises(ValueError):
        SaturationCurve(b_sat=b_sat, mu_r_initial=mu_r)


def test_fringing_increases_gap_permeance():
    plain = magnetics.linear_permeance(CoreLegGeometry(GAP, AREA), 1.0)
    fringed = magnetics.gap_permeance_with_fringing(GAP, AREA)
    assert fringed.value / plain.value == pytest.approx(1.0401, rel=1e-3)


def test_fringing_warns_outside_validity():
    with pytest.warns(UserWarning):
        magnetics.gap_permeance_with_fringing(0.05, AREA)


def test_fringing_rejects_nonpositive_gap():
    with pytest.raises(ValueError):
        magnetics.gap_permeance_with_fringing(0.0, AREA)


def test_saturation_asymptote():
    curve = SaturationCurve()
    h = 1e6 * curve.knee_scale()
    assert curve.flux_density(h) - MU0 * h == pytest.approx(curve.b_sat, rel=1e-5)


def test_initial_slope_is_mu_r():
    curve = SaturationCurve(b_sat=1.34, mu_r_initial=8000.0)
    assert curve.differential_permeability(0.0) == pytest.approx(8000.0 * MU0, rel=1e-12)


@given(st.floats(min_value=-1e5, max_value=1e5, allow_nan=False))
def test_flux_density_is_odd(h):
    curve = SaturationCurve()
    assert curve.flux_density(-h) == pytest.approx(-curve.flux_density(h), abs=1e-15)


@given(st.floats(min_value=-1e5, max_value=1e5, allow_nan=False),
       st.floats(min_value=1e-3, max_value=1e3, allow_nan=False))
def test_flux_density_is_increasing(h, dh):
    curve = SaturationCurve()
    assert curve.flux_density(h + dh) > curve.flux_density(h)


@given(st.floats(min_value=-1e5, max_value=1e5, allow_nan=False))
def test_differential_permeance_matches_finite_differences(mmf):
    geometry = CoreLegGeometry(0.4572, AREA)
    curve = SaturationCurve()
    step = 1e-4 * max(abs(mmf), curve.knee_scale() * geometry.length_m)
    numeric = central_difference(lambda m: magnetics.flux_of_mmf(m, geometry, curve), mmf, step)
    analytic = magnetics.differential_permeance(mmf, geometry, curve).value
    assert numeric == pytest.approx(analytic, rel=1e-6)


def test_differential_permeance_array_input():
    geometry = CoreLegGeometry(0.8636, AREA)
    mmf = np.linspace(-500, 500, 11)
    out = magnetics.differential_permeance(mmf, geometry, SaturationCurve())
    assert isinstance(out, np.ndarray)
    assert out.shape == (11,)
    assert np.argmax(out) == 5


def test_unsaturated_differential_permeance_is_linear_permeance():
    geometry = CoreLegGeometry(0.8636, AREA)
    linear = magnetics.linear_permeance(geometry, 8000.0)
    assert magnetics.differential_permeance(0.0, geometry, SaturationCurve()).value == \
        pytest.approx(linear.value, rel=1e-12)


class TestPermeance:

    def test_series_adds_reluctances(self):
        a, b = Permeance(2.0), Permeance(2.0)
        assert a.series(b).value == pytest.approx(1.0)
        assert a.series(b).reluctance == pytest.approx(a.reluctance + b.reluctance)

    def test_parallel_adds_permeances(self):
        assert Permeance(1.0).parallel(Permeance(2.0), Permeance(3.0)).value == pytest.approx(6.0)

    def test_inductance(self):
        assert Permeance(1e-5).inductance(150) == pytest.approx(0.225)

    @pytest.mark.parametrize("value", [0.0, -1.0, np.inf, np.nan])
    def test_rejects_invalid(self, value):
        with pytest.raises(ValueError):
            Permeance(value)


class TestWindingGyrator:

    def test_gain(self):
        assert WindingGyrator(225, -1).gain == -225

    @pytest.mark.parametrize("turns, orientation", [(0, 1), (2.5, 1), (10, 0), (10, 2)])
    def test_rejects_invalid(self, turns, orientation):
        with pytest.raises(ValueError):
            WindingGyrator(turns, orientation)


def test_winding_emf():
    assert magnetics.winding_emf(150, 2.0) == pytest.approx(300.0)
    np.testing.assert_allclose(magnetics.winding_emf(225, np.array([1.0, -1.0])), [225.0, -225.0])
