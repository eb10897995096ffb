import numpy as np
import astropy.units as u
from dataclasses import dataclass, replace
from warnings import warn

from gcsim import magnetics
from gcsim.circuit import CircuitBuilder
from gcsim.elements.element import ELECTRICAL, MAGNETIC
from gcsim.elements.passive import Resistor, Inductor, Capacitor
from gcsim.elements.magnetic import FluxCapacitor, Gyrator
from gcsim.elements.sources import SineVoltageSource, DCCurrentSource

# Table I of the device, in the units it is published in
TABLE_I = {
    "l_mid": 45.72 * u.cm,
    "l_outer": 86.36 * u.cm,
    "gap": 0.2014 * u.cm,
    "area": 0.0103 * u.m ** 2,
    "n_dc": 225,
    "n_ac": 150,
    "r_load": 100 * u.ohm,
    "l_load": 130 * u.mH,
    "b_sat": 1.34 * u.T,
    "power_factor": 0.9,
}

LABELS = ("v_src", "ac_winding", "r_load", "l_load", "mid_leg", "gap", "left_leg", "right_leg",
          "dc_left", "dc_right", "i_bias")


def _si(name, unit):
    return float(TABLE_I[name].to(unit).value)


class CvsrBuildError(ValueError):
    def __init__(self, fields_in_error):
        self.fields = list(fields_in_error)
        super().__init__("invalid CVSR parameters: " + ", ".join(self.fields))


@dataclass(frozen=True)
class CvsrParams:
    """
    Geometry, windings, load and excitation of the three-legged CVSR. Defaults are Table I in SI units.
    mu_r and f are not given there. The default mu_r keeps the unsaturated inductance above 0.12 H and makes
    2f the strongest line of v_dc at 3.8 kV and 0.2 A.

    Args:
        v_source: Source voltage in V, amplitude (peak) unless source_rms is set.
        i_dc_bias: dc bias current in A.
        source_rms: Interpret v_source as an rms value.
        fringing: Include gap fringing in the gap permeance.
        linear: Replace the nonlinear legs by linear permeances at mu_r (analytic oracle variant).
        dc_orientation: +1 or -1, flips the winding sense of both dc windings.
    """
    l_mid: float = _si("l_mid", u.m)
    l_outer: float = _si("l_outer", u.m)
    gap: float = _si("gap", u.m)
    area: float = _si("area", u.m ** 2)
    n_dc: int = TABLE_I["n_dc"]
    n_ac: int = TABLE_I["n_ac"]
    b_sat: float = _si("b_sat", u.T)
    mu_r: float = 2500.0
    v_source: float = 1200.0
    f: float = 60.0
    r_load: float = _si("r_load", u.ohm)
    l_load: float = _si("l_load", u.H)
    i_dc_bias: float = 0.0
    source_rms: bool = False
    fringing: bool = True
    linear: bool = False
    dc_orientation: int = 1

    def invalid_fields(self):
        bad = []
        for name in ("l_mid", "l_outer", "gap", "area", "b_sat", "f", "r_load", "l_load"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                bad.append(name)
        for name in ("n_dc", "n_ac"):
            value = getattr(self, name)
            if not (int(value) == value and value >= 1):
                bad.append(name)
        if not (np.isfinite(self.mu_r) and self.mu_r > 1):
            bad.append("mu_r")
        for name in ("v_source", "i_dc_bias"):
            if not np.isfinite(getattr(self, name)):
                bad.append(name)
        if self.dc_orientation not in (1, -1):
            bad.append("dc_orientation")
        return bad

    @property
    def source_amplitude(self):
        return self.v_source * np.sqrt(2) if self.source_rms else self.v_source

    @property
    def curve(self):
        return magnetics.SaturationCurve(b_sat=self.b_sat, mu_r_initial=self.mu_r)

    @property
    def mid_geometry(self):
        return magnetics.CoreLegGeometry(self.l_mid, self.area)

    @property
    def outer_geometry(self):
        return magnetics.CoreLegGeometry(self.l_outer, self.area)

    @property
    def omega(self):
        return 2 * np.pi * self.f


@dataclass(frozen=True)
class ScenarioSpec:
    label: str
    v_source: float
    i_dc_bias: float


def load_power_factor(params):
    return params.r_load / np.hypot(params.r_load, params.omega * params.l_load)


def gap_permeance(params):
    if params.fringing:
        return magnetics.gap_permeance_with_fringing(params.gap, params.area)
    return magnetics.linear_permeance(magnetics.CoreLegGeometry(params.gap, params.area), 1.0)


def build_cvsr(params=CvsrParams()):
    """
    Gyrator-capacitor circuit of the three-legged CVSR.

    Magnetic side (bottom yoke is the magnetic ground, yokes folded into the leg lengths): the middle branch is
    the ac winding port, the nonlinear middle leg and the gap permeance in series, carrying flux upward to the
    top node; each outer branch carries flux from the top node down through its nonlinear leg and its dc
    winding port. Electrical side: sine source, ac winding and R-L load in one loop; ideal dc current source
    driving the two dc windings in series with opposite winding sense. The v_dc_total probe is
    N_dc (dPhi_right/dt - dPhi_left/dt); it equals the terminal voltage of the dc string for dc_orientation=+1
    and its negative for -1.

    Args:
        params: CvsrParams.

    Returns:
        Circuit with probes i_ac, v_ac_terminal, phi_mid, phi_left, phi_right, v_dc_total.
    """
    bad = params.invalid_fields()
    if bad:
        raise CvsrBuildError(bad)
    if abs(load_power_factor(params) - TABLE_I["power_factor"]) > 0.01 * TABLE_I["power_factor"]:
        warn("load power factor {0:.4f} differs from the device's rated 0.9 by more than 1%".format(
            load_power_factor(params)))

    b = CircuitBuilder()
    e0 = b.ground(ELECTRICAL)
    m0 = b.ground(MAGNETIC)
    src, ac_out, load_mid = b.node(ELECTRICAL), b.node(ELECTRICAL), b.node(ELECTRICAL)
    dc_top, dc_mid = b.node(ELECTRICAL), b.node(ELECTRICAL)
    top, mid_port, mid_gap, left_port, right_port = [b.node(MAGNETIC) for _ in range(5)]

    b.add(SineVoltageSource("v_src", (src, e0), params.source_amplitude, params.f))
    b.add(Gyrator("ac_winding", (src, ac_out, mid_port, m0), magnetics.WindingGyrator(params.n_ac, 1)))
    b.add(Resistor("r_load", (ac_out, load_mid), params.r_load))
    b.add(Inductor("l_load", (load_mid, e0), params.l_load))

    if params.linear:
        b.add(Capacitor("mid_leg", (mid_port, mid_gap),
                        magnetics.linear_permeance(params.mid_geometry, params.mu_r).value))
    else:
        b.add(FluxCapacitor("mid_leg", (mid_port, mid_gap), params.mid_geometry, params.curve))
    b.add(Capacitor("gap", (mid_gap, top), gap_permeance(params).value))
    for label, port in (("left_leg", left_port), ("right_leg", right_port)):
        if params.linear:
            b.add(Capacitor(label, (top, port), magnetics.linear_permeance(params.outer_geometry, params.mu_r).value))
        else:
            b.add(FluxCapacitor(label, (top, port), params.outer_geometry, params.curve))

    s = params.dc_orientation
    b.add(Gyrator("dc_left", (dc_top, dc_mid, m0, left_port), magnetics.WindingGyrator(params.n_dc, -s)))
    b.add(Gyrator("dc_right", (dc_mid, e0, m0, right_port), magnetics.WindingGyrator(params.n_dc, s)))
    b.add(DCCurrentSource("i_bias", (e0, dc_top), params.i_dc_bias))

    b.probe("i_ac", ("ac_winding", "i"))
    b.probe("v_ac_terminal", ("ac_winding", "v"))
    b.probe("phi_mid", ("mid_leg", "phi"))
    b.probe("phi_left", ("left_leg", "phi"))
    b.probe("phi_right", ("right_leg", "phi"))
    # N_dc (dPhi_right/dt - dPhi_left/dt) whatever the winding sense
    b.probe("v_dc_total", ("dc_left", "v", s), ("dc_right", "v", s))
    return b.build()


def published_scenarios():
    """
    The six published operating points: {1.2 kV, 3.8 kV} x {0 A, 200 mA (critical bias), 10 A}.
    """
    scenarios = []
    for v_source in (1.2 * u.kV, 3.8 * u.kV):
        for i_dc, name in ((0 * u.A, "0A"), (200 * u.mA, "200mA-critical"), (10 * u.A, "10A")):
            label = "{0:.1f}kV-{1}".format(v_source.to(u.kV).value, name)
            scenarios.append(ScenarioSpec(label, float(v_source.to(u.V).value), float(i_dc.to(u.A).value)))
    return scenarios


def bias_sweep_scenarios(i_from, i_to, steps, v_source=1200.0):
    """
    Evenly spaced dc bias scenarios at a fixed source voltage.

    Args:
        i_from: First bias current in A.
        i_to: Last bias current in A.
        steps: Number of points (>= 2), both ends included.
        v_source: Source voltage in V.

    Returns:
        list of ScenarioSpec labeled sweep-<index>-<bias>A
    """
    if int(steps) != steps or steps < 2:
        raise ValueError("a bias sweep needs an integer number of steps >= 2, got {0}".format(steps))
    currents = np.linspace(i_from, i_to, int(steps))
    width = len(str(int(steps) - 1))
    return [ScenarioSpec("sweep-{0:0{1}d}-{2:.6g}A".format(k, width, i_dc), float(v_source), float(i_dc))
            for k, i_dc in enumerate(currents)]


def scenario_params(params, scenario):
    return replace(params, v_source=scenario.v_source, i_dc_bias=scenario.i_dc_bias)


def equivalent_permeance_unsaturated(params=CvsrParams()):
    """
    Permeance of the unsaturated device seen from the ac winding: the gap in series with the middle leg, in
    series with the two outer legs in parallel, all legs at mu_r. The analytic inductance is
    params.n_ac ** 2 * value.
    """
    mid = magnetics.linear_permeance(params.mid_geometry, params.mu_r)
    outer = magnetics.linear_permeance(params.outer_geometry, params.mu_r)
    return gap_permeance(params).series(mid, outer.parallel(outer))


def permeance_inductance(waveforms, params):
    """
    Instantaneous inductance n_ac^2 P_eq(t), with P_eq built from the differential permeance of every leg at
    its mmf sample. Secondary estimate next to lambda/i.

    Args:
        waveforms: WaveformSet of a build_cvsr() run (needs v_mid_leg, v_left_leg, v_right_leg).
        params: CvsrParams of that run.

    Returns:
        inductance series in H
    """
    def leg(label, geometry):
        if params.linear:
            return np.full(waveforms.n_samples, magnetics.linear_permeance(geometry, params.mu_r).value)
        return np.atleast_1d(magnetics.differential_permeance(waveforms["v_" + label], geometry, params.curve))

    p_mid = leg("mid_leg", params.mid_geometry)
    p_outer = leg("left_leg", params.outer_geometry) + leg("right_leg", params.outer_geometry)
    reluctance = gap_permeance(params).reluctance + 1.0 / p_mid + 1.0 / p_outer
    return params.n_ac ** 2 / reluctance
