import numpy as np
import pytest

from gcsim.circuit import CircuitBuilder, Circuit, NodeRef, CircuitValidationError, NumericalInputError, validate, \
    initial_state, stamp_system, extract_channels
from gcsim.elements.element import Element, ELECTRICAL, MAGNETIC
from gcsim.elements.passive import Resistor, Capacitor, Inductor
from gcsim.elements.magnetic import FluxCapacitor, Gyrator
from gcsim.elements.sources import DCVoltageSource, DCCurrentSource, SineVoltageSource, ramp_factor
from gcsim.magnetics import CoreLegGeometry, SaturationCurve, WindingGyrator, flux_of_mmf
from gcsim.solver import SolverConfig, step


def potential_of(circuit, state, node):
    index = circuit.layout[0][node.id]
    return 0.0 if index < 0 else state.unknowns[index]


def run_steps(circuit, n_steps, dt):
    state = initial_state(circuit)
    states = [state]
    for _ in range(n_steps):
        state = step(circuit, state, SolverConfig(dt=dt), dt=dt)
        states.append(state)
    return states


def series_divider():
    b = CircuitBuilder()
    e0 = b.ground(ELECTRICAL)
    n1, n2 = b.node(ELECTRICAL), b.node(ELECTRICAL)
    b.add(DCVoltageSource("vs", (n1, e0), 1.0))
    b.add(Resistor("r1", (n1, n2), 1.0))
    b.add(Resistor("r2", (n2, e0), 1.0))
    return b.build(), n2


class TestValidate:

    def test_valid_circuit(self):
        circuit, _ = series_divider()
        assert validate(circuit) == []

    def test_missing_ground(self):
        b = CircuitBuilder()
        n1 = b.node(ELECTRICAL)
        n2 = b.node(ELECTRICAL)
        b.add(Resistor("r", (n1, n2), 1.0))
        assert "missing ground: electrical" in validate(b.build())

    def test_floating_node(self):
        b = CircuitBuilder()
        e0 = b.ground(ELECTRICAL)
        n1, n2, n3 = b.node(ELECTRICAL), b.node(ELECTRICAL), b.node(ELECTRICAL)
        b.add(Resistor("r1", (n1, e0), 1.0))
        b.add(Resistor("r2", (n2, n3), 1.0))
        violations = validate(b.build())
        assert any("floating node {0}".format(n2.id) in v for v in violations)
        assert any("floating node {0}".format(n3.id) in v for v in violations)

    def test_domain_mismatch(self):
        b = CircuitBuilder()
        e0 = b.ground(ELECTRICAL)
        m0 = b.ground(MAGNETIC)
        n1 = b.node(ELECTRICAL)
        b.add(Resistor("r1", (n1, e0), 1.0))
        b.add(Resistor("bad", (n1, m0), 1.0))
        assert any("domain mismatch" in v for v in validate(b.build()))

    def test_gyrator_port_domains(self):
        b = CircuitBuilder()
        e0 = b.ground(ELECTRICAL)
        m0 = b.ground(MAGNETIC)
        n1, m1 = b.node(ELECTRICAL), b.node(MAGNETIC)
        b.add(Resistor("r", (n1, e0), 1.0))
        b.add(Capacitor("p", (m1, m0), 1e-6))
        b.add(Gyrator("g", (m1, m0, n1, e0), WindingGyrator(10)))
        assert any("domain mismatch" in v for v in validate(b.build()))

    def test_duplicate_label_and_bad_parameter(self):
        b = CircuitBuilder()
        e0 = b.ground(ELECTRICAL)
        n1 = b.node(ELECTRICAL)
        b.add(Resistor("r", (n1, e0), 1.0))
        b.add(Resistor("r", (n1, e0), -2.0))
        violations = validate(b.build())
        assert "duplicate element label 'r'" in violations
        assert any("strictly positive" in v for v in violations)

    def test_non_finite_parameter(self):
        b = CircuitBuilder()
        e0 = b.ground(ELECTRICAL)
        n1 = b.node(ELECTRICAL)
        b.add(Capacitor("c", (n1, e0), np.nan))
        assert any("not finite" in v for v in validate(b.build()))

    def test_unknown_node(self):
        b = CircuitBuilder()
        e0 = b.ground(ELECTRICAL)
        b.add(Resistor("r", (NodeRef(7, ELECTRICAL), e0), 1.0))
        assert any("unknown node 7" in v for v in validate(b.build()))

    def test_probe_on_unknown_element(self):
        circuit, _ = series_divider()
        b = CircuitBuilder()
        b.probe("x", ("nothing", "i"))
        circuit = Circuit(circuit.nodes, circuit.elements, circuit.grounds, b.probes)
        assert any("probe 'x'" in v for v in validate(circuit))

    def test_validate_does_not_raise_but_stamp_does(self):
        b = CircuitBuilder()
        n1, n2 = b.node(ELECTRICAL), b.node(ELECTRICAL)
        b.add(Resistor("r", (n1, n2), 1.0))
        circuit = b.build()
        assert validate(circuit)
        with pytest.raises(CircuitValidationError):
            stamp_system(circuit, initial_state(circuit), np.zeros(circuit.n_unknowns), 1e-3)


def test_kinds_implemented():
    assert Element.kinds_implemented() == sorted(["resistor", "inductor", "capacitor", "flux_capacitor", "gyrator",
                                                  "source_dc", "source_sine", "source_current_dc"])


class TestStampSystem:

    def test_rejects_non_finite_candidate(self):
        circuit, _ = series_divider()
        candidate = np.zeros(circuit.n_unknowns)
        candidate[0] = np.nan
        with pytest.raises(NumericalInputError):
            stamp_system(circuit, initial_state(circuit), candidate, 1e-3)

    @pytest.mark.parametrize("dt", [0.0, -1e-3])
    def test_rejects_nonpositive_dt(self, dt):
        circuit, _ = series_divider()
        with pytest.raises(ValueError):
            stamp_system(circuit, initial_state(circuit), np.zeros(circuit.n_unknowns), dt)

    def test_linear_system_shape(self):
        circuit, _ = series_divider()
        system = stamp_system(circuit, initial_state(circuit), np.zeros(circuit.n_unknowns), 1e-3)
        assert system.matrix.shape == (circuit.n_unknowns, circuit.n_unknowns)
        assert system.rhs.shape == (circuit.n_unknowns,)


def test_series_resistors_divide_voltage():
    circuit, mid = series_divider()
    states = run_steps(circuit, 1, 1e-3)
    assert potential_of(circuit, states[-1], mid) == pytest.approx(0.5, rel=1e-9)


def test_gyrator_sets_port_mmf():
    b = CircuitBuilder()
    e0 = b.ground(ELECTRICAL)
    m0 = b.ground(MAGNETIC)
    a, m1 = b.node(ELECTRICAL), b.node(MAGNETIC)
    b.add(DCCurrentSource("i1", (e0, a), 1.0))
    b.add(Gyrator("winding", (a, e0, m1, m0), WindingGyrator(150)))
    b.add(Capacitor("core", (m1, m0), 1e-6))
    circuit = b.build()
    assert validate(circuit) == []

    states = run_steps(circuit, 3, 1e-3)
    channels = extract_channels(circuit, states)
    assert channels["mmf_winding"][-1] == pytest.approx(150.0, rel=1e-9)
    assert channels["i_winding"][-1] == pytest.approx(1.0, rel=1e-9)
    assert channels["phi_core"][-1] == pytest.approx(150.0 * 1e-6, rel=1e-9)
    # the port pair is lossless
    np.testing.assert_allclose(channels["v_winding"] * channels["i_winding"],
                               channels["mmf_winding"] * channels["f_winding"], rtol=1e-9, atol=1e-12)


def test_rc_discharge():
    b = CircuitBuilder()
    e0 = b.ground(ELECTRICAL)
    n1 = b.node(ELECTRICAL)
    b.add(Capacitor("c", (n1, e0), 1.0, initial_voltage=1.0))
    b.add(Resistor("r", (n1, e0), 1.0))
    circuit = b.build()
    states = run_steps(circuit, 1000, 1e-3)
    assert states[-1].time == pytest.approx(1.0)
    assert potential_of(circuit, states[-1], n1) == pytest.approx(np.exp(-1.0), abs=1e-4)
    assert extract_channels(circuit, states)["q_c"][-1] == pytest.approx(np.exp(-1.0), abs=1e-4)


def test_inductor_current_builds_up():
    b = CircuitBuilder()
    e0 = b.ground(ELECTRICAL)
    n1, n2 = b.node(ELECTRICAL), b.node(ELECTRICAL)
    b.add(DCVoltageSource("vs", (n1, e0), 1.0))
    b.add(Resistor("r", (n1, n2), 1.0))
    b.add(Inductor("l", (n2, e0), 1.0))
    circuit = b.build()
    states = run_steps(circuit, 1000, 1e-3)
    assert extract_channels(circuit, states)["i_l"][-1] == pytest.approx(1 - np.exp(-1.0), abs=1e-4)


def test_flux_capacitor_integrates_flux_rate():
    b = CircuitBuilder()
    m0 = b.ground(MAGNETIC)
    m1 = b.node(MAGNETIC)
    geometry = CoreLegGeometry(1.0, 1.0)
    curve = SaturationCurve(b_sat=2.0, mu_r_initial=8000.0)
    b.add(DCCurrentSource("flux_rate", (m0, m1), 1.0))
    b.add(FluxCapacitor("core", (m1, m0), geometry, curve))
    circuit = b.build()
    assert validate(circuit) == []

    states = run_steps(circuit, 10, 0.1)
    channels = extract_channels(circuit, states)
    assert channels["phi_core"][-1] == pytest.approx(1.0, rel=1e-8)
    assert channels["phi_int_core"][-1] == pytest.approx(1.0, rel=1e-8)
    assert flux_of_mmf(channels["v_core"][-1], geometry, curve) == pytest.approx(1.0, rel=1e-8)


def test_domains_do_not_interact_without_gyrators():
    def build(permeance):
        b = CircuitBuilder()
        e0 = b.ground(ELECTRICAL)
        m0 = b.ground(MAGNETIC)
        n1, n2, m1 = b.node(ELECTRICAL), b.node(ELECTRICAL), b.node(MAGNETIC)
        b.add(SineVoltageSource("vs", (n1, e0), 10.0, 50.0))
        b.add(Resistor("r", (n1, n2), 10.0))
        b.add(Capacitor("c", (n2, e0), 1e-4))
        b.add(DCVoltageSource("mmf", (m1, m0), 100.0))
        b.add(Capacitor("p", (m1, m0), permeance))
        return b.build()

    a = extract_channels(build(1e-6), run_steps(build(1e-6), 50, 1e-4))
    b = extract_channels(build(5e-5), run_steps(build(5e-5), 50, 1e-4))
    np.testing.assert_allclose(a["v_c"], b["v_c"], rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(a["i_r"], b["i_r"], rtol=1e-9, atol=1e-12)
    assert not np.array_equal(a["phi_p"], b["phi_p"])


def test_runs_are_deterministic():
    circuit, _ = series_divider()
    first = extract_channels(circuit, run_steps(circuit, 5, 1e-3))
    second = extract_channels(circuit, run_steps(circuit, 5, 1e-3))
    for name in first.channels:
        np.testing.assert_array_equal(first[name], second[name])


def test_channel_names_and_probes():
    b = CircuitBuilder()
    e0 = b.ground(ELECTRICAL)
    m0 = b.ground(MAGNETIC)
    a, m1 = b.node(ELECTRICAL), b.node(MAGNETIC)
    b.add(DCCurrentSource("i1", (e0, a), 1.0))
    b.add(Gyrator("w", (a, e0, m1, m0), WindingGyrator(10)))
    b.add(FluxCapacitor("leg", (m1, m0), CoreLegGeometry(1.0, 1e-2), SaturationCurve()))
    b.probe("twice_current", ("w", "i"), ("i1", "i"))
    b.probe("minus_mmf", ("w", "mmf", -1))
    circuit = b.build()
    channels = extract_channels(circuit, run_steps(circuit, 2, 1e-3))
    for name in ("i_w", "v_w", "f_w", "mmf_w", "i_leg", "v_leg", "phi_leg", "phi_int_leg", "i_i1", "v_i1"):
        assert name in channels
    np.testing.assert_allclose(channels["twice_current"], channels["i_w"] + channels["i_i1"])
    np.testing.assert_allclose(channels["minus_mmf"], -channels["mmf_w"])
    assert channels.n_samples == 3


def test_extract_channels_needs_states():
    circuit, _ = series_divider()
    with pytest.raises(ValueError):
        extract_channels(circuit, [])
    with pytest.raises(ValueError):
        extract_channels(circuit, [initial_state(circuit)])
    assert extract_channels(circuit, [initial_state(circuit)], dt=1e-3).n_samples == 1


class TestRamps:

    def test_with_ramps_returns_new_circuit(self):
        circuit, _ = series_divider()
        ramped = circuit.with_ramps({"vs": 0.1})
        assert ramped.element("vs").ramp_time == 0.1
        assert circuit.element("vs").ramp_time is None

    def test_with_ramps_rejects_non_sources(self):
        circuit, _ = series_divider()
        with pytest.raises(ValueError):
            circuit.with_ramps({"r1": 0.1})

    @pytest.mark.parametrize("shape", ["smooth", "linear"])
    def test_ramp_factor_limits(self, shape):
        assert ramp_factor(-1.0, 1.0, shape) == 0.0
        assert ramp_factor(0.5, 1.0, shape) == pytest.approx(0.5)
        assert ramp_factor(2.0, 1.0, shape) == 1.0
        assert ramp_factor(0.3, None, shape) == 1.0

    def test_smooth_ramp_is_flat_at_both_ends(self):
        eps = 1e-6
        assert ramp_factor(eps, 1.0, "smooth") < 1e-15
        assert 1.0 - ramp_factor(1.0 - eps, 1.0, "smooth") < 1e-15
