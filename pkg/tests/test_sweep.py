import numpy as np
import pytest

from gcsim import sweep
from gcsim.analysis import WaveformSet
from gcsim.cvsr import CvsrParams, ScenarioSpec, bias_sweep_scenarios
from gcsim.solver import SolverConfig
from gcsim.sweep import ScenarioOutcome, run_scenarios, sweep_summary

COARSE = SolverConfig(dt=1e-4, startup_ramp_cycles=1, settle_cycles=1, analysis_cycles=1)


@pytest.fixture(scope="module")
def coarse_sweep():
    return run_scenarios(bias_sweep_scenarios(0.0, 10.0, 3), CvsrParams(), COARSE)


def test_sweep_keeps_scenario_order(coarse_sweep):
    assert [o.label for o in coarse_sweep] == ["sweep-0-0A", "sweep-1-5A", "sweep-2-10A"]
    assert all(o.converged for o in coarse_sweep)
    assert list(coarse_sweep[0].table.columns) == ["t"] + list(sweep.OUTPUT_COLUMNS)


def test_bias_lowers_mean_inductance(coarse_sweep):
    result = sweep_summary(coarse_sweep)
    assert result["i_dc"] == [0.0, 5.0, 10.0]
    assert result["monotone_nonincreasing"]
    assert result["L_mean"][2] < 0.5 * result["L_mean"][0]


def test_process_pool_matches_sequential_run(coarse_sweep):
    pooled = run_scenarios(bias_sweep_scenarios(0.0, 10.0, 3), CvsrParams(), COARSE, numthreads=2)
    for a, b in zip(pooled, coarse_sweep):
        assert a.label == b.label
        assert a.summary == b.summary
        assert a.table.equals(b.table)


def test_duplicate_labels():
    scenarios = [ScenarioSpec("a", 1200.0, 0.0), ScenarioSpec("a", 1200.0, 1.0)]
    with pytest.raises(ValueError):
        run_scenarios(scenarios, CvsrParams(), COARSE)


def test_no_scenarios():
    assert run_scenarios([], CvsrParams(), COARSE) == []


def outcome(label, i_dc, l_mean, error=None):
    summary = None if error else {"i_dc_bias": i_dc, "L_mean": l_mean}
    return ScenarioOutcome(label, summary, None, error=error)


class TestSweepSummary:

    def test_non_monotone_curve_warns(self):
        with pytest.warns(UserWarning, match="monotone"):
            result = sweep_summary([outcome("a", 0.0, 0.1), outcome("b", 1.0, 0.2)])
        assert not result["monotone_nonincreasing"]

    def test_failed_and_undefined_points_are_skipped(self):
        result = sweep_summary([outcome("a", 0.0, 0.2), outcome("b", 1.0, None, error="boom"),
                                outcome("c", 2.0, None), outcome("d", 3.0, 0.1)])
        assert result == {"i_dc": [0.0, 3.0], "L_mean": [0.2, 0.1], "monotone_nonincreasing": True}

    def test_single_point(self):
        assert sweep_summary([outcome("a", 0.0, 0.2)])["monotone_nonincreasing"]


def test_output_channels_without_current():
    params = CvsrParams()
    zeros = np.zeros(4)
    waveforms = WaveformSet(0.0, 1e-4, {"i_ac": zeros, "v_ac_terminal": zeros, "phi_mid": zeros,
                                         "phi_left": zeros, "phi_right": zeros, "v_dc_total": zeros})
    out = sweep.output_channels(waveforms, params)
    np.testing.assert_array_equal(out["L_inst"], zeros)
    np.testing.assert_array_equal(out["B_mid"], zeros)
