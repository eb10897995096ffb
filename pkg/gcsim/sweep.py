import multiprocessing as mp
import numpy as np
import itertools
from dataclasses import dataclass
from warnings import warn

from gcsim import analysis
from gcsim.cvsr import build_cvsr, scenario_params, equivalent_permeance_unsaturated
from gcsim.solver import SolverConfig, run_transient, NonConvergenceError, TransientError
from gcsim.utils import chunk_indices, is_monotone_nonincreasing

OUTPUT_COLUMNS = ("i_ac", "v_ac_terminal", "B_mid", "B_left", "B_right", "v_dc", "L_inst")

# reactive power the device reportedly draws into the dc windings at 1.2 kV / 200 mA (var); indicative only
Q_DC_PUBLISHED = 2300.0


@dataclass(frozen=True)
class ScenarioOutcome:
    """
    Result of one scenario, reduced to what the cli writes so that it pickles cheaply between processes.

    Args:
        label: Scenario label.
        summary: Summary dict (None if the run failed).
        table: Output channels over the analysis window as a DataFrame (t first), or the accepted steps of a
            failed run.
        full_table: Output channels over the whole run, or None.
        error: Failure message, None on success.
    """
    label: str
    summary: dict
    table: object
    full_table: object = None
    error: str = None

    @property
    def converged(self):
        return self.error is None


def output_channels(waveforms, params):
    """
    The cli columns of a build_cvsr() run: i_ac, v_ac_terminal, B_mid, B_left, B_right, v_dc, L_inst.
    L_inst is 0 when the ac current is identically zero.
    """
    i_ac = waveforms["i_ac"]
    try:
        inductance, _ = analysis.equivalent_inductance(params.n_ac * waveforms["phi_mid"], i_ac)
    except ValueError:
        inductance = np.zeros(np.size(i_ac))
    return analysis.WaveformSet(waveforms.t0, waveforms.dt, {
        "i_ac": i_ac,
        "v_ac_terminal": waveforms["v_ac_terminal"],
        "B_mid": analysis.flux_density(waveforms["phi_mid"], params.area),
        "B_left": analysis.flux_density(waveforms["phi_left"], params.area),
        "B_right": analysis.flux_density(waveforms["phi_right"], params.area),
        "v_dc": waveforms["v_dc_total"],
        "L_inst": inductance,
    })


def summarize(result, params, label, dc_rtol=5e-3):
    """
    Per-scenario summary of a transient run of build_cvsr(params).

    v_dc is the v_dc_total probe built from the dc winding ports; it is cross-checked against
    N_dc d(Phi_r - Phi_l)/dt from the leg fluxes and a warning is issued when they differ by more than dc_rtol
    in rms.

    Returns:
        dict with label, v_source, i_dc_bias, L_peak, L_mean, L_analytic, P_dc, Q_dc, S_dc, Q_dc_published,
        thd_i_ac, i_ac_peak, v_dc_dominant_freq, v_dc_max_abs, v_dc_peak_pos, v_dc_peak_neg, B_peaks,
        solver_stats
    """
    waveforms = result.waveforms
    i_ac = waveforms["i_ac"]
    v_dc = waveforms["v_dc_total"]

    v_dc_check = analysis.dc_winding_voltage(waveforms["phi_right"], waveforms["phi_left"], params.n_dc,
                                             waveforms.dt)
    mismatch = analysis.rms(v_dc - v_dc_check)
    if mismatch > dc_rtol * analysis.rms(v_dc) + 1e-6 * abs(params.source_amplitude):
        warn("{0}: dc winding voltage differs from N_dc d(Phi_r - Phi_l)/dt by {1:.4g} V rms".format(
            label, mismatch))

    try:
        inductance, l_mean = analysis.equivalent_inductance(params.n_ac * waveforms["phi_mid"], i_ac)
        l_peak = float(np.max(inductance))
    except ValueError:
        l_peak, l_mean = None, None

    # power into the dc string from its terminal voltage and the bias current
    dc_power = analysis.power_summary(waveforms["v_dc_left"] + waveforms["v_dc_right"], waveforms["i_i_bias"])
    i_spectrum = analysis.spectrum(i_ac, waveforms.dt, result.frequency)
    v_spectrum = analysis.spectrum(v_dc, waveforms.dt, result.frequency)
    v_dc_pos, v_dc_neg = analysis.half_cycle_peaks(v_dc)

    return {
        "label": label,
        "v_source": float(params.v_source),
        "i_dc_bias": float(params.i_dc_bias),
        "L_peak": l_peak,
        "L_mean": l_mean,
        "L_analytic": float(equivalent_permeance_unsaturated(params).inductance(params.n_ac)),
        "P_dc": dc_power.p_real,
        "Q_dc": dc_power.q_reactive,
        "S_dc": dc_power.s_apparent,
        "Q_dc_published": Q_DC_PUBLISHED,
        "thd_i_ac": float(i_spectrum.thd),
        "i_ac_peak": float(np.max(np.abs(i_ac))),
        "v_dc_dominant_freq": v_spectrum.dominant_frequency,
        "v_dc_max_abs": float(np.max(np.abs(v_dc))),
        "v_dc_peak_pos": v_dc_pos,
        "v_dc_peak_neg": v_dc_neg,
        "B_peaks": {leg: float(np.max(np.abs(analysis.flux_density(waveforms["phi_" + leg], params.area))))
                    for leg in ("mid", "left", "right")},
        "solver_stats": result.solver_stats.to_dict(),
    }


def run_scenario(scenario, params, solver_config=SolverConfig()):
    """
    Build, run and summarize one scenario. Solver failures are returned as a failed outcome holding the
    accepted steps.
    """
    run_params = scenario_params(params, scenario)
    try:
        result = run_transient(build_cvsr(run_params), config=solver_config)
    except TransientError as e:
        partial = output_channels(e.partial, run_params).to_dataframe(OUTPUT_COLUMNS) \
            if e.partial is not None else None
        return ScenarioOutcome(scenario.label, None, partial, error=str(e))
    except NonConvergenceError as e:
        return ScenarioOutcome(scenario.label, None, None, error=str(e))

    table = output_channels(result.waveforms, run_params).to_dataframe(OUTPUT_COLUMNS)
    full_table = None
    if result.full_waveforms is not None:
        full_table = output_channels(result.full_waveforms, run_params).to_dataframe(OUTPUT_COLUMNS)
    return ScenarioOutcome(scenario.label, summarize(result, run_params, scenario.label), table, full_table)


def process_chunk(args):
    """
    Process for run_scenarios()
    """
    scenarios, params, solver_config, verbose = args

    out_chunk = []
    for scenario in scenarios:
        outcome = run_scenario(scenario, params, solver_config)
        if verbose:
            if outcome.converged:
                print("[sweep] scenario={0} done, {1} steps".format(
                    scenario.label, outcome.summary["solver_stats"]["steps"]))
            else:
                print("[sweep] scenario={0} failed: {1}".format(scenario.label, outcome.error))
        out_chunk.append(outcome)
    return out_chunk


def run_scenarios(scenarios, params, solver_config=SolverConfig(), numthreads=None, verbose=False):
    """
    Run independent CVSR scenarios, optionally spread over a process pool.

    Args:
        scenarios: List of ScenarioSpec with unique labels.
        params: CvsrParams shared by every scenario (v_source and i_dc_bias are taken from the scenario).
        solver_config: SolverConfig.
        numthreads: Number of processes. No parallelization if None (default).
        verbose: Print one line per finished scenario.

    Returns:
        List of ScenarioOutcome in the order of `scenarios`.
    """
    labels = [s.label for s in scenarios]
    if len(set(labels)) != len(labels):
        raise ValueError("scenario labels must be unique, got {0}".format(labels))
    if len(scenarios) == 0:
        return []

    if numthreads is None:
        return process_chunk((scenarios, params, solver_config, verbose))

    indices_list = chunk_indices(len(scenarios), numthreads)
    mypool = mp.Pool(processes=numthreads)
    output_lists = mypool.map(process_chunk, zip([[scenarios[k] for k in indices] for indices in indices_list],
                                                 itertools.repeat(params),
                                                 itertools.repeat(solver_config),
                                                 itertools.repeat(verbose)))
    mypool.close()
    mypool.join()
    return list(itertools.chain.from_iterable(output_lists))


def sweep_summary(outcomes):
    """
    L_mean against dc bias over a bias sweep, with a warning when it is not monotone nonincreasing.

    Returns:
        dict {i_dc, L_mean, monotone_nonincreasing}, failed or undefined points omitted
    """
    points = [(o.summary["i_dc_bias"], o.summary["L_mean"]) for o in outcomes
              if o.converged and o.summary["L_mean"] is not None]
    i_dc = [p[0] for p in points]
    l_mean = [p[1] for p in points]
    monotone = is_monotone_nonincreasing(l_mean) if len(l_mean) > 1 else True
    if not monotone:
        warn("L_mean is not monotone nonincreasing in the dc bias over the sweep")
    return {"i_dc": i_dc, "L_mean": l_mean, "monotone_nonincreasing": monotone}
