import numpy as np
import matplotlib.pyplot as plt

from gcsim.cvsr import CvsrParams, build_cvsr, published_scenarios, scenario_params, permeance_inductance
from gcsim.solver import SolverConfig, run_transient
from gcsim.sweep import output_channels, summarize

if __name__ == "__main__":
    params = CvsrParams()
    solver_config = SolverConfig(dt=1e-5)

    for scenario in published_scenarios():
        run_params = scenario_params(params, scenario)
        result = run_transient(build_cvsr(run_params), config=solver_config)
        channels = output_channels(result.waveforms, run_params)
        summary = summarize(result, run_params, scenario.label)
        print(scenario.label, "L_peak", summary["L_peak"], "L_mean", summary["L_mean"],
              "thd_i_ac", summary["thd_i_ac"], "v_dc_dominant_freq", summary["v_dc_dominant_freq"])

        t_ms = 1e3 * (channels.t - channels.t0)
        plt.figure(scenario.label, figsize=(8, 9))
        plt.subplot(3, 1, 1)
        plt.title(scenario.label)
        for leg in ("mid", "left", "right"):
            plt.plot(t_ms, channels["B_" + leg], label="B_" + leg)
        plt.axhline(run_params.b_sat, color="grey", linestyle="--")
        plt.axhline(-run_params.b_sat, color="grey", linestyle="--")
        plt.ylabel("B (T)")
        plt.legend()
        plt.subplot(3, 1, 2)
        plt.plot(t_ms, channels["v_dc"], label="v_dc")
        plt.ylabel("V")
        plt.legend()
        plt.subplot(3, 1, 3)
        plt.plot(t_ms, channels["L_inst"], label="lambda / i")
        plt.plot(t_ms, permeance_inductance(result.waveforms, run_params), label="n_ac^2 P_eq", linestyle=":")
        plt.axhline(summary["L_mean"] or np.nan, color="black", linestyle="--", label="mean")
        plt.xlabel("t (ms)")
        plt.ylabel("L (H)")
        plt.legend()
    plt.show()
