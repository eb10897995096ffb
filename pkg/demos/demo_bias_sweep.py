import matplotlib.pyplot as plt

from gcsim.cvsr import CvsrParams, bias_sweep_scenarios
from gcsim.solver import SolverConfig
from gcsim.sweep import run_scenarios, sweep_summary

if __name__ == "__main__":
    numthreads = 8

    scenarios = bias_sweep_scenarios(0, 10, 21, v_source=1200)
    outcomes = run_scenarios(scenarios, CvsrParams(), SolverConfig(dt=1e-5), numthreads=numthreads, verbose=True)
    sweep = sweep_summary(outcomes)
    print("monotone nonincreasing:", sweep["monotone_nonincreasing"])

    plt.plot(sweep["i_dc"], sweep["L_mean"], "o-")
    plt.xlabel("dc bias (A)")
    plt.ylabel("mean inductance (H)")
    plt.show()
