import argparse
import json
import re
import sys
import numpy as np
import yaml
from dataclasses import dataclass, fields, replace
from pathlib import Path

from gcsim.cvsr import CvsrParams, ScenarioSpec, published_scenarios, bias_sweep_scenarios
from gcsim.solver import SolverConfig
from gcsim.sweep import run_scenarios, sweep_summary

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONCONVERGENCE = 2
EXIT_IO = 3

# v_source and i_dc_bias come from the scenarios
CVSR_KEYS = {f.name: f for f in fields(CvsrParams) if f.name not in ("v_source", "i_dc_bias")}
SOLVER_KEYS = {f.name: f for f in fields(SolverConfig) if f.name != "keep_full_waveforms"}
SWEEP_KEYS = ("i_dc_from", "i_dc_to", "steps", "v_source")
TOP_KEYS = ("scenarios", "output_dir", "emit_full_waveforms", "numthreads", "verbose")
SCENARIO_KEYS = ("label", "v_source", "i_dc_bias")
# both name the six published operating points
PUBLISHED_KEYWORDS = ("published", "paper")
LABEL_PATTERN = re.compile(r"^[A-Za-z0-9._-]+$")
# `key = value` lines, optionally as a sequence entry
ASSIGNMENT_PATTERN = re.compile(r"^(\s*(?:-\s+)?)([A-Za-z_][A-Za-z0-9_.]*)\s*=\s*(.*)$")


class ConfigError(ValueError):
    """
    Config diagnostic. `line` is 1-based (None when the problem is not tied to a line), `key` the dotted key.
    """
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        location = "line {0}: ".format(line) if line is not None else ""
        super().__init__(location + message)


@dataclass(frozen=True)
class SweepSpec:
    i_dc_from: float = 0.0
    i_dc_to: float = 10.0
    steps: int = 21
    v_source: float = 1200.0

    def scenarios(self):
        return bias_sweep_scenarios(self.i_dc_from, self.i_dc_to, self.steps, self.v_source)


@dataclass(frozen=True)
class RunConfig:
    """
    Args:
        cvsr: CvsrParams shared by every scenario.
        solver: SolverConfig.
        scenarios: "published" (or its alias "paper") or a list of ScenarioSpec. Ignored when sweep is set.
        sweep: SweepSpec or None.
        output_dir: Directory receiving the CSV files and summary.json.
        emit_full_waveforms: Also write <label>_full.csv over the whole run.
        numthreads: Process pool size, sequential if None.
        verbose: Print progress lines.
    """
    cvsr: CvsrParams = CvsrParams()
    solver: SolverConfig = SolverConfig()
    scenarios: object = "published"
    sweep: SweepSpec = None
    output_dir: str = "results"
    emit_full_waveforms: bool = False
    numthreads: int = None
    verbose: bool = False

    def scenario_list(self):
        if self.sweep is not None:
            return self.sweep.scenarios()
        if isinstance(self.scenarios, str) and self.scenarios in PUBLISHED_KEYWORDS:
            return published_scenarios()
        return list(self.scenarios)


def _key_lines(node, prefix="", lines=None, raw=None):
    """
    Index a composed YAML document. Sequence entries are keyed by index.

    Returns:
        lines: dotted key -> 1-based line of the key
        raw: dotted key -> source text of its scalar value, before YAML resolves it to a bool, number or null
    """
    lines = {} if lines is None else lines
    raw = {} if raw is None else raw
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = prefix + str(key_node.value)
            lines[key] = key_node.start_mark.line + 1
            if isinstance(value_node, yaml.ScalarNode):
                raw[key] = value_node.value
            _key_lines(value_node, key + ".", lines, raw)
    elif isinstance(node, yaml.SequenceNode):
        for k, item in enumerate(node.value):
            lines[prefix + str(k)] = item.start_mark.line + 1
            _key_lines(item, prefix + str(k) + ".", lines, raw)
    return lines, raw


def _normalize_assignments(text):
    """
    Rewrite `key = value` lines as `key: value`, leaving every other line and the line numbering as is.
    """
    return "\n".join(ASSIGNMENT_PATTERN.sub(r"\1\2: \3", line) for line in text.split("\n"))


def _flatten(mapping, prefix=""):
    flat = {}
    for key, value in mapping.items():
        key = prefix + str(key)
        if isinstance(value, dict) and key in ("cvsr", "solver", "sweep"):
            flat.update(_flatten(value, key + "."))
        else:
            flat[key] = value
    return flat


def _coerce(value, kind, key, line):
    """
    Convert a YAML scalar to the type of a dataclass default. Bools and strings must already have that type,
    ints must be integral and floats accept any real number.
    """
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("{0} must be true or false, got {1!r}".format(key, value), line, key)
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError("{0} must be a string, got {1!r}".format(key, value), line, key)
        return value
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a dot (1e-5) as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("{0} must be a number, got {1!r}".format(key, value), line, key)
    if kind is int:
        if not np.isfinite(value) or int(value) != value:
            raise ConfigError("{0} must be an integer, got {1!r}".format(key, value), line, key)
        return int(value)
    return float(value)


def _parse_scenarios(value, lines, raw):
    if isinstance(value, str) and value in PUBLISHED_KEYWORDS:
        return "published"
    if not isinstance(value, list) or len(value) == 0:
        raise ConfigError("scenarios must be 'published', 'paper' or a non-empty list of "
                          "{label, v_source, i_dc_bias}",
                          lines.get("scenarios"), "scenarios")
    scenarios = []
    for k, entry in enumerate(value):
        line = lines.get("scenarios.{0}".format(k))
        if not isinstance(entry, dict):
            raise ConfigError("scenario entries must be mappings", line, "scenarios")
        for name in entry:
            if name not in SCENARIO_KEYS:
                raise ConfigError("unknown key {0!r} in scenario entry".format(name),
                                  lines.get("scenarios.{0}.{1}".format(k, name), line), "scenarios." + str(name))
        if "label" not in entry or "v_source" not in entry:
            raise ConfigError("scenario entries need a label and a v_source", line, "scenarios")
        label_key = "scenarios.{0}.label".format(k)
        if label_key not in raw:
            raise ConfigError("scenario label must be a string", lines.get(label_key, line), "scenarios.label")
        label = raw[label_key]
        if not LABEL_PATTERN.match(label):
            raise ConfigError("scenario label {0!r} may only hold letters, digits, '.', '_' and '-'".format(label),
                              line, "scenarios.label")
        v_source = _coerce(entry["v_source"], float, "scenarios.v_source", line)
        i_dc_bias = _coerce(entry.get("i_dc_bias", 0.0), float, "scenarios.i_dc_bias", line)
        if not (np.isfinite(v_source) and np.isfinite(i_dc_bias)):
            raise ConfigError("scenario {0!r}: v_source and i_dc_bias must be finite".format(label), line,
                              "scenarios")
        scenarios.append(ScenarioSpec(label, v_source, i_dc_bias))
    labels = [s.label for s in scenarios]
    for label in labels:
        if labels.count(label) > 1:
            raise ConfigError("duplicate scenario label {0!r}".format(label), lines.get("scenarios"), "scenarios")
    return scenarios


def parse_config(text):
    """
    Parse a run configuration: YAML, where a line may also be written as `key = value`. Sections may be
    nested mappings or flat dotted keys:

        cvsr.n_ac = 150
        solver:
          dt: 1.0e-5
        sweep.i_dc_from: 0
        sweep.i_dc_to: 10
        sweep.steps: 21

    Omitted fields keep the CvsrParams / SolverConfig defaults; with neither scenarios nor sweep the six
    published scenarios run.

    Returns:
        RunConfig

    Raises:
        ConfigError: malformed YAML, unknown key, wrong type or out-of-range value, with the line of the key.
    """
    try:
        text = _normalize_assignments(text)
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError("malformed config: {0}".format(getattr(e, "problem", None) or e),
                          mark.line + 1 if mark is not None else None)
    if data is None:
        return RunConfig()
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of keys to values", 1)

    lines, raw = _key_lines(root)
    flat = _flatten(data)

    cvsr, solver, sweep, top = {}, {}, {}, {}
    for key, value in flat.items():
        line = lines.get(key)
        section, _, name = key.partition(".")
        if section == "cvsr" and name in CVSR_KEYS:
            cvsr[name] = _coerce(value, type(CVSR_KEYS[name].default), key, line)
        elif section == "solver" and name in SOLVER_KEYS:
            solver[name] = _coerce(value, type(SOLVER_KEYS[name].default), key, line)
        elif section == "sweep" and name in SWEEP_KEYS:
            sweep[name] = _coerce(value, int if name == "steps" else float, key, line)
        elif key in TOP_KEYS:
            top[key] = value
        else:
            raise ConfigError("unknown key {0!r}".format(key), line, key)

    params = replace(CvsrParams(), **cvsr)
    bad = params.invalid_fields()
    if bad:
        key = "cvsr." + bad[0]
        raise ConfigError("value out of range for {0}: {1!r}".format(bad[0], getattr(params, bad[0])),
                          lines.get(key), key)

    for name, value in solver.items():
        try:
            SolverConfig(**{name: value})
        except ValueError:
            key = "solver." + name
            raise ConfigError("value out of range for {0}: {1!r}".format(name, value), lines.get(key), key)
    solver_config = SolverConfig(**solver)

    sweep_spec = None
    if sweep:
        if "scenarios" in top:
            raise ConfigError("sweep and scenarios are mutually exclusive", lines.get("scenarios"), "scenarios")
        sweep_spec = SweepSpec(**sweep)
        if sweep_spec.steps < 2:
            raise ConfigError("value out of range for steps: a sweep needs steps >= 2, got {0}".format(
                sweep_spec.steps), lines.get("sweep.steps"), "sweep.steps")
        if not all(np.isfinite([sweep_spec.i_dc_from, sweep_spec.i_dc_to, sweep_spec.v_source])):
            raise ConfigError("sweep bounds and v_source must be finite", lines.get("sweep"), "sweep")

    scenarios = _parse_scenarios(top["scenarios"], lines, raw) if "scenarios" in top else "published"
    for key in ("emit_full_waveforms", "verbose"):
        if key in top:
            top[key] = _coerce(top[key], bool, key, lines.get(key))
    if top.get("numthreads") is not None:
        top["numthreads"] = _coerce(top["numthreads"], int, "numthreads", lines.get("numthreads"))
        if top["numthreads"] < 1:
            raise ConfigError("value out of range for numthreads: {0}".format(top["numthreads"]),
                              lines.get("numthreads"), "numthreads")
    if "output_dir" in top and not isinstance(top["output_dir"], str):
        raise ConfigError("output_dir must be a path string", lines.get("output_dir"), "output_dir")

    return RunConfig(cvsr=params, solver=solver_config, scenarios=scenarios, sweep=sweep_spec,
                     output_dir=top.get("output_dir", "results"),
                     emit_full_waveforms=top.get("emit_full_waveforms", False),
                     numthreads=top.get("numthreads"), verbose=top.get("verbose", False))


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_table(table, path):
    table.to_csv(path, float_format="%.8e", index=False, lineterminator="\n")


def write_summary(summary, path):
    with open(path, "w", newline="\n") as f:
        f.write(json.dumps(_json_safe(summary), sort_keys=True, indent=2) + "\n")


def run(config):
    """
    Run every scenario of the config and write <label>.csv per scenario plus summary.json into
    config.output_dir. Failed scenarios leave <label>.csv.partial with their accepted steps, and the summary is
    then written as summary.json.partial.

    Returns:
        exit status: 0 when every scenario converged, 2 otherwise, 3 on I/O errors
    """
    out_dir = Path(config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print("[simulate] cannot create output directory {0}: {1}".format(out_dir, e), file=sys.stderr)
        return EXIT_IO

    scenarios = config.scenario_list()
    solver_config = replace(config.solver, keep_full_waveforms=config.emit_full_waveforms)
    outcomes = run_scenarios(scenarios, config.cvsr, solver_config, numthreads=config.numthreads,
                             verbose=config.verbose)

    summary = {"scenarios": [o.summary for o in outcomes if o.converged],
               "failed": [{"label": o.label, "error": o.error} for o in outcomes if not o.converged]}
    if config.sweep is not None:
        summary["sweep"] = sweep_summary(outcomes)

    try:
        for outcome in outcomes:
            if outcome.converged:
                path = out_dir / (outcome.label + ".csv")
                write_table(outcome.table, path)
                if outcome.full_table is not None:
                    write_table(outcome.full_table, out_dir / (outcome.label + "_full.csv"))
            else:
                path = out_dir / (outcome.label + ".csv.partial")
                if outcome.table is not None:
                    write_table(outcome.table, path)
                print("[simulate] scenario={0} did not converge: {1}".format(outcome.label, outcome.error),
                      file=sys.stderr)
            if config.verbose:
                print("[simulate] scenario={0} -> {1}".format(outcome.label, path))
        failed = bool(summary["failed"])
        summary_path = out_dir / ("summary.json.partial" if failed else "summary.json")
        write_summary(summary, summary_path)
    except OSError as e:
        print("[simulate] cannot write results: {0}".format(e), file=sys.stderr)
        return EXIT_IO
    if config.verbose:
        print("[simulate] summary -> {0}".format(summary_path))
    return EXIT_NONCONVERGENCE if failed else EXIT_OK


def main(argv=None):
    ap = argparse.ArgumentParser(prog="simulate", description="Run CVSR gyrator-capacitor transient scenarios")
    ap.add_argument("config", help="run configuration (YAML or key = value lines)")
    ap.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    ap.add_argument("--full-waveforms", action="store_true", help="also write <label>_full.csv over the whole run")
    args = ap.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as e:
        print("[simulate] cannot read {0}: {1}".format(args.config, e), file=sys.stderr)
        return EXIT_IO
    try:
        config = parse_config(text)
    except ConfigError as e:
        print("[simulate] {0}: {1}".format(args.config, e), file=sys.stderr)
        return EXIT_CONFIG

    if args.out is not None:
        config = replace(config, output_dir=args.out)
    if args.full_waveforms:
        config = replace(config, emit_full_waveforms=True)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
