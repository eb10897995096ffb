import copy
import numpy as np
from dataclasses import dataclass, field
from functools import cached_property
from warnings import warn

from gcsim.analysis import WaveformSet
from gcsim.elements.element import DOMAINS, ELECTRICAL, MAGNETIC
from gcsim.elements.magnetic import Gyrator
from gcsim.elements.passive import Capacitor


class NumericalInputError(ValueError):
    pass


class CircuitValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid circuit:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class NodeRef:
    """
    Node of the two-domain graph. Electrical potentials are volts, magnetic potentials are amp-turns (mmf).
    """
    id: int
    domain: str

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError("domain must be one of {0}, got {1!r}".format(DOMAINS, self.domain))


@dataclass(frozen=True, eq=False)
class Circuit:
    """
    Immutable two-domain element graph with one ground node per domain.

    Args:
        nodes: NodeRef tuple, grounds included.
        elements: Element tuple.
        grounds: Dict domain -> ground NodeRef.
        probes: Dict channel alias -> tuple of (element label, quantity, coefficient) terms whose channels are
            summed, e.g. {"i_ac": (("ac_winding", "i", 1.0),)}.
    """
    nodes: tuple
    elements: tuple
    grounds: dict
    probes: dict = field(default_factory=dict)

    @cached_property
    def violations(self):
        return validate(self)

    @cached_property
    def layout(self):
        """
        Unknown indices: (node id -> index, per-element terminal indices, per-element aux indices, size).
        Ground nodes map to -1; auxiliary currents follow the node potentials in element order.
        """
        ground_ids = {g.id for g in self.grounds.values()}
        index = {}
        n = 0
        for node in self.nodes:
            if node.id in ground_ids:
                index[node.id] = -1
            else:
                index[node.id] = n
                n += 1
        element_nodes = []
        element_aux = []
        for element in self.elements:
            element_nodes.append(tuple(index[t.id] for t in element.terminals))
            element_aux.append(tuple(range(n, n + element.n_aux)))
            n += element.n_aux
        return index, element_nodes, element_aux, n

    @property
    def n_unknowns(self):
        return self.layout[3]

    def element(self, label):
        for element in self.elements:
            if element.label == label:
                return element
        raise KeyError("no element labeled {0!r}".format(label))

    def unknown_domains(self):
        """
        Domain of every unknown: node potentials take their node's domain, auxiliary currents the domain of
        the port they belong to.
        """
        index, _, element_aux, n = self.layout
        domains = [None] * n
        for node in self.nodes:
            if index[node.id] >= 0:
                domains[index[node.id]] = node.domain
        for element, aux in zip(self.elements, element_aux):
            if isinstance(element, Gyrator):
                domains[aux[0]], domains[aux[1]] = ELECTRICAL, MAGNETIC
            else:
                for k in aux:
                    domains[k] = element.terminals[0].domain
        return domains

    def with_ramps(self, schedule, shape="linear"):
        """
        New circuit whose dc sources ramp from zero over the given times.

        Args:
            schedule: Dict element label -> ramp time in s.
            shape: "linear" or "smooth" (smootherstep).
        """
        elements = []
        for element in self.elements:
            if element.label in schedule:
                if not hasattr(element, "ramp_time"):
                    raise ValueError("element {0!r} is not a dc source and cannot be ramped".format(element.label))
                element = copy.copy(element)
                element.ramp_time = schedule[element.label]
                element.ramp_shape = shape
            elements.append(element)
        return Circuit(self.nodes, tuple(elements), dict(self.grounds), dict(self.probes))


class CircuitBuilder:
    """
    Mutable helper collecting nodes and elements; build() freezes it into a Circuit.
    """
    def __init__(self):
        self.nodes = []
        self.elements = []
        self.grounds = {}
        self.probes = {}

    def node(self, domain):
        node = NodeRef(len(self.nodes), domain)
        self.nodes.append(node)
        return node

    def ground(self, domain):
        if domain not in self.grounds:
            self.grounds[domain] = self.node(domain)
        return self.grounds[domain]

    def add(self, element):
        self.elements.append(element)
        return element

    def probe(self, name, *terms):
        """
        Alias channel `name` to the sum of the terms, each (element label, quantity) or (element label,
        quantity, coefficient).
        """
        if not terms:
            raise ValueError("probe {0!r} needs at least one term".format(name))
        self.probes[name] = tuple((term[0], term[1], float(term[2]) if len(term) > 2 else 1.0)
                                  for term in terms)

    def build(self):
        return Circuit(tuple(self.nodes), tuple(self.elements), dict(self.grounds), dict(self.probes))


@dataclass(frozen=True, eq=False)
class SystemState:
    """
    Accepted solution at `time`.

    Args:
        unknowns: Node potentials then auxiliary currents.
        time: Time in s.
        history: Per-element integrator history (None for memoryless elements).
        step_index: Number of accepted steps; 0 marks a fresh state whose first step uses backward Euler.
        restart: The next step uses backward Euler (integration restart after a source breakpoint).
    """
    unknowns: np.ndarray
    time: float
    history: tuple
    step_index: int = 0
    restart: bool = False

    @property
    def trapezoidal(self):
        return self.step_index > 0 and not self.restart


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """
    Newton system matrix dx = rhs, with matrix the Jacobian and rhs = -residual at the candidate.
    """
    matrix: np.ndarray
    rhs: np.ndarray


def validate(circuit):
    """
    Check the Circuit and Element invariants.

    Returns:
        List of violations (strings), empty if the circuit is valid.
    """
    violations = []
    node_by_id = {}
    for node in circuit.nodes:
        if node.id in node_by_id:
            violations.append("duplicate node id {0}".format(node.id))
        node_by_id[node.id] = node

    present = [d for d in DOMAINS if any(n.domain == d for n in circuit.nodes)]
    for domain in present:
        ground = circuit.grounds.get(domain)
        if ground is None:
            violations.append("missing ground: {0}".format(domain))
        elif node_by_id.get(ground.id) != ground:
            violations.append("ground of domain {0} is not a node of the circuit".format(domain))
    for domain, ground in circuit.grounds.items():
        if ground.domain != domain:
            violations.append("ground {0} is registered for domain {1} but lives in {2}".format(
                ground.id, domain, ground.domain))

    labels = [e.label for e in circuit.elements]
    for label in sorted({k for k in labels if labels.count(k) > 1}):
        violations.append("duplicate element label {0!r}".format(label))

    # union-find per domain over two-terminal elements and gyrator port pairs
    parent = {node_id: node_id for node_id in node_by_id}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def union(a, b):
        parent[find(a)] = find(b)

    for element in circuit.elements:
        if len(element.terminals) != element.n_terminals:
            violations.append("element {0}: expected {1} terminals, got {2}".format(
                element.label, element.n_terminals, len(element.terminals)))
            continue
        missing = [t for t in element.terminals if node_by_id.get(t.id) != t]
        for t in missing:
            violations.append("element {0}: terminal references unknown node {1}".format(element.label, t.id))
        if missing:
            continue
        if element.domains is None:
            if len({t.domain for t in element.terminals}) > 1:
                violations.append("element {0}: domain mismatch, terminals span {1}".format(
                    element.label, sorted({t.domain for t in element.terminals})))
        else:
            for k, (t, domain) in enumerate(zip(element.terminals, element.domains)):
                if t.domain != domain:
                    violations.append("element {0}: domain mismatch, terminal {1} must be {2}, got {3}".format(
                        element.label, k, domain, t.domain))
        violations.extend(element.check())
        for a, b in zip(element.terminals[0::2], element.terminals[1::2]):
            if a.domain == b.domain:
                union(a.id, b.id)

    for domain, ground in circuit.grounds.items():
        if node_by_id.get(ground.id) != ground:
            continue
        for node in circuit.nodes:
            if node.domain == domain and find(node.id) != find(ground.id):
                violations.append("floating node {0} ({1}): not connected to the ground".format(node.id, domain))

    for name, terms in circuit.probes.items():
        for label in sorted({term[0] for term in terms if term[0] not in labels}):
            violations.append("probe {0!r} references unknown element {1!r}".format(name, label))
    return violations


def initial_state(circuit):
    """
    State at t=0: zero potentials and currents, element histories from their initial conditions.
    """
    return SystemState(unknowns=np.zeros(circuit.n_unknowns), time=0.0,
                       history=tuple(e.initial_history() for e in circuit.elements), step_index=0)


def stamp_system(circuit, state, candidate, dt):
    """
    Assemble the Newton system of the implicit companion network at `candidate` for the step ending at
    state.time + dt. The first step from a fresh or restarted state uses backward-Euler companions, later steps
    trapezoidal.

    Args:
        circuit: Valid Circuit.
        state: SystemState at the start of the step.
        candidate: Unknown vector at the end of the step.
        dt: Step size in s.

    Returns:
        LinearSystem
    """
    if circuit.violations:
        raise CircuitValidationError(circuit.violations)
    if not dt > 0:
        raise ValueError("dt must be strictly positive, got {0}".format(dt))
    candidate = np.asarray(candidate, dtype=float)
    if not np.all(np.isfinite(candidate)):
        raise NumericalInputError("non-finite entries in candidate at indices {0}".format(
            np.where(~np.isfinite(candidate))[0].tolist()))

    _, element_nodes, element_aux, n = circuit.layout
    jac = np.zeros((n, n))
    res = np.zeros(n)
    t = state.time + dt
    trapezoidal = state.trapezoidal
    for element, nodes, aux, history in zip(circuit.elements, element_nodes, element_aux, state.history):
        element.stamp(jac, res, candidate, nodes, aux, history, t, dt, trapezoidal)
    return LinearSystem(matrix=jac, rhs=-res)


def advance_state(circuit, state, solution, dt):
    """
    Accept `solution` as the state at state.time + dt and update every element history.
    """
    _, element_nodes, element_aux, _ = circuit.layout
    t = state.time + dt
    trapezoidal = state.trapezoidal
    history = tuple(
        e.update_history(solution, nodes, aux, h, t, dt, trapezoidal) if e.reactive else None
        for e, nodes, aux, h in zip(circuit.elements, element_nodes, element_aux, state.history))
    return SystemState(unknowns=np.array(solution, dtype=float), time=t, history=history,
                       step_index=state.step_index + 1)


def extract_channels(circuit, states, dt=None, flux_rtol=1e-9):
    """
    Named channels of every element over a sequence of accepted states: i_<label>, v_<label> for all
    elements, f_/mmf_ for gyrator magnetic ports, phi_/phi_int_ for magnetic capacitors (q_/q_int_ for
    electrical ones), plus the circuit probes.

    Args:
        circuit: Circuit the states belong to.
        states: Non-empty sequence of SystemState with uniform time spacing.
        dt: Sampling step, required only when a single state is given.
        flux_rtol: Tolerance of the charge-state vs integrated-flow flux cross-check.

    Returns:
        WaveformSet
    """
    if len(states) == 0:
        raise ValueError("extract_channels() needs at least one state")
    times = np.array([s.time for s in states])
    if len(states) > 1:
        steps = np.diff(times)
        dt = steps[0]
        if not np.allclose(steps, dt, rtol=1e-9, atol=0):
            raise ValueError("states are not uniformly spaced in time")
    elif dt is None:
        raise ValueError("dt is required to extract channels from a single state")

    _, element_nodes, element_aux, _ = circuit.layout
    samples = {}
    for state in states:
        for element, nodes, aux, history in zip(circuit.elements, element_nodes, element_aux, state.history):
            for name, value in element.channels(state.unknowns, nodes, aux, history, state.time).items():
                samples.setdefault(name, []).append(value)
    channels = {name: np.array(values, dtype=float) for name, values in samples.items()}

    for element in circuit.elements:
        if isinstance(element, Capacitor) and "phi_" + element.label in channels:
            phi, phi_int = channels["phi_" + element.label], channels["phi_int_" + element.label]
            scale = max(np.max(np.abs(phi)), 1e-12)
            if np.max(np.abs(phi - phi_int)) > flux_rtol * scale:
                warn("flux of {0} from the charge state and from the integrated flux rate differ by {1} Wb".format(
                    element.label, np.max(np.abs(phi - phi_int))))

    for name, terms in circuit.probes.items():
        channels[name] = sum(coefficient * channels["{0}_{1}".format(quantity, label)]
                             for label, quantity, coefficient in terms)
    return WaveformSet(t0=float(times[0]), dt=float(dt), channels=channels)
