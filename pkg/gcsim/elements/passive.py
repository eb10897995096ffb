import numpy as np

from gcsim.elements.element import Element, ELECTRICAL, MAGNETIC, potential, stamp_conductance, stamp_branch_current, \
    add_entry, add_rhs


class Resistor(Element):
    kind = "resistor"

    def __init__(self, label, terminals, resistance):
        super().__init__(label, terminals)
        self.resistance = float(resistance)

    def parameters(self):
        return {"resistance": self.resistance}

    def check(self):
        violations = super().check()
        if not self.resistance > 0:
            violations.append("element {0}: resistance must be strictly positive".format(self.label))
        return violations

    def stamp(self, jac, res, x, nodes, aux, history, t, dt, trapezoidal):
        p, m = nodes
        g = 1.0 / self.resistance
        i = g * (potential(x, p) - potential(x, m))
        add_rhs(res, p, i)
        add_rhs(res, m, -i)
        stamp_conductance(jac, p, m, g)

    def current(self, x, nodes, aux, history, t):
        return (potential(x, nodes[0]) - potential(x, nodes[1])) / self.resistance


class Capacitor(Element):
    """
    Capacitor with charge q(v). The linear capacitor has q = C v; in the magnetic domain it is a linear
    permeance (v = mmf, q = flux). Trapezoidal companion in charge-conserving form:
    q_{n+1} - q_n = dt/2 (i_{n+1} + i_n).

    History: [q, i, integrated current].
    """
    kind = "capacitor"
    reactive = True

    def __init__(self, label, terminals, capacitance, initial_voltage=0.0):
        super().__init__(label, terminals)
        self.capacitance = float(capacitance)
        self.initial_voltage = float(initial_voltage)

    def parameters(self):
        return {"capacitance": self.capacitance, "initial_voltage": self.initial_voltage}

    def check(self):
        violations = super().check()
        if not self.capacitance > 0:
            violations.append("element {0}: capacitance must be strictly positive".format(self.label))
        return violations

    def charge(self, v):
        return self.capacitance * v

    def incremental_capacitance(self, v):
        return self.capacitance

    def initial_history(self):
        q0 = self.charge(self.initial_voltage)
        return np.array([q0, 0.0, q0])

    def _companion(self, v, history, dt, trapezoidal):
        q = self.charge(v)
        q_prev, i_prev = history[0], history[1]
        if trapezoidal:
            return q, 2.0 / dt * (q - q_prev) - i_prev, 2.0 / dt
        return q, (q - q_prev) / dt, 1.0 / dt

    def stamp(self, jac, res, x, nodes, aux, history, t, dt, trapezoidal):
        p, m = nodes
        v = potential(x, p) - potential(x, m)
        q, i, scale = self._companion(v, history, dt, trapezoidal)
        add_rhs(res, p, i)
        add_rhs(res, m, -i)
        stamp_conductance(jac, p, m, scale * self.incremental_capacitance(v))

    def update_history(self, x, nodes, aux, history, t, dt, trapezoidal):
        v = potential(x, nodes[0]) - potential(x, nodes[1])
        q, i, _ = self._companion(v, history, dt, trapezoidal)
        if trapezoidal:
            q_int = history[2] + dt / 2.0 * (i + history[1])
        else:
            q_int = history[2] + dt * i
        return np.array([q, i, q_int])

    def current(self, x, nodes, aux, history, t):
        return history[1]

    def channels(self, x, nodes, aux, history, t):
        out = super().channels(x, nodes, aux, history, t)
        # in the magnetic domain the charge is the flux through the path
        prefix = "phi" if self.terminals[0].domain == MAGNETIC else "q"
        out["{0}_{1}".format(prefix, self.label)] = history[0]
        out["{0}_int_{1}".format(prefix, self.label)] = history[2]
        return out


class Inductor(Element):
    """
    Linear inductor with an auxiliary branch current. Trapezoidal companion on the flux linkage:
    lambda_{n+1} - lambda_n = dt/2 (v_{n+1} + v_n).

    History: [lambda, v].
    """
    kind = "inductor"
    n_aux = 1
    reactive = True
    domains = (ELECTRICAL, ELECTRICAL)

    def __init__(self, label, terminals, inductance, initial_current=0.0):
        super().__init__(label, terminals)
        self.inductance = float(inductance)
        self.initial_current = float(initial_current)

    def parameters(self):
        return {"inductance": self.inductance, "initial_current": self.initial_current}

    def check(self):
        violations = super().check()
        if not self.inductance > 0:
            violations.append("element {0}: inductance must be strictly positive".format(self.label))
        return violations

    def initial_history(self):
        return np.array([self.inductance * self.initial_current, 0.0])

    def _voltage(self, i, history, dt, trapezoidal):
        if trapezoidal:
            return 2.0 / dt * (self.inductance * i - history[0]) - history[1], 2.0 * self.inductance / dt
        return (self.inductance * i - history[0]) / dt, self.inductance / dt

    def stamp(self, jac, res, x, nodes, aux, history, t, dt, trapezoidal):
        p, m = nodes
        k = aux[0]
        i = x[k]
        stamp_branch_current(jac, res, p, m, k, i)
        v_l, r_eq = self._voltage(i, history, dt, trapezoidal)
        res[k] += potential(x, p) - potential(x, m) - v_l
        add_entry(jac, k, p, 1.0)
        add_entry(jac, k, m, -1.0)
        jac[k, k] -= r_eq

    def update_history(self, x, nodes, aux, history, t, dt, trapezoidal):
        i = x[aux[0]]
        v_l, _ = self._voltage(i, history, dt, trapezoidal)
        return np.array([self.inductance * i, v_l])

    def current(self, x, nodes, aux, history, t):
        return x[aux[0]]
