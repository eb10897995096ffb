import numpy as np

from gcsim.elements.element import Element, potential, stamp_branch_current, add_entry, add_rhs


RAMP_SHAPES = ("linear", "smooth")


def ramp_factor(t, ramp_time, shape="linear"):
    """
    Startup ramp 0 -> 1 over ramp_time. "smooth" is a smootherstep whose value, slope and curvature are
    continuous at both ends; "linear" has a slope jump at ramp_time, which the transient loop treats as a
    breakpoint.
    """
    if not ramp_time:
        return 1.0
    x = min(1.0, max(0.0, t / ramp_time))
    if shape == "linear":
        return x
    return x ** 3 * (10 - 15 * x + 6 * x ** 2)


class VoltageSource(Element):
    """
    Ideal potential source between terminals p and m with an auxiliary branch current flowing from p through
    the source to m. In the magnetic domain this is an mmf source.
    """
    n_aux = 1

    def value(self, t):
        raise NotImplementedError

    def stamp(self, jac, res, x, nodes, aux, history, t, dt, trapezoidal):
        p, m = nodes
        k = aux[0]
        stamp_branch_current(jac, res, p, m, k, x[k])
        res[k] += potential(x, p) - potential(x, m) - self.value(t)
        add_entry(jac, k, p, 1.0)
        add_entry(jac, k, m, -1.0)

    def current(self, x, nodes, aux, history, t):
        return x[aux[0]]


class DCVoltageSource(VoltageSource):
    kind = "source_dc"

    def __init__(self, label, terminals, voltage, ramp_time=None, ramp_shape="linear"):
        super().__init__(label, terminals)
        self.voltage = float(voltage)
        self.ramp_time = ramp_time
        self.ramp_shape = ramp_shape

    def parameters(self):
        return {"voltage": self.voltage, "ramp_time": self.ramp_time or 0.0}

    def check(self):
        violations = super().check()
        if self.ramp_shape not in RAMP_SHAPES:
            violations.append("element {0}: unknown ramp shape {1!r}".format(self.label, self.ramp_shape))
        return violations

    def value(self, t):
        return self.voltage * ramp_factor(t, self.ramp_time, self.ramp_shape)


class SineVoltageSource(VoltageSource):
    kind = "source_sine"

    def __init__(self, label, terminals, amplitude, frequency, phase=0.0):
        super().__init__(label, terminals)
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.phase = float(phase)

    def parameters(self):
        return {"amplitude": self.amplitude, "frequency": self.frequency, "phase": self.phase}

    def check(self):
        violations = super().check()
        if not self.frequency > 0:
            violations.append("element {0}: frequency must be strictly positive".format(self.label))
        return violations

    def value(self, t):
        return self.amplitude * np.sin(2 * np.pi * self.frequency * t + self.phase)


class DCCurrentSource(Element):
    """
    Ideal current source: `current` flows from p through the source to m, i.e. it is pushed into the
    external circuit at m. In the magnetic domain this is a flux-rate source (Wb/s).
    """
    kind = "source_current_dc"

    def __init__(self, label, terminals, current, ramp_time=None, ramp_shape="linear"):
        super().__init__(label, terminals)
        self.current_value = float(current)
        self.ramp_time = ramp_time
        self.ramp_shape = ramp_shape

    def parameters(self):
        return {"current": self.current_value, "ramp_time": self.ramp_time or 0.0}

    def check(self):
        violations = super().check()
        if self.ramp_shape not in RAMP_SHAPES:
            violations.append("element {0}: unknown ramp shape {1!r}".format(self.label, self.ramp_shape))
        return violations

    def value(self, t):
        return self.current_value * ramp_factor(t, self.ramp_time, self.ramp_shape)

    def stamp(self, jac, res, x, nodes, aux, history, t, dt, trapezoidal):
        p, m = nodes
        i = self.value(t)
        add_rhs(res, p, i)
        add_rhs(res, m, -i)

    def current(self, x, nodes, aux, history, t):
        return self.value(t)
