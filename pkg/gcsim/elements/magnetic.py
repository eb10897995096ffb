import numpy as np

from gcsim.elements.element import Element, ELECTRICAL, MAGNETIC, potential, add_entry, add_rhs, \
    stamp_branch_current
from gcsim.elements.passive import Capacitor
from gcsim import magnetics


class FluxCapacitor(Capacitor):
    """
    Nonlinear permeance of a core leg: the capacitor voltage is the mmf across the leg and its charge is the
    flux Phi(mmf) given by the saturation curve. The branch current is dPhi/dt.
    """
    kind = "flux_capacitor"
    domains = (MAGNETIC, MAGNETIC)

    def __init__(self, label, terminals, geometry, curve):
        self.geometry = geometry
        self.curve = curve
        super().__init__(label, terminals, magnetics.linear_permeance(geometry, curve.mu_r_initial).value)

    def parameters(self):
        return {"length_m": self.geometry.length_m, "area_m2": self.geometry.area_m2,
                "b_sat": self.curve.b_sat, "mu_r_initial": self.curve.mu_r_initial}

    def charge(self, v):
        return float(magnetics.flux_of_mmf(v, self.geometry, self.curve))

    def incremental_capacitance(self, v):
        return magnetics.differential_permeance(v, self.geometry, self.curve).value

    def initial_history(self):
        return np.zeros(3)


class Gyrator(Element):
    """
    Winding as a gyrator between an electrical port (e+, e-) and a magnetic port (m+, m-).

    Port laws with gain g = orientation * turns:
        v_e = g f        (f: flux rate leaving the port at m+)
        mmf = g i_e      (i_e: current entering the port at e+)
    so v_e i_e = mmf f and the two-port is lossless. Both port currents are auxiliary unknowns; eliminating them
    leaves the pair of cross transconductances of magnitude 1/N.
    """
    kind = "gyrator"
    n_terminals = 4
    n_aux = 2
    domains = (ELECTRICAL, ELECTRICAL, MAGNETIC, MAGNETIC)

    def __init__(self, label, terminals, winding):
        super().__init__(label, terminals)
        self.winding = winding

    @property
    def gain(self):
        return float(self.winding.gain)

    def parameters(self):
        return {"turns": self.winding.turns, "orientation": self.winding.orientation}

    def check(self):
        violations = super().check()
        if self.winding.turns < 1:
            violations.append("element {0}: turns must be >= 1".format(self.label))
        return violations

    def stamp(self, jac, res, x, nodes, aux, history, t, dt, trapezoidal):
        ep, em, mp, mm = nodes
        ke, kf = aux
        i_e, f = x[ke], x[kf]
        g = self.gain

        stamp_branch_current(jac, res, ep, em, ke, i_e)
        add_rhs(res, mp, -f)
        add_rhs(res, mm, f)
        add_entry(jac, mp, kf, -1.0)
        add_entry(jac, mm, kf, 1.0)

        res[ke] += potential(x, ep) - potential(x, em) - g * f
        add_entry(jac, ke, ep, 1.0)
        add_entry(jac, ke, em, -1.0)
        jac[ke, kf] -= g

        res[kf] += potential(x, mp) - potential(x, mm) - g * i_e
        add_entry(jac, kf, mp, 1.0)
        add_entry(jac, kf, mm, -1.0)
        jac[kf, ke] -= g

    def current(self, x, nodes, aux, history, t):
        return x[aux[0]]

    def channels(self, x, nodes, aux, history, t):
        ep, em, mp, mm = nodes
        return {"i_" + self.label: x[aux[0]],
                "v_" + self.label: potential(x, ep) - potential(x, em),
                "f_" + self.label: x[aux[1]],
                "mmf_" + self.label: potential(x, mp) - potential(x, mm)}
