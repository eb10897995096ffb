import numpy as np

ELECTRICAL = "electrical"
MAGNETIC = "magnetic"
DOMAINS = (ELECTRICAL, MAGNETIC)


def potential(x, idx):
    """
    Node potential from the unknown vector; ground nodes carry index -1.
    """
    return x[idx] if idx >= 0 else 0.0


def add_entry(mat, row, col, value):
    if row >= 0 and col >= 0:
        mat[row, col] += value


def add_rhs(vec, row, value):
    if row >= 0:
        vec[row] += value


def stamp_conductance(jac, p, m, g):
    add_entry(jac, p, p, g)
    add_entry(jac, m, m, g)
    add_entry(jac, p, m, -g)
    add_entry(jac, m, p, -g)


def stamp_branch_current(jac, res, p, m, k, current):
    """
    KCL contribution of an auxiliary branch current k flowing from terminal p through the element to m.
    """
    add_rhs(res, p, current)
    add_rhs(res, m, -current)
    add_entry(jac, p, k, 1.0)
    add_entry(jac, m, k, -1.0)


class Element:
    """
    Base class of every circuit element.

    Residual convention: for each node the residual accumulates the currents (electrical) or flux rates
    (magnetic) leaving the node through the element. Auxiliary rows hold branch constraints.

    Derived classes set `kind`, `n_terminals`, `n_aux`, `domains` and implement stamp(). Reactive elements also
    implement initial_history() and update_history().
    """
    kind = None
    n_terminals = 2
    n_aux = 0
    reactive = False
    # None: both terminals in any one domain. Otherwise a tuple of domains, one per terminal.
    domains = None

    def __init__(self, label, terminals):
        assert self.check_element_kind(), "Element kind not implemented yet"
        self.label = label
        self.terminals = tuple(terminals)

    def check_element_kind(self):
        implemented = self.kinds_implemented()
        if self.kind in implemented:
            return True
        print("Element kinds implemented yet:", implemented)
        return False

    @classmethod
    def kinds_implemented(cls):
        implemented = []
        todo = list(Element.__subclasses__())
        while todo:
            sub = todo.pop(0)
            if sub.kind is not None:
                implemented.append(sub.kind)
            todo.extend(sub.__subclasses__())
        return sorted(set(implemented))

    def parameters(self):
        """
        Dict of the numeric parameters of the element, used for validation and mirror comparisons.
        """
        return {}

    def check(self):
        """
        List of parameter invariant violations (strings).
        """
        violations = []
        for name, value in self.parameters().items():
            if not np.all(np.isfinite(value)):
                violations.append("element {0}: parameter {1} is not finite".format(self.label, name))
        return violations

    def stamp(self, jac, res, x, nodes, aux, history, t, dt, trapezoidal):
        """
        Add the element's contribution to the Jacobian and the residual evaluated at candidate x.

        Args:
            jac: Jacobian matrix, updated in place.
            res: Residual vector, updated in place.
            x: Candidate unknown vector.
            nodes: Unknown indices of the terminals (-1 for ground).
            aux: Unknown indices of the auxiliary branch currents.
            history: History of the element at the previous accepted step (None if not reactive).
            t: Time at which the step ends.
            dt: Step size.
            trapezoidal: Trapezoidal companion if True, backward Euler otherwise (first step of a run).
        """
        raise NotImplementedError(
            "Import derived class corresponding to your element. You are currently using the base class.")

    def initial_history(self):
        return None

    def update_history(self, x, nodes, aux, history, t, dt, trapezoidal):
        return None

    def current(self, x, nodes, aux, history, t):
        raise NotImplementedError

    def channels(self, x, nodes, aux, history, t):
        """
        Named samples of the element at an accepted state: branch current and terminal potential difference.
        """
        p, m = nodes[0], nodes[1]
        return {"i_" + self.label: self.current(x, nodes, aux, history, t),
                "v_" + self.label: potential(x, p) - potential(x, m)}

    def __repr__(self):
        return "{0}({1!r}, {2}, {3})".format(type(self).__name__, self.label, self.terminals, self.parameters())
