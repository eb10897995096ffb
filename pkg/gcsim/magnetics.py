import numpy as np
from dataclasses import dataclass
from warnings import warn

# magnetic permeability of free air (H/m)
MU0 = 4 * np.pi * 1e-7


@dataclass(frozen=True)
class CoreLegGeometry:
    """
    Mean path length (m) and cross-section (m^2) of one magnetic path.
    """
    length_m: float
    area_m2: float

    def __post_init__(self):
        if not (np.isfinite(self.length_m) and self.length_m > 0):
            raise ValueError("length_m must be strictly positive, got {0}".format(self.length_m))
        if not (np.isfinite(self.area_m2) and self.area_m2 > 0):
            raise ValueError("area_m2 must be strictly positive, got {0}".format(self.area_m2))


@dataclass(frozen=True)
class SaturationCurve:
    """
    Single-valued B(H) law of the core steel.

    Args:
        b_sat: Saturation flux density in T.
        mu_r_initial: Relative permeability at H=0. The default is a typical unsaturated value for electrical
            steel; the M36 datasheet value is not known here.
    """
    b_sat: float = 1.34
    mu_r_initial: float = 8000.0

    def __post_init__(self):
        if not (np.isfinite(self.b_sat) and self.b_sat > 0):
            raise ValueError("b_sat must be strictly positive, got {0}".format(self.b_sat))
        if not (np.isfinite(self.mu_r_initial) and self.mu_r_initial > 1):
            raise ValueError("mu_r_initial must be > 1, got {0}".format(self.mu_r_initial))

    def knee_scale(self):
        """
        H scale of the arctangent argument: x = H / knee_scale().
        """
        return 2 * self.b_sat / (np.pi * (self.mu_r_initial - 1) * MU0)

    def flux_density(self, h):
        """
        B(H) = (2 b_sat / pi) atan(pi (mu_r - 1) mu0 H / (2 b_sat)) + mu0 H
        """
        h = np.asarray(h, dtype=float)
        return 2 * self.b_sat / np.pi * np.arctan(h / self.knee_scale()) + MU0 * h

    def differential_permeability(self, h):
        """
        dB/dH of flux_density(), in H/m.
        """
        x = np.asarray(h, dtype=float) / self.knee_scale()
        return (self.mu_r_initial - 1) * MU0 / (1 + x ** 2) + MU0


@dataclass(frozen=True)
class Permeance:
    """
    Permeance in Wb per amp-turn (henry). Series and parallel combinations follow the capacitor rules of the
    gyrator-capacitor analogy.
    """
    value: float

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value > 0):
            raise ValueError("permeance must be strictly positive and finite, got {0}".format(self.value))

    @property
    def reluctance(self):
        return 1.0 / self.value

    def series(self, *others):
        return Permeance(1.0 / (self.reluctance + sum(p.reluctance for p in others)))

    def parallel(self, *others):
        return Permeance(self.value + sum(p.value for p in others))

    def inductance(self, turns):
        """
        Inductance N^2 P seen through a winding of `turns` turns.
        """
        return turns ** 2 * self.value


@dataclass(frozen=True)
class WindingGyrator:
    """
    Winding coupling an electrical port to a magnetic port: v = s N dPhi/dt and mmf = s N i, with s the
    winding sense.
    """
    turns: int
    orientation: int = 1

    def __post_init__(self):
        if int(self.turns) != self.turns or self.turns < 1:
            raise ValueError("turns must be an integer >= 1, got {0}".format(self.turns))
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1, got {0}".format(self.orientation))

    @property
    def gain(self):
        return self.orientation * self.turns


def linear_permeance(geometry, mu_r):
    """
    Permeance mu_r mu0 A / l of a path with constant relative permeability.

    Args:
        geometry: CoreLegGeometry of the path.
        mu_r: Relative permeability (>= 1).

    Returns:
        Permeance
    """
    if not mu_r >= 1:
        raise ValueError("mu_r must be >= 1, got {0}".format(mu_r))
    return Permeance(mu_r * MU0 * geometry.area_m2 / geometry.length_m)


def fringing_area(gap_length_m, area_m2):
    """
    Effective gap area of a square cross-section of side sqrt(A), each lateral dimension extended by one gap
    length.
    """
    return (np.sqrt(area_m2) + gap_length_m) ** 2


def gap_permeance_with_fringing(gap_length_m, area_m2):
    """
    Air-gap permeance mu0 A_eff / g including fringing flux around the gap.

    Args:
        gap_length_m: Gap length g in m.
        area_m2: Core cross-section A in m^2, assumed square.

    Returns:
        Permeance
    """
    if not (gap_length_m > 0 and area_m2 > 0):
        raise ValueError("gap length and area must be strictly positive, got g={0}, A={1}".format(
            gap_length_m, area_m2))
    if gap_length_m > 0.2 * np.sqrt(area_m2):
        warn("gap length {0} m exceeds 20% of the core side {1} m; the fringing model is outside its "
             "validity range".format(gap_length_m, np.sqrt(area_m2)))
    return Permeance(MU0 * fringing_area(gap_length_m, area_m2) / gap_length_m)


def flux_of_mmf(mmf, geometry, curve):
    """
    Flux through a core leg for a given mmf across it: Phi = A B(mmf / l). Works elementwise on arrays.

    Args:
        mmf: Magnetomotive force across the leg in amp-turns.
        geometry: CoreLegGeometry of the leg.
        curve: SaturationCurve of the steel.

    Returns:
        flux in Wb
    """
    return geometry.area_m2 * curve.flux_density(np.asarray(mmf, dtype=float) / geometry.length_m)


def differential_permeance(mmf, geometry, curve):
    """
    Analytic dPhi/d(mmf) of flux_of_mmf(), used as the Newton linearization of the nonlinear capacitance.
    Returns a Permeance for scalar mmf and a plain array for array input.
    """
    value = geometry.area_m2 / geometry.length_m * \
        curve.differential_permeability(np.asarray(mmf, dtype=float) / geometry.length_m)
    if np.ndim(value) == 0:
        return Permeance(float(value))
    return value


def winding_emf(turns, dphi_dt):
    """
    Voltage N dPhi/dt induced in a winding.
    """
    return turns * np.asarray(dphi_dt, dtype=float) if np.ndim(dphi_dt) else turns * dphi_dt
