import numpy as np
import pandas as pd
from dataclasses import dataclass, field

from gcsim.utils import interpolate_masked


@dataclass(frozen=True)
class WaveformSet:
    """
    Uniformly sampled named channels. Sample k is taken at t0 + k dt.
    """
    t0: float
    dt: float
    channels: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be strictly positive, got {0}".format(self.dt))
        lengths = {np.size(v) for v in self.channels.values()}
        if len(lengths) > 1:
            raise ValueError("all channels must have the same length, got {0}".format(sorted(lengths)))

    def __getitem__(self, name):
        return self.channels[name]

    def __contains__(self, name):
        return name in self.channels

    @property
    def n_samples(self):
        if not self.channels:
            return 0
        return np.size(next(iter(self.channels.values())))

    @property
    def t(self):
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def duration(self):
        return self.n_samples * self.dt

    def window(self, start, stop=None):
        """
        Sub-window of samples [start, stop).
        """
        stop = self.n_samples if stop is None else stop
        return WaveformSet(self.t0 + start * self.dt, self.dt,
                           {name: np.asarray(v)[start:stop] for name, v in self.channels.items()})

    def with_channels(self, **channels):
        merged = dict(self.channels)
        merged.update(channels)
        return WaveformSet(self.t0, self.dt, merged)

    def to_dataframe(self, columns=None):
        columns = list(self.channels) if columns is None else columns
        data = {"t": self.t}
        data.update({name: self.channels[name] for name in columns})
        return pd.DataFrame(data)


@dataclass(frozen=True)
class PowerSummary:
    p_real: float
    s_apparent: float
    q_reactive: float


@dataclass(frozen=True)
class SpectrumResult:
    """
    frequencies: bin frequencies in Hz.
    magnitudes: rms value of each bin (dc bin: mean), so that sum(magnitudes**2) is the mean square.
    """
    frequencies: np.ndarray
    magnitudes: np.ndarray
    dominant_frequency: float
    thd: float
    f0: float
    cycles: int

    def harmonic(self, k):
        """
        rms magnitude of the k-th harmonic of f0 (0 for dc).
        """
        index = k * self.cycles
        if index >= np.size(self.magnitudes):
            return 0.0
        return self.magnitudes[index]

    def harmonic_magnitudes(self, n_harmonics=None):
        harmonics = self.magnitudes[::self.cycles]
        if n_harmonics is not None:
            harmonics = harmonics[:n_harmonics + 1]
        return harmonics


def rms(series):
    series = np.asarray(series, dtype=float)
    return np.sqrt(np.mean(series ** 2))


def flux_density(phi_channel, area):
    """
    Flux density B = Phi / A in T.
    """
    if not area > 0:
        raise ValueError("area must be strictly positive, got {0}".format(area))
    return np.asarray(phi_channel, dtype=float) / area


def dc_winding_voltage(phi_right, phi_left, n_dc, dt):
    """
    Voltage N_dc (dPhi_right/dt - dPhi_left/dt) imposed on the series dc windings, with central differences
    (one-sided at the ends).

    Args:
        phi_right: Flux of the right outer leg in Wb.
        phi_left: Flux of the left outer leg in Wb.
        n_dc: Turns of each dc winding.
        dt: Sampling step in s.

    Returns:
        voltage series in V
    """
    phi_right = np.asarray(phi_right, dtype=float)
    phi_left = np.asarray(phi_left, dtype=float)
    if phi_right.shape != phi_left.shape:
        raise ValueError("phi_right and phi_left must have the same length, got {0} and {1}".format(
            phi_right.shape, phi_left.shape))
    return n_dc * np.gradient(phi_right - phi_left, dt)


def equivalent_inductance(flux_linkage, i_ac, exclusion_eps=None):
    """
    Instantaneous equivalent inductance L(t) = lambda(t) / i(t) of the device seen from the ac winding.

    Samples where |i| < exclusion_eps are excluded from the mean and linearly interpolated in the returned series.

    Args:
        flux_linkage: lambda = N_ac Phi_mid in Wb-turns.
        i_ac: ac winding current in A.
        exclusion_eps: Zero-crossing guard in A. Default: 1% of the current peak.

    Returns:
        L: Inductance series in H.
        L_mean: Time average over the included samples.
    """
    flux_linkage = np.asarray(flux_linkage, dtype=float)
    i_ac = np.asarray(i_ac, dtype=float)
    if exclusion_eps is None:
        exclusion_eps = 0.01 * np.max(np.abs(i_ac))
    if not exclusion_eps > 0:
        raise ValueError("exclusion_eps must be strictly positive (is the current identically zero?)")
    included = np.abs(i_ac) >= exclusion_eps
    if not np.any(included):
        raise ValueError("all samples excluded: |i_ac| < {0} A everywhere".format(exclusion_eps))
    inductance = np.zeros(np.size(i_ac)) + np.nan
    inductance[included] = flux_linkage[included] / i_ac[included]
    return interpolate_masked(inductance), float(np.mean(inductance[included]))


def power_summary(v, i):
    """
    Real, apparent and reactive power of a port over a window of whole periods.
    Q is defined as sqrt(S^2 - P^2).
    """
    v = np.asarray(v, dtype=float)
    i = np.asarray(i, dtype=float)
    if v.shape != i.shape:
        raise ValueError("v and i must have the same length, got {0} and {1}".format(v.shape, i.shape))
    p = float(np.mean(v * i))
    s = float(rms(v) * rms(i))
    q = float(np.sqrt(max(0.0, s ** 2 - p ** 2)))
    return PowerSummary(p_real=p, s_apparent=s, q_reactive=q)


def spectrum(series, dt, f0, rtol=1e-6):
    """
    Discrete Fourier magnitudes of a window holding an integer number of f0 periods.

    Args:
        series: Samples.
        dt: Sampling step in s.
        f0: Fundamental frequency in Hz.

    Returns:
        SpectrumResult
    """
    series = np.asarray(series, dtype=float)
    n = np.size(series)
    cycles_float = n * dt * f0
    cycles = int(round(cycles_float))
    if cycles < 1 or abs(cycles_float - cycles) > rtol * max(1.0, cycles_float):
        raise ValueError("window of {0} samples holds {1} periods of {2} Hz; an integer number is required".format(
            n, cycles_float, f0))

    coeffs = np.fft.rfft(series) / n
    magnitudes = np.abs(coeffs) * np.sqrt(2)
    magnitudes[0] = np.abs(coeffs[0])
    if n % 2 == 0:
        magnitudes[-1] = np.abs(coeffs[-1])
    frequencies = np.fft.rfftfreq(n, dt)

    dominant = frequencies[1 + np.argmax(magnitudes[1:])] if np.size(magnitudes) > 1 else 0.0
    harmonics = magnitudes[::cycles]
    if np.size(harmonics) > 1 and harmonics[1] > 0:
        thd = float(np.sqrt(np.sum(harmonics[2:] ** 2)) / harmonics[1])
    else:
        thd = np.inf
    return SpectrumResult(frequencies=frequencies, magnitudes=magnitudes, dominant_frequency=float(dominant),
                          thd=thd, f0=f0, cycles=cycles)


def half_cycle_peaks(series):
    """
    Peak magnitudes of the positive and negative excursions of a zero-mean waveform.
    """
    series = np.asarray(series, dtype=float)
    return float(np.max(series)), float(-np.min(series))


def peak_asymmetry(series):
    """
    Relative difference between the positive and negative peak magnitudes.
    """
    pos, neg = half_cycle_peaks(series)
    return abs(pos - neg) / max(pos, neg)


def mean_power_balance(waveforms, source_labels, resistor_labels):
    """
    Mean power delivered by the sources and mean power dissipated in the resistors over the window.

    Sources follow the passive sign convention in their channels, so their delivered power is -mean(v i).
    """
    delivered = sum(-np.mean(waveforms["v_" + k] * waveforms["i_" + k]) for k in source_labels)
    dissipated = sum(np.mean(waveforms["v_" + k] * waveforms["i_" + k]) for k in resistor_labels)
    return float(delivered), float(dissipated)
