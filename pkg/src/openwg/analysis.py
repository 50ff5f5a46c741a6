"""Memory kernel, spectral density, decay/revival extraction, spectra.

Everything here is pure analysis over a StarHamiltonian or a sampled
energy trace; nothing mutates its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.signal import find_peaks

from .errors import DomainError, NonDecayingTrace, NoRevivalFound
from .propagate import StateTrace, evolve
from .star import Geometry, StarHamiltonian, build_hamiltonian, \
    coupling_spectrum

#: environment width used as the continuum reference when the geometry's
#: own environment is narrower
CONTINUUM_REF_WIDTH = 20.0
#: revival peak prominence, fraction of E(0)
REVIVAL_PROMINENCE = 0.02
#: decay-fit window ends where E drops below this fraction of E(0)
DECAY_FLOOR = 0.05


@dataclass(frozen=True)
class KernelTrace:
    """Memory kernel K(tau) = sum_j g_j^2 e^{-i(beta0-beta_j) tau}."""

    tau_grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class DecayFit:
    L_fit: float
    fit_window: tuple[float, float]
    r_squared: float


@dataclass(frozen=True)
class RevivalFit:
    """First-revival markers of one trace.

    z_onset is where the energy minimum precedes the sustained rise (the
    reflected beam's first return); z_peak is the first local maximum with
    the qualifying prominence.  R carries whichever statistic was chosen.
    """

    R: float
    z_onset: float
    z_peak: float
    R0: float = math.nan


def memory_kernel(h: StarHamiltonian, tau_grid) -> KernelTrace:
    """Finite-sum kernel, exact for the discrete star model."""
    tau = np.asarray(tau_grid, dtype=float)
    g2 = np.asarray(h.couplings) ** 2
    detun = h.beta0 - np.asarray(h.betas)
    vals = np.exp(-1j * np.outer(tau, detun)) @ g2
    return KernelTrace(tau_grid=tau, values=vals)


def kernel_width(kt: KernelTrace) -> float:
    """Effective kernel width: integral of |K| over tau, normalized by K(0).

    For a delta-like kernel this collapses to the central-lobe width; the
    discrete-environment revivals of |K| inflate it, so it shrinks toward
    the continuum limit as the environment widens.  The tau grid should
    cover at least one kernel revival of the narrowest environment
    compared.
    """
    w = np.abs(kt.values)
    tau = np.asarray(kt.tau_grid, dtype=float)
    return float(np.trapezoid(w, tau) / w[0])


def mode_density(n: float, w_e: float, n_d: float, k: float) -> float:
    """Environment modes per unit effective index near n."""
    if not (1.0 < n < n_d):
        raise DomainError(f"mode index {n} outside (1, {n_d})")
    return (k * w_e / math.pi) * n / math.sqrt(n_d**2 - n**2)


@lru_cache(maxsize=32)
def _g2w_interpolator(system_width: float, gap: float, core_index: float,
                      wavelength: float, env_width: float):
    geo = Geometry(system_width, env_width, gap, core_index, wavelength)
    pts = coupling_spectrum(geo)
    return PchipInterpolator(pts[:, 0], pts[:, 1], extrapolate=True)


def spectral_density(geometry: Geometry, n: float) -> float:
    """Bath spectral density J(n) = g^2(n) w_e * n / sqrt(n_d^2 - n^2).

    g^2(n) w_e comes from monotone-cubic interpolation of the discrete
    coupling spectrum of a wide reference environment (the geometry's own
    if w_e >= 20 um, else a 20 um stand-in), since the product is
    width-invariant.
    """
    n_d = geometry.core_index
    if not (1.0 < n < n_d):
        raise DomainError(f"mode index {n} outside (1, {n_d})")
    ref_width = max(geometry.env_width, CONTINUUM_REF_WIDTH)
    interp = _g2w_interpolator(
        geometry.system_width, geometry.gap, geometry.core_index,
        geometry.wavelength, ref_width,
    )
    return float(interp(n)) * n / math.sqrt(n_d**2 - n**2)


@lru_cache(maxsize=64)
def _beta0_cached(system_width, gap, core_index, wavelength) -> float:
    # beta0 is independent of the environment width only through the m
    # correction, which is set by the evanescent tail over the gap; a
    # deep environment stands in for any w_e.
    from . import slab, star
    geo = Geometry(system_width, 10.0, gap, core_index, wavelength)
    sys_slab = geo.system_slab
    mode = slab.solve_modes(sys_slab)[0]
    ov = star.compute_overlaps(geo)
    return (mode.n_eff + ov.m_self_sys) * geo.k


def _beta0(geometry: Geometry) -> float:
    return _beta0_cached(geometry.system_width, geometry.gap,
                         geometry.core_index, geometry.wavelength)


def decay_length_analytic(geometry: Geometry) -> float:
    """Closed-form Markovian decay length of the system energy.

    L = L0 * exp(+2 sqrt(beta0^2 - k^2) d): weaker coupling at larger gap
    means slower decay, so the exponent must be positive in d.
    """
    k = geometry.k
    n_d = geometry.core_index
    beta0 = _beta0(geometry)
    n0 = beta0 / k
    l0 = (1.0 / k) * n0 * (n_d**2 - 1.0) ** 2 * (
        k * geometry.system_width + 2.0 / math.sqrt(n0**2 - 1.0)
    ) / (8.0 * (n0**2 - 1.0) * (n_d**2 - n0**2) ** 1.5)
    return l0 * math.exp(2.0 * math.sqrt(beta0**2 - k**2) * geometry.gap)


def decay_length_markov(geometry: Geometry) -> float:
    """L = 1/(2 J(n0)), the continuum-limit rate from the sampled spectrum."""
    n0 = _beta0(geometry) / geometry.k
    return 1.0 / (2.0 * spectral_density(geometry, n0))


def fit_decay(energy: np.ndarray, z_lo: float = 0.0) -> DecayFit:
    """Log-linear fit of the initial decay of an energy trace.

    ``energy`` has columns (z, E).  The window ends at the earlier of the
    first qualifying local minimum of E or where E drops below
    DECAY_FLOOR * E(0); the fit is ln E = c - z/L.
    """
    energy = np.asarray(energy, dtype=float)
    z, e = energy[:, 0], energy[:, 1]
    e0 = e[0]
    if len(e) < 4 or not np.any(e[1:] < e0):
        raise NonDecayingTrace("energy does not decay")
    minima, _ = find_peaks(-e, prominence=REVIVAL_PROMINENCE * e0)
    i_hi = len(z) - 1
    if len(minima):
        i_hi = min(i_hi, minima[0])
    floor = np.nonzero(e < DECAY_FLOOR * e0)[0]
    if len(floor):
        i_hi = min(i_hi, floor[0])
    if i_hi < len(z) - 1 and np.max(e[i_hi:]) > 0.9 * e0:
        # a full recurrence after the window means oscillation (coherent
        # exchange), not dissipation into a quasi-continuum
        raise NonDecayingTrace("trace recurs to its initial energy")
    mask = (z >= z_lo) & (np.arange(len(z)) <= i_hi) & (e > 0)
    if np.count_nonzero(mask) < 3:
        raise NonDecayingTrace("decaying window too short to fit")
    zz, le = z[mask], np.log(e[mask])
    slope, intercept = np.polyfit(zz, le, 1)
    if slope >= 0:
        raise NonDecayingTrace("no net decay over the fitted window")
    resid = le - (slope * zz + intercept)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(L_fit=-1.0 / slope, fit_window=(float(zz[0]), float(zz[-1])),
                    r_squared=max(0.0, min(1.0, r2)))


def decay_length_measured(geometry: Geometry) -> DecayFit:
    """Fit the decay length from an evolved trace.

    The environment is widened (if needed) so the first boundary revival
    falls several expected decay lengths out; otherwise a long decay is
    interrupted by the revival before the exponential regime can
    establish itself and the fit is biased short.
    """
    l_est = decay_length_analytic(geometry)
    w_e = max(geometry.env_width, 2.5 * l_est / revival_slope(geometry))
    z_max = max(50.0, 2.0 * l_est + 10.0)
    geom = Geometry(geometry.system_width, w_e, geometry.gap,
                    geometry.core_index, geometry.wavelength)
    h = build_hamiltonian(geom)
    tr = evolve(h, z_max=z_max, dz_out=0.1, method="expm")
    return fit_decay(np.column_stack([tr.z_grid, tr.energy_sys()]))


def revival_period(energy: np.ndarray, statistic: str = "onset",
                   prominence: float = REVIVAL_PROMINENCE) -> RevivalFit:
    """First revival of an energy trace.

    ``statistic="peak"`` returns the z of the first local maximum with the
    given prominence (fraction of E(0)); ``"onset"`` (default) returns the
    z of the energy minimum preceding that maximum, i.e. where the
    reflected leakage first returns.  The onset is the statistic whose
    scaling with w_e follows the ray-bounce formula; the peak lags it by a
    coupling- and dispersion-dependent buildup.
    """
    energy = np.asarray(energy, dtype=float)
    z, e = energy[:, 0], energy[:, 1]
    e0 = e[0]
    peaks, _ = find_peaks(e, prominence=prominence * e0)
    if not len(peaks):
        raise NoRevivalFound("no peak with the required prominence")
    i_pk = peaks[0]
    i_on = int(np.argmin(e[: i_pk + 1]))
    if statistic == "peak":
        r = float(z[i_pk])
    elif statistic == "onset":
        r = float(z[i_on])
    else:
        raise ValueError(f"unknown statistic {statistic!r}")
    return RevivalFit(R=r, z_onset=float(z[i_on]), z_peak=float(z[i_pk]))


def revival_analytic(geometry: Geometry, r0: float) -> float:
    """Ray-model revival period 2 w_e tan(chi) + R0, sin(chi) = beta0/(n_d k)."""
    return revival_slope(geometry) * geometry.env_width + r0


def revival_slope(geometry: Geometry) -> float:
    """d R / d w_e = 2 tan(chi) = 2 n0 / sqrt(n_d^2 - n0^2)."""
    n0 = _beta0(geometry) / geometry.k
    n_d = geometry.core_index
    return 2.0 * n0 / math.sqrt(n_d**2 - n0**2)


def revival_scaling_fit(widths, revivals) -> tuple[float, float, float]:
    """Linear regression R(w_e): returns (slope, R0, r_squared)."""
    w = np.asarray(widths, dtype=float)
    r = np.asarray(revivals, dtype=float)
    slope, r0 = np.polyfit(w, r, 1)
    resid = r - (slope * w + r0)
    r2 = 1.0 - float(np.sum(resid**2)) / float(np.sum((r - r.mean()) ** 2))
    return float(slope), float(r0), r2


def field_spectrum(trace: StateTrace, h: StarHamiltonian) -> np.ndarray:
    """Hann-windowed power spectrum of a(z), axis in effective index n.

    Frequencies are mapped so that the free-evolution peak of
    a(z) = e^{-i beta0 z} sits at n = beta0/k; power is normalized to a
    unit peak.  Columns (n, power), ascending n.
    """
    z = trace.z_grid
    dz = np.diff(z)
    if not np.allclose(dz, dz[0], rtol=1e-9, atol=1e-12):
        raise ValueError("field_spectrum needs uniform z sampling")
    a = trace.a * np.hanning(len(z))
    spec = np.abs(np.fft.fft(a)) ** 2
    omega = 2.0 * math.pi * np.fft.fftfreq(len(z), d=float(dz[0]))
    n_axis = -omega / h.k
    order = np.argsort(n_axis)
    spec = spec[order]
    return np.column_stack([n_axis[order], spec / spec.max()])


def effective_index_shift(schedule, k: float) -> float:
    """Nominal index shift N*phi/(k z_max), phi wrapped to (-pi, pi]."""
    phi = math.remainder(schedule.phi, 2.0 * math.pi)
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    return schedule.n_kicks * phi / (k * schedule.z_max)


def kernel_dynamics(h: StarHamiltonian, z_max: float,
                    dz: float = 0.01) -> np.ndarray:
    """Interaction-frame integro-differential solution; columns (z, |a|^2).

    da/dz = -int_0^z a(tau) K(tau - z) dtau, marched with a Heun
    predictor-corrector and trapezoid quadrature of the memory integral.
    This is the independent route against which the direct propagator is
    cross-checked.
    """
    n = int(round(z_max / dz))
    z = np.arange(n + 1) * dz
    kneg = memory_kernel(h, -z).values  # K(-m dz), m >= 0
    a = np.empty(n + 1, dtype=complex)
    a[0] = 1.0

    def deriv(m: int, amps: np.ndarray) -> complex:
        if m == 0:
            return 0.0
        # trapezoid over tau = 0..z_m of a(tau) K(tau - z_m)
        integrand = amps[: m + 1] * kneg[m::-1]
        return -dz * (np.sum(integrand) - 0.5 * (integrand[0] + integrand[-1]))

    for m in range(n):
        f0 = deriv(m, a)
        a[m + 1] = a[m] + dz * f0  # predictor
        f1 = deriv(m + 1, a)
        a[m + 1] = a[m] + 0.5 * dz * (f0 + f1)
    return np.column_stack([z, np.abs(a) ** 2])
