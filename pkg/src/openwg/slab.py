"""Guided TE modes of a symmetric three-layer dielectric slab.

The slab is centered at x = 0 with core half-width w/2, core index n_d and
cladding index 1 (air).  Guided modes satisfy the transcendental
characteristic equations

    even:  kappa * tan(kappa*w/2) = gamma
    odd:  -kappa * cot(kappa*w/2) = gamma

with kappa = k*sqrt(n_d^2 - n_eff^2) and gamma = k*sqrt(n_eff^2 - 1).
All lengths are in micrometers, wavenumbers in 1/um, fields in um^(-1/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import RootBracketFailure

#: grid density used to bracket characteristic-equation roots (per parity)
BRACKET_GRID_POINTS = 2048


@dataclass(frozen=True)
class SlabSpec:
    """Geometry and material of one isolated slab waveguide."""

    core_index: float
    width: float
    wavelength: float
    clad_index: float = 1.0

    def __post_init__(self):
        if not self.core_index > self.clad_index >= 1.0:
            raise ValueError("require core_index > clad_index >= 1")
        if self.width <= 0 or self.wavelength <= 0:
            raise ValueError("width and wavelength must be positive")

    @property
    def k(self) -> float:
        """Vacuum wavenumber 2*pi/lambda."""
        return 2.0 * math.pi / self.wavelength

    @property
    def v_number(self) -> float:
        return self.k * self.width * math.sqrt(
            self.core_index**2 - self.clad_index**2
        )


@dataclass(frozen=True)
class GuidedMode:
    """One solved TE eigenmode of a SlabSpec."""

    n_eff: float
    parity: str  # "even" | "odd"
    order: int
    kappa: float  # transverse wavenumber in the core, 1/um
    gamma: float  # evanescent decay rate in the cladding, 1/um
    amplitude: float  # normalization constant, um^(-1/2)


def count_modes(spec: SlabSpec) -> int:
    """Number of guided TE modes, 1 + floor(V/pi).

    The fundamental even mode of a symmetric slab has no cutoff, so the
    count is at least 1 for any positive width.
    """
    return 1 + int(math.floor(spec.v_number / math.pi))


def _char_even(n: float, spec: SlabSpec) -> float:
    # kappa*sin(theta) - gamma*cos(theta): same roots as kappa*tan(theta) =
    # gamma but continuous (no tangent poles), so every bracketed sign
    # change is a genuine root.
    k = spec.k
    kappa = k * math.sqrt(spec.core_index**2 - n * n)
    gamma = k * math.sqrt(n * n - spec.clad_index**2)
    theta = 0.5 * kappa * spec.width
    return kappa * math.sin(theta) - gamma * math.cos(theta)


def _char_odd(n: float, spec: SlabSpec) -> float:
    k = spec.k
    kappa = k * math.sqrt(spec.core_index**2 - n * n)
    gamma = k * math.sqrt(n * n - spec.clad_index**2)
    theta = 0.5 * kappa * spec.width
    return kappa * math.cos(theta) + gamma * math.sin(theta)


def _find_roots(spec: SlabSpec, char) -> list[float]:
    lo = spec.clad_index + 1e-9
    hi = spec.core_index - 1e-9
    # roots crowd toward n_eff = core_index for wide slabs, so the grid
    # density scales with the expected mode count
    npts = max(BRACKET_GRID_POINTS, 120 * count_modes(spec))
    grid = np.linspace(lo, hi, npts)
    vals = np.array([char(n, spec) for n in grid])
    roots = []
    sign = np.sign(vals)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        try:
            root = brentq(
                char, grid[i], grid[i + 1], args=(spec,),
                xtol=1e-13, rtol=8.9e-16, maxiter=200,
            )
        except (ValueError, RuntimeError) as exc:
            raise RootBracketFailure(
                f"bracket [{grid[i]:.6f}, {grid[i + 1]:.6f}] failed: {exc}"
            ) from exc
        roots.append(root)
    # exact zeros on the grid (measure zero, but cheap to honor)
    roots.extend(grid[sign == 0].tolist())
    return roots


def _make_mode(n_eff: float, parity: str, spec: SlabSpec) -> GuidedMode:
    k = spec.k
    kappa = k * math.sqrt(spec.core_index**2 - n_eff**2)
    gamma = k * math.sqrt(n_eff**2 - spec.clad_index**2)
    w = spec.width
    if parity == "even":
        # closed-form of integral A^2 [w/2 + sin(kw)/2k + cos^2(kw/2)/g] = 1
        norm = 0.5 * w + math.sin(kappa * w) / (2.0 * kappa) \
            + math.cos(0.5 * kappa * w) ** 2 / gamma
    else:
        norm = 0.5 * w - math.sin(kappa * w) / (2.0 * kappa) \
            + math.sin(0.5 * kappa * w) ** 2 / gamma
    return GuidedMode(
        n_eff=n_eff,
        parity=parity,
        order=0,  # assigned after global sort
        kappa=kappa,
        gamma=gamma,
        amplitude=1.0 / math.sqrt(norm),
    )


def solve_modes(spec: SlabSpec) -> list[GuidedMode]:
    """All guided TE modes of the slab, sorted by descending n_eff.

    Raises RootBracketFailure if the bracketing grid does not recover
    exactly count_modes(spec) roots; that signals a numerical defect,
    not a physical regime.
    """
    found = [(n, "even") for n in _find_roots(spec, _char_even)]
    found += [(n, "odd") for n in _find_roots(spec, _char_odd)]
    found.sort(key=lambda t: -t[0])
    expected = count_modes(spec)
    if len(found) != expected:
        raise RootBracketFailure(
            f"found {len(found)} roots, expected {expected} "
            f"(V={spec.v_number:.4f})"
        )
    modes = []
    for order, (n_eff, parity) in enumerate(found):
        m = _make_mode(n_eff, parity, spec)
        modes.append(GuidedMode(
            n_eff=m.n_eff, parity=m.parity, order=order,
            kappa=m.kappa, gamma=m.gamma, amplitude=m.amplitude,
        ))
    return modes


def field_profile(mode: GuidedMode, spec: SlabSpec, x) -> np.ndarray:
    """Normalized transverse profile phi(x), x relative to the core center.

    Even modes: A*cos(kappa*x) in the core, matched exponential outside.
    Odd modes: A*sin(kappa*x) in the core, sign-matched exponential tail.
    Continuous at |x| = w/2 by construction.  Sign convention: even modes
    positive at x = 0; odd modes positive at x = +w/4.
    """
    x = np.asarray(x, dtype=float)
    half = 0.5 * spec.width
    inside = np.abs(x) <= half
    out = np.empty(x.shape, dtype=float)
    a = mode.amplitude
    if mode.parity == "even":
        edge = a * math.cos(mode.kappa * half)
        out[inside] = a * np.cos(mode.kappa * x[inside])
        out[~inside] = edge * np.exp(-mode.gamma * (np.abs(x[~inside]) - half))
    else:
        sign = 1.0 if math.sin(mode.kappa * half * 0.5) >= 0 else -1.0
        edge = sign * a * math.sin(mode.kappa * half)
        out[inside] = sign * a * np.sin(mode.kappa * x[inside])
        out[~inside] = np.sign(x[~inside]) * edge * np.exp(
            -mode.gamma * (np.abs(x[~inside]) - half)
        )
    return out
