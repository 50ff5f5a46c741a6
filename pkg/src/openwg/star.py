"""Star-topology Hamiltonian of the two-slab system from mode overlaps.

Coordinate convention: the system core occupies [-d - w_s, -d], the
environment core occupies [0, w_e]; the air gap is (-d, 0).  The single
system mode plays the open-system role; every guided mode of the (wide)
environment slab is one bath oscillator.  Couplings and propagation-
constant corrections come from first-order overlap integrals of one
guide's mode field with the other guide's index perturbation.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy.integrate import quad

from . import slab
from .errors import NegativeCouplingProduct, QuadratureFailure, SystemNotSingleMode

#: relative tolerance demanded of each overlap integral
QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class Geometry:
    """Two-waveguide layout; lengths in um."""

    system_width: float
    env_width: float
    gap: float
    core_index: float = 3.5
    wavelength: float = 1.55

    def __post_init__(self):
        if min(self.system_width, self.env_width, self.gap,
               self.wavelength) <= 0:
            raise ValueError("all lengths must be positive")
        if self.core_index <= 1:
            raise ValueError("core_index must exceed 1")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def system_slab(self) -> slab.SlabSpec:
        return slab.SlabSpec(self.core_index, self.system_width,
                             self.wavelength)

    @property
    def env_slab(self) -> slab.SlabSpec:
        return slab.SlabSpec(self.core_index, self.env_width, self.wavelength)

    @property
    def system_center(self) -> float:
        return -self.gap - 0.5 * self.system_width

    @property
    def env_center(self) -> float:
        return 0.5 * self.env_width


@dataclass(frozen=True)
class OverlapTable:
    """First-order overlap integrals, already divided by 2*n*k."""

    m_self_sys: float
    m_self_env: tuple[float, ...]
    g_sys_env: tuple[float, ...]  # system bra, environment ket
    g_env_sys: tuple[float, ...]  # environment bra, system ket


@dataclass(frozen=True)
class StarHamiltonian:
    """Diagonal (beta0, beta_j) plus first-row/column couplings g_j, 1/um."""

    beta0: float
    betas: tuple[float, ...]
    couplings: tuple[float, ...]
    env_mode_indices: tuple[float, ...]
    k: float
    geometry: Geometry

    @property
    def n_env(self) -> int:
        return len(self.betas)

    def matrix(self) -> np.ndarray:
        """Dense (N+1)x(N+1) Hermitian matrix; index 0 is the system."""
        n = self.n_env
        h = np.zeros((n + 1, n + 1))
        h[0, 0] = self.beta0
        h[np.arange(1, n + 1), np.arange(1, n + 1)] = self.betas
        h[0, 1:] = self.couplings
        h[1:, 0] = self.couplings
        return h

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "beta0": self.beta0,
            "betas": list(self.betas),
            "couplings": list(self.couplings),
            "env_mode_indices": list(self.env_mode_indices),
            "geometry": asdict(self.geometry),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "StarHamiltonian":
        doc = json.loads(text)
        return cls(
            beta0=doc["beta0"],
            betas=tuple(doc["betas"]),
            couplings=tuple(doc["couplings"]),
            env_mode_indices=tuple(doc["env_mode_indices"]),
            k=doc["k"],
            geometry=Geometry(**doc["geometry"]),
        )


def perturbation_potential(geometry: Geometry, which: str, x) -> np.ndarray:
    """V^s or V^e in 1/um^2: (n_d^2 - 1) k^2 inside the named core, else 0."""
    x = np.asarray(x, dtype=float)
    strength = (geometry.core_index**2 - 1.0) * geometry.k**2
    if which == "system":
        lo, hi = -geometry.gap - geometry.system_width, -geometry.gap
    elif which == "environment":
        lo, hi = 0.0, geometry.env_width
    else:
        raise ValueError("which must be 'system' or 'environment'")
    return np.where((x >= lo) & (x <= hi), strength, 0.0)


def _integrate(f, lo: float, hi: float) -> float:
    val, err = quad(f, lo, hi, epsabs=1e-14, epsrel=QUAD_RTOL, limit=400)
    if err > max(1e-8 * abs(val), 1e-10):
        raise QuadratureFailure(
            f"overlap integral error {err:.2e} (value {val:.2e})"
        )
    return val


def _system_mode(geometry: Geometry):
    sys_slab = geometry.system_slab
    if slab.count_modes(sys_slab) != 1:
        raise SystemNotSingleMode(
            f"w_s = {geometry.system_width} um supports "
            f"{slab.count_modes(sys_slab)} modes"
        )
    return sys_slab, slab.solve_modes(sys_slab)[0]


def compute_overlaps(geometry: Geometry) -> OverlapTable:
    """Overlap table between the system mode and every environment mode.

    The diagonal corrections m use the *other* guide's potential (the
    cross perturbation each mode actually feels); the couplings g pair a
    bra of one guide with a ket of the other under the bra guide's own
    core potential.  Each integrand is smooth on a single core interval,
    so plain adaptive quadrature over that interval suffices.
    """
    sys_slab, sys_mode = _system_mode(geometry)
    env_slab = geometry.env_slab
    env_modes = slab.solve_modes(env_slab)
    k = geometry.k
    strength = (geometry.core_index**2 - 1.0) * k**2
    xs_c = geometry.system_center
    xe_c = geometry.env_center
    sys_lo, sys_hi = -geometry.gap - geometry.system_width, -geometry.gap
    env_lo, env_hi = 0.0, geometry.env_width

    def phi_s(x):
        return slab.field_profile(sys_mode, sys_slab, np.asarray(x) - xs_c)

    # m_11^s: environment core perturbing the system mode
    m_self_sys = strength * _integrate(
        lambda x: phi_s(x) ** 2, env_lo, env_hi
    ) / (2.0 * sys_mode.n_eff * k)

    m_self_env = []
    g_sys_env = []
    g_env_sys = []
    for em in env_modes:
        def phi_e(x, em=em):
            return slab.field_profile(em, env_slab, np.asarray(x) - xe_c)

        m_self_env.append(strength * _integrate(
            lambda x: phi_e(x) ** 2, sys_lo, sys_hi
        ) / (2.0 * em.n_eff * k))
        g_sys_env.append(strength * _integrate(
            lambda x: phi_s(x) * phi_e(x), sys_lo, sys_hi
        ) / (2.0 * sys_mode.n_eff * k))
        g_env_sys.append(strength * _integrate(
            lambda x: phi_e(x) * phi_s(x), env_lo, env_hi
        ) / (2.0 * em.n_eff * k))
    return OverlapTable(
        m_self_sys=m_self_sys,
        m_self_env=tuple(m_self_env),
        g_sys_env=tuple(g_sys_env),
        g_env_sys=tuple(g_env_sys),
    )


def build_hamiltonian(geometry: Geometry) -> StarHamiltonian:
    """Assemble beta0, {beta_j}, {g_j} for the given geometry.

    Environment-environment off-diagonal terms are dropped (they are much
    smaller than every retained term).  g_j is the positive square root of
    g_sys_env * g_env_sys; a genuinely negative product signals a sign-
    convention bug and raises.
    """
    sys_slab, sys_mode = _system_mode(geometry)
    env_modes = slab.solve_modes(geometry.env_slab)
    ov = compute_overlaps(geometry)
    k = geometry.k
    if abs(ov.m_self_sys) > 0.05 * sys_mode.n_eff:
        warnings.warn(
            "perturbative correction m_11 exceeds 5% of n_eff; the "
            "weak-coupling model is outside its validity range",
            stacklevel=2,
        )
    couplings = []
    scale = max((abs(g) for g in ov.g_sys_env), default=0.0)
    for gs, ge in zip(ov.g_sys_env, ov.g_env_sys):
        prod = gs * ge
        if prod < 0.0:
            # negligible couplings may flip sign through quadrature noise
            if min(abs(gs), abs(ge)) < 1e-9 * scale:
                couplings.append(0.0)
                continue
            raise NegativeCouplingProduct(
                f"g_s = {gs:.3e}, g_e = {ge:.3e}"
            )
        couplings.append(math.sqrt(prod))
    betas = tuple(
        (em.n_eff + mjj) * k for em, mjj in zip(env_modes, ov.m_self_env)
    )
    return StarHamiltonian(
        beta0=(sys_mode.n_eff + ov.m_self_sys) * k,
        betas=betas,
        couplings=tuple(couplings),
        env_mode_indices=tuple(em.n_eff for em in env_modes),
        k=k,
        geometry=geometry,
    )


def coupling_spectrum(geometry: Geometry,
                      h: StarHamiltonian | None = None) -> np.ndarray:
    """(n_j^e, g_j^2 * w_e) pairs sorted by ascending mode index.

    The product g^2 * w_e collapses onto a single curve for different
    environment widths, which is what makes the continuum limit usable.
    """
    if h is None:
        h = build_hamiltonian(geometry)
    n = np.asarray(h.env_mode_indices)
    g2w = np.asarray(h.couplings) ** 2 * geometry.env_width
    order = np.argsort(n)
    return np.column_stack([n[order], g2w[order]])
