"""Dynamical-decoupling schedules, the microdisk phase element, and scans.

A schedule is N equally spaced instantaneous phase kicks on the system
amplitude.  The microdisk is modeled purely by its stationary transmission
phase: an overcoupled whispering-gallery resonator flips the phase of the
bus field by ~pi on resonance while transmitting near-unit magnitude.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .propagate import ModulationSchedule, _ExpmPropagator, initial_state
from .star import Geometry, StarHamiltonian, build_hamiltonian


@dataclass(frozen=True)
class WgmModulator:
    """Loss rates of the microdisk, any common frequency unit."""

    kappa_e: float
    kappa_i: float = 0.0

    def __post_init__(self):
        if not self.kappa_e > self.kappa_i >= 0.0:
            raise ValueError("require kappa_e > kappa_i >= 0 (overcoupled)")


def make_schedule(n_kicks: int, phi: float, z_max: float) -> ModulationSchedule:
    """Kicks at interval midpoints z_m = (m - 1/2) z_max / N, m = 1..N."""
    if n_kicks < 0:
        raise ValueError("n_kicks must be >= 0")
    if z_max <= 0:
        raise ValueError("z_max must be positive")
    positions = tuple(
        (m - 0.5) * z_max / n_kicks for m in range(1, n_kicks + 1)
    )
    return ModulationSchedule(n_kicks=n_kicks, phi=phi, z_max=z_max,
                              positions=positions)


def wgm_transmission(delta: float, mod: WgmModulator) -> complex:
    """Stationary bus transmission T(Delta) of the overcoupled disk.

    T = -[(kappa_e - kappa_i) - i Delta] / [(kappa_e + kappa_i) + i Delta]:
    |T| <= 1 with equality only for a lossless disk, |T| -> 1 and phase
    -> 0 far off resonance, and T(0) = -(kappa_e - kappa_i)/(kappa_e +
    kappa_i) (the on-resonance pi flip).
    """
    return -((mod.kappa_e - mod.kappa_i) - 1j * delta) / \
        ((mod.kappa_e + mod.kappa_i) + 1j * delta)


def wgm_phase(delta: float, mod: WgmModulator) -> float:
    """arg T(Delta) in (-pi, pi]; pi - 2*atan(Delta/kappa_e) for kappa_i=0."""
    return float(np.angle(wgm_transmission(delta, mod)))


def _max_workers() -> int:
    env = os.environ.get("OPENWG_THREADS", "")
    if env.isdigit() and int(env) > 0:
        return int(env)
    return min(8, os.cpu_count() or 1)


def _probe_energy(prop: _ExpmPropagator, psi0: np.ndarray,
                  schedule: ModulationSchedule, z_probe: float) -> float:
    """|a(z_probe)|^2 under piecewise-exact evolution with kicks."""
    kick = complex(math.cos(schedule.phi), math.sin(schedule.phi))
    psi = psi0
    z = 0.0
    for zk in schedule.positions:
        if zk >= z_probe:
            break
        psi = prop.advance(psi, zk - z)
        psi = psi.copy()
        psi[0] *= kick
        z = zk
    psi = prop.advance(psi, z_probe - z)
    return float(abs(psi[0]) ** 2)


def dd_scan(geometry: Geometry, n_kicks_list, phi_grid, z_probe: float,
            h: StarHamiltonian | None = None) -> np.ndarray:
    """System energy at z_probe for every (N, phi); columns (N, phi, E).

    Rows are sorted by (N, phi).  Grid points are independent evolutions
    of a single shared Hamiltonian eigendecomposition.
    """
    if h is None:
        h = build_hamiltonian(geometry)
    prop = _ExpmPropagator(h)
    psi0 = initial_state(h).as_array()
    points = sorted(
        (int(n), float(phi)) for n in n_kicks_list for phi in phi_grid
    )

    def one(pt):
        n, phi = pt
        sched = make_schedule(n, phi, z_probe)
        return (n, phi, _probe_energy(prop, psi0, sched, z_probe))

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        rows = list(pool.map(one, points))
    return np.array(rows)


def wgm_scan(geometry: Geometry, mod: WgmModulator, n_kicks: int,
             delta_grid, z_probe: float,
             h: StarHamiltonian | None = None) -> np.ndarray:
    """Energy at z_probe with kick phase set by the disk's transmission.

    Columns (delta, phi(delta), E), sorted by delta.  Shares the exact
    evolution path with dd_scan, so the delta = 0, kappa_i = 0 row equals
    the dd_scan row at phi = pi bit for bit.
    """
    if h is None:
        h = build_hamiltonian(geometry)
    prop = _ExpmPropagator(h)
    psi0 = initial_state(h).as_array()
    deltas = sorted(float(d) for d in delta_grid)

    def one(delta):
        phi = wgm_phase(delta, mod)
        sched = make_schedule(n_kicks, phi, z_probe)
        return (delta, phi, _probe_energy(prop, psi0, sched, z_probe))

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        rows = list(pool.map(one, deltas))
    return np.array(rows)
