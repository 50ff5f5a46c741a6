"""Evolution of the amplitude vector (a, b_1..b_N) along z.

Solves i d/dz psi = H psi in the lab frame.  Two interchangeable paths:

* ``method="rk"`` - adaptive DOP853 on the complex system (default);
* ``method="expm"`` - piecewise exact propagation through one Hermitian
  eigendecomposition, exactly unitary; the internal cross-check and the
  fast path for parameter scans.

Instantaneous phase kicks multiply the system amplitude by e^{i phi}
between segments; both the pre- and post-kick states are recorded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepSizeUnderflow
from .star import StarHamiltonian


@dataclass(frozen=True)
class ModulationSchedule:
    """N equal-interval phase kicks of phase phi applied to the system."""

    n_kicks: int
    phi: float
    z_max: float
    positions: tuple[float, ...]

    def __post_init__(self):
        if self.n_kicks < 0:
            raise ValueError("n_kicks must be >= 0")
        if len(self.positions) != self.n_kicks:
            raise ValueError("need exactly n_kicks positions")
        pos = np.asarray(self.positions)
        if self.n_kicks and not (
            np.all(np.diff(pos) > 0) and pos[0] > 0 and pos[-1] < self.z_max
        ):
            raise ValueError("positions must be strictly increasing in (0, z_max)")


@dataclass(frozen=True)
class StateVector:
    """System amplitude a plus environment amplitudes b_j."""

    a: complex
    b: np.ndarray

    @property
    def norm_sq(self) -> float:
        return abs(self.a) ** 2 + float(np.sum(np.abs(self.b) ** 2))

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.a], self.b]).astype(complex)


@dataclass(frozen=True)
class StateTrace:
    """Amplitudes sampled on a strictly increasing z grid.

    At a kick position the stored state is the post-kick one; the pre-kick
    state at that z is kept in ``pre_kick_states`` (kicks leave |a| and
    hence every energy unchanged, so energy traces need only the grid).
    """

    z_grid: np.ndarray
    amplitudes: np.ndarray  # shape (len(z_grid), 1 + N_env), column 0 = a
    kick_positions: tuple[float, ...] = ()
    pre_kick_states: tuple[np.ndarray, ...] = field(default=())

    @property
    def a(self) -> np.ndarray:
        return self.amplitudes[:, 0]

    def energy_sys(self) -> np.ndarray:
        return np.abs(self.amplitudes[:, 0]) ** 2

    def energy_env(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes[:, 1:]) ** 2, axis=1)

    def norm_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def to_csv(self, path) -> None:
        rows = np.column_stack([
            self.z_grid,
            self.amplitudes[:, 0].real,
            self.amplitudes[:, 0].imag,
            self.energy_sys(),
            self.energy_env(),
        ])
        header = "z (um),re_a,im_a,energy_sys,energy_env_total"
        with open(path, "w") as f:
            f.write(header + "\n")
            for r in rows:
                f.write(",".join(repr(float(v)) for v in r) + "\n")


def apply_kick(state: StateVector, phi: float) -> StateVector:
    """a -> a * e^{i phi}; environment amplitudes untouched."""
    return StateVector(a=state.a * complex(math.cos(phi), math.sin(phi)),
                       b=state.b)


def initial_state(h: StarHamiltonian) -> StateVector:
    """Canonical launch: all energy in the system waveguide."""
    return StateVector(a=1.0 + 0.0j, b=np.zeros(h.n_env, dtype=complex))


class _ExpmPropagator:
    """Exact segment propagator from one Hermitian eigendecomposition."""

    def __init__(self, h: StarHamiltonian):
        evals, evecs = np.linalg.eigh(h.matrix())
        self.evals = evals
        self.evecs = evecs

    def advance(self, psi: np.ndarray, dz: float) -> np.ndarray:
        coeff = self.evecs.conj().T @ psi
        coeff *= np.exp(-1j * self.evals * dz)
        return self.evecs @ coeff


def _segment_rk(hmat, psi0, z0, z_targets, rtol, atol):
    def rhs(_, y):
        return -1j * (hmat @ y)

    sol = solve_ivp(
        rhs, (z0, z_targets[-1]), psi0, method="DOP853",
        t_eval=z_targets, rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise StepSizeUnderflow(sol.message)
    return sol.y.T.astype(complex)


def evolve(
    h: StarHamiltonian,
    initial: StateVector | None = None,
    z_max: float = 50.0,
    dz_out: float = 0.05,
    schedule: ModulationSchedule | None = None,
    method: str = "rk",
    rtol: float = 1e-12,
    atol: float = 1e-12,
) -> StateTrace:
    """Propagate to z_max, sampling every dz_out plus at every kick."""
    if z_max <= 0 or dz_out <= 0:
        raise ValueError("z_max and dz_out must be positive")
    if initial is None:
        initial = initial_state(h)
    if initial.norm_sq == 0:
        raise ValueError("initial state must have nonzero norm")
    kicks = []
    phi = 0.0
    if schedule is not None and schedule.n_kicks:
        kicks = [z for z in schedule.positions if z < z_max]
        phi = schedule.phi

    grid = np.arange(0.0, z_max + 0.5 * dz_out, dz_out)
    grid[-1] = min(grid[-1], z_max)
    grid = np.unique(np.concatenate([grid, [z_max], kicks]))

    hmat = h.matrix()
    prop = _ExpmPropagator(h) if method == "expm" else None
    if method not in ("rk", "expm"):
        raise ValueError(f"unknown method {method!r}")

    psi = initial.as_array()
    out = np.empty((len(grid), len(psi)), dtype=complex)
    out[0] = psi
    pre_kick = []
    kick_set = {float(z) for z in kicks}
    segment_edges = [0.0] + sorted(kick_set) + [z_max]
    kick_factor = complex(math.cos(phi), math.sin(phi))

    idx = 1
    for lo, hi in zip(segment_edges[:-1], segment_edges[1:]):
        targets = grid[(grid > lo) & (grid <= hi)]
        if len(targets):
            if prop is not None:
                cur = psi
                zprev = lo
                for j, zt in enumerate(targets):
                    cur = prop.advance(cur, zt - zprev)
                    out[idx + j] = cur
                    zprev = zt
                psi = cur
            else:
                seg = _segment_rk(hmat, psi, lo, targets, rtol, atol)
                out[idx:idx + len(targets)] = seg
                psi = seg[-1].copy()
            idx += len(targets)
        if hi in kick_set:
            pre_kick.append(psi.copy())
            psi = psi.copy()
            psi[0] *= kick_factor
            # stored sample at the kick z becomes the post-kick state
            out[idx - 1] = psi
    return StateTrace(
        z_grid=grid,
        amplitudes=out,
        kick_positions=tuple(sorted(kick_set)),
        pre_kick_states=tuple(pre_kick),
    )


def energy_trace(trace: StateTrace) -> np.ndarray:
    """Columns (z, |a(z)|^2)."""
    return np.column_stack([trace.z_grid, trace.energy_sys()])
