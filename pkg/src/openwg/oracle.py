"""Full-field one-way propagation of the two-guide structure on a grid.

Independent cross-check of the coupled-mode pipeline: the scalar field is
marched in z with a Crank-Nicolson paraxial scheme referenced to the
system mode index, so the phase-matched band that carries all of the
energy exchange is treated accurately.  The environment's outer dielectric
boundary stays inside the physical domain (its reflection *is* the revival
physics); complex absorbing layers terminate the grid well beyond it.

The z-stepping loop runs in the compiled kernel when available (see
openwg.kernels.BACKEND); the numpy/scipy fallback is numerically
identical.
"""
from __future__ import annotations

import json
import math

from dataclasses import dataclass, asdict

import numpy as np

from . import slab
from .errors import GridTooCoarse
from .kernels import BACKEND, run_steps
from .star import Geometry

#: peak absorber conductivity, 1/um^2
ABSORBER_STRENGTH = 20.0


@dataclass(frozen=True)
class GridSpec:
    """Computational window; absorbers of absorber_width sit at both x ends."""

    x_min: float
    x_max: float
    dx: float
    dz: float
    z_max: float
    absorber_width: float = 4.0


@dataclass(frozen=True)
class PhasePlates:
    """Thin phase plates over the system core at the given z positions."""

    positions: tuple[float, ...]
    phi: float


@dataclass(frozen=True)
class FieldMap:
    grid: GridSpec
    x: np.ndarray
    z: np.ndarray
    values: np.ndarray  # (len(z), len(x)) complex
    n_ref: float


def default_grid(geometry: Geometry, z_max: float = 50.0,
                 dx: float = 0.01, dz: float = 0.02,
                 absorber_width: float = 4.0, margin: float = 2.0) -> GridSpec:
    """Window holding both cores plus `margin` of air before each absorber."""
    return GridSpec(
        x_min=-geometry.gap - geometry.system_width - margin - absorber_width,
        x_max=geometry.env_width + margin + absorber_width,
        dx=dx, dz=dz, z_max=z_max, absorber_width=absorber_width,
    )


def index_profile(geometry: Geometry, x: np.ndarray) -> np.ndarray:
    n = np.ones_like(x)
    in_sys = (x >= -geometry.gap - geometry.system_width) & (x <= -geometry.gap)
    in_env = (x >= 0.0) & (x <= geometry.env_width)
    n[in_sys | in_env] = geometry.core_index
    return n


def _absorber_profile(x: np.ndarray, grid: GridSpec) -> np.ndarray:
    sigma = np.zeros_like(x)
    w = grid.absorber_width
    lo = grid.x_min + w
    hi = grid.x_max - w
    left = x < lo
    right = x > hi
    sigma[left] = ABSORBER_STRENGTH * ((lo - x[left]) / w) ** 2
    sigma[right] = ABSORBER_STRENGTH * ((x[right] - hi) / w) ** 2
    return sigma


def _system_mode_field(geometry: Geometry, x: np.ndarray) -> np.ndarray:
    spec = geometry.system_slab
    mode = slab.solve_modes(spec)[0]
    return slab.field_profile(mode, spec, x - geometry.system_center), mode


def propagate_field(
    geometry: Geometry,
    grid: GridSpec,
    source=None,
    plates: PhasePlates | None = None,
    sample_every: int = 5,
    initial_field: np.ndarray | None = None,
    n_ref: float | None = None,
) -> FieldMap:
    """March the field from z = 0 to z_max; samples every `sample_every` steps.

    `source` is a GuidedMode of the system slab (default: the fundamental
    solved in place); `initial_field` overrides it with an arbitrary
    complex field on the grid, which is how absorber and custom-launch
    diagnostics are run.
    """
    if grid.dx > geometry.wavelength / (10.0 * geometry.core_index):
        raise GridTooCoarse(
            f"dx = {grid.dx} exceeds lambda/(10 n_d) = "
            f"{geometry.wavelength / (10 * geometry.core_index):.4f}"
        )
    x = np.arange(grid.x_min, grid.x_max + 0.5 * grid.dx, grid.dx)
    if initial_field is not None:
        field0 = np.asarray(initial_field, dtype=complex)
        if field0.shape != x.shape:
            raise ValueError("initial_field must match the x grid")
        if n_ref is None:
            raise ValueError("initial_field requires an explicit n_ref")
    elif source is None:
        field0, mode = _system_mode_field(geometry, x)
        if n_ref is None:
            n_ref = mode.n_eff
    else:
        field0 = slab.field_profile(source, geometry.system_slab,
                                    x - geometry.system_center)
        if n_ref is None:
            n_ref = source.n_eff
    k = geometry.k
    beta_r = n_ref * k
    n_prof = index_profile(geometry, x)
    w_pot = k**2 * (n_prof**2 - n_ref**2) + 1j * _absorber_profile(x, grid)

    nx = len(x)
    n_steps = int(round(grid.z_max / grid.dz))
    coef = 1j * grid.dz / (4.0 * beta_r)
    off = coef / grid.dx**2
    diag = coef * (-2.0 / grid.dx**2 + w_pot)
    lhs_d = np.full(nx, 1.0 + 0.0j) - diag
    lhs_dl = np.full(nx - 1, -off)
    lhs_du = np.full(nx - 1, -off)
    rhs_d = np.full(nx, 1.0 + 0.0j) + diag
    rhs_dl = np.full(nx - 1, off)
    rhs_du = np.full(nx - 1, off)

    if plates is not None and len(plates.positions):
        steps = sorted(
            max(0, int(round(zp / grid.dz)) - 1) for zp in plates.positions
        )
        plate_steps = np.asarray(steps, dtype=np.int64)
        factor = np.ones(nx, dtype=complex)
        in_sys = (x >= -geometry.gap - geometry.system_width) & \
            (x <= -geometry.gap)
        factor[in_sys] = complex(math.cos(plates.phi), math.sin(plates.phi))
    else:
        plate_steps = np.zeros(0, dtype=np.int64)
        factor = np.ones(nx, dtype=complex)

    n_samples = 1 + n_steps // sample_every
    out = np.empty((n_samples, nx), dtype=complex)
    run_steps(lhs_dl, lhs_d, lhs_du, rhs_dl, rhs_d, rhs_du,
              field0.astype(complex), n_steps, sample_every,
              plate_steps, factor, out)
    z = np.arange(n_samples) * (sample_every * grid.dz)
    return FieldMap(grid=grid, x=x, z=z, values=out, n_ref=float(n_ref))


def phase_plate(positions, phi: float) -> PhasePlates:
    """Plate set multiplying the system-core field by e^{i phi} at each z."""
    return PhasePlates(positions=tuple(sorted(positions)), phi=float(phi))


def project_energy(fieldmap: FieldMap, geometry: Geometry) -> np.ndarray:
    """Columns (z, E_sys): squared overlap with the system fundamental mode."""
    phi_s, _ = _system_mode_field(geometry, fieldmap.x)
    amp = fieldmap.values @ phi_s * fieldmap.grid.dx
    return np.column_stack([fieldmap.z, np.abs(amp) ** 2])


def measure_ray_angle(fieldmap: FieldMap, geometry: Geometry) -> float:
    """sin(chi) of the leakage ray, from ridge tracking in the environment.

    Tracks, for a band of z before the ray first reaches the outer
    boundary, the intensity-weighted transverse position of the leading
    leakage front; the fitted slope dx/dz = cot(chi) gives the incidence
    angle at the outer boundary.
    """
    x = fieldmap.x
    z = fieldmap.z
    inten = np.abs(fieldmap.values) ** 2
    env = (x > 0.4) & (x < geometry.env_width - 0.3)
    xe = x[env]
    # crude angle estimate bounds the tracking window
    n0 = fieldmap.n_ref
    kt_over_b = math.sqrt(geometry.core_index**2 - n0**2) / n0
    z_hit = geometry.env_width / kt_over_b
    band = (z > 0.25 * z_hit) & (z < 0.9 * z_hit)
    ridge = []
    for iz in np.nonzero(band)[0]:
        prof = inten[iz, env]
        # leading front: outermost local maximum above 20% of the row peak
        strong = np.nonzero(prof > 0.2 * prof.max())[0]
        ridge.append(xe[strong[-1]])
    slope = np.polyfit(z[band], ridge, 1)[0]  # dx/dz = cot(chi)
    return 1.0 / math.sqrt(1.0 + slope**2)


def export_binary(fieldmap: FieldMap, path_prefix: str) -> tuple[str, str]:
    """Flat little-endian float64 (re, im) pairs, x fastest, plus JSON header."""
    bin_path = f"{path_prefix}.bin"
    hdr_path = f"{path_prefix}.json"
    vals = fieldmap.values.astype(complex)
    with open(bin_path, "wb") as f:
        flat = np.empty(vals.size * 2)
        flat[0::2] = vals.real.ravel()
        flat[1::2] = vals.imag.ravel()
        f.write(flat.astype("<f8").tobytes())
    header = {
        "nz": int(vals.shape[0]),
        "nx": int(vals.shape[1]),
        "dx": fieldmap.grid.dx,
        "dz_sample": float(fieldmap.z[1] - fieldmap.z[0]) if len(fieldmap.z) > 1 else fieldmap.grid.dz,
        "x_min": fieldmap.grid.x_min,
        "n_ref": fieldmap.n_ref,
        "layout": "row-major, x fastest, little-endian float64 (re, im)",
        "grid": asdict(fieldmap.grid),
    }
    with open(hdr_path, "w") as f:
        json.dump(header, f, indent=2)
    return bin_path, hdr_path


def intensity_csv(fieldmap: FieldMap, path: str, every_x: int = 4,
                  every_z: int = 4) -> None:
    """Downsampled |psi|^2 table for plotting: columns z, x, intensity."""
    with open(path, "w") as f:
        f.write("z (um),x (um),intensity\n")
        for iz in range(0, len(fieldmap.z), every_z):
            for ix in range(0, len(fieldmap.x), every_x):
                f.write(
                    f"{float(fieldmap.z[iz])!r},{float(fieldmap.x[ix])!r},"
                    f"{float(abs(fieldmap.values[iz, ix]) ** 2)!r}\n"
                )
