"""Command-line front end: parse a run configuration, dispatch, write data.

Outputs are deterministic: CSV tables carry full-precision (round-trip
``repr``) floats, and a JSON metadata file echoes the configuration,
package version, and wall-clock timing.  Timing lives only in the
metadata so the CSV files are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, analysis, oracle, slab
from .ddcontrol import WgmModulator, _max_workers, dd_scan, make_schedule, \
    wgm_scan
from .errors import ConfigError, OpenwgError
from .propagate import evolve
from .star import Geometry, build_hamiltonian

EXPERIMENTS = (
    "modes", "hamiltonian", "evolve", "kernel", "decay-sweep",
    "revival-sweep", "dd-scan", "wgm-scan", "oracle",
    "fig1b", "fig2", "fig3", "fig4",
)

_DEFAULT_GAPS = (0.10, 0.15, 0.20, 0.25)
_DEFAULT_WIDTHS = (6.0, 8.0, 10.0, 12.0, 14.0)


@dataclass
class RunConfig:
    experiment: str = ""
    ws: float = 0.23
    we: float = 10.0
    gap: float = 0.15
    wavelength: float = 1.55
    zmax: float = 50.0
    n_kicks: tuple[int, ...] | None = None
    phi: tuple[float, ...] | None = None
    kappa_i: float = 0.0
    kappa_e: float = 1.0
    delta: tuple[float, ...] | None = None
    gaps: tuple[float, ...] = _DEFAULT_GAPS
    widths: tuple[float, ...] = _DEFAULT_WIDTHS
    part: str | None = None
    out: str = "."

    def geometry(self) -> Geometry:
        return Geometry(self.ws, self.we, self.gap,
                        wavelength=self.wavelength)


def _parse_number(token: str) -> float:
    """A float literal, optionally a multiple of pi: '0.5', 'pi', '2pi'."""
    t = token.strip().lower().replace("π", "pi")
    if t.endswith("pi"):
        head = t[:-2].strip()
        if head in ("", "+"):
            return math.pi
        if head == "-":
            return -math.pi
        return float(head) * math.pi
    return float(t)


def _parse_grid(text: str) -> tuple[float, ...]:
    """'a:b:n' -> n points from a to b (endpoint excluded); 'x,y,z' -> list."""
    if ":" in text:
        lo_s, hi_s, count_s = text.split(":")
        count = int(count_s)
        if count < 1:
            raise ConfigError(f"grid needs at least one point: {text!r}")
        lo, hi = _parse_number(lo_s), _parse_number(hi_s)
        return tuple(np.linspace(lo, hi, count, endpoint=False))
    return tuple(_parse_number(tok) for tok in text.split(","))


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(","))


def load_config(path: str | None, overrides: dict) -> RunConfig:
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    values: dict = {}
    if path is not None:
        try:
            with open(path) as f:
                doc = json.load(f)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        for key, val in doc.items():
            if key not in fields:
                raise ConfigError(f"unknown config field {key!r}")
            if isinstance(val, list):
                val = tuple(val)
            values[key] = val
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def validate(config: RunConfig) -> list[str]:
    """Precondition diagnostics; an empty list means the config is runnable."""
    diags: list[str] = []
    if not config.experiment:
        diags.append("no experiment selected")
    elif config.experiment not in EXPERIMENTS:
        diags.append(f"unknown experiment {config.experiment!r}")
    for name in ("ws", "we", "wavelength", "zmax"):
        if getattr(config, name) <= 0:
            diags.append(f"{name} must be positive")
    if config.gap <= 0:
        diags.append("gap must be positive")
    if config.ws > 0 and config.wavelength > 0:
        spec = slab.SlabSpec(3.5, config.ws, config.wavelength)
        if slab.count_modes(spec) > 1:
            diags.append("system waveguide not single-mode")
    if config.n_kicks is not None and any(n < 1 for n in config.n_kicks):
        diags.append("kick counts must be positive integers")
    if config.kappa_i < 0:
        diags.append("kappa_i must be non-negative")
    if config.experiment in ("wgm-scan", "fig4") and \
            config.kappa_e <= config.kappa_i:
        diags.append("kappa_e must exceed kappa_i")
    if config.part is not None and config.part not in ("c", "d"):
        diags.append(f"unknown figure part {config.part!r}")
    return diags


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".openwg-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header: str, rows) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(
            repr(float(v)) if not isinstance(v, str) else v for v in row))
    return "\n".join(lines) + "\n"


def _run_modes(config: RunConfig, out: str) -> tuple[list[str], dict]:
    rows = []
    for label, width in (("system", config.ws), ("environment", config.we)):
        spec = slab.SlabSpec(3.5, width, config.wavelength)
        for mode in slab.solve_modes(spec):
            rows.append((label, str(mode.order), mode.parity,
                         repr(mode.n_eff)))
    path = os.path.join(out, "modes.csv")
    _atomic_write(path, _csv("guide,order,parity,n_eff", rows))
    return [path], {}


def _run_hamiltonian(config: RunConfig, out: str) -> tuple[list[str], dict]:
    h = build_hamiltonian(config.geometry())
    jpath = os.path.join(out, "hamiltonian.json")
    _atomic_write(jpath, h.to_json())
    rows = [(float(j), n_e, b, g) for j, (n_e, b, g) in enumerate(
        zip((b / h.k for b in h.betas), h.betas, h.couplings))]
    cpath = os.path.join(out, "couplings.csv")
    _atomic_write(cpath, _csv(
        "mode_index,n_env,beta (1/um),g (1/um)", rows))
    return [jpath, cpath], {"beta0 (1/um)": h.beta0, "n_modes": len(h.betas)}


def _evolve_trace(config: RunConfig):
    h = build_hamiltonian(config.geometry())
    schedule = None
    if config.n_kicks is not None or config.phi is not None:
        if config.n_kicks is None or config.phi is None or \
                len(config.n_kicks) != 1 or len(config.phi) != 1:
            raise ConfigError(
                "evolve takes a single --N and a single --phi")
        schedule = make_schedule(config.n_kicks[0], config.phi[0],
                                 config.zmax)
    return h, evolve(h, z_max=config.zmax, schedule=schedule)


def _run_evolve(config: RunConfig, out: str,
                name: str = "trace") -> tuple[list[str], dict]:
    h, trace = _evolve_trace(config)
    path = os.path.join(out, f"{name}.csv")
    buf = []
    for z, a, es, ee in zip(trace.z_grid, trace.amplitudes[:, 0],
                            trace.energy_sys(), trace.energy_env()):
        buf.append((z, a.real, a.imag, es, ee))
    _atomic_write(path, _csv(
        "z (um),re_a,im_a,energy_sys,energy_env_total", buf))
    return [path], {"beta0 (1/um)": h.beta0}


def _run_kernel(config: RunConfig, out: str) -> tuple[list[str], dict]:
    h = build_hamiltonian(config.geometry())
    tau = np.arange(0.0, 40.0 + 1e-12, 0.01)
    kt = analysis.memory_kernel(h, tau)
    rows = [(t, v.real, v.imag, abs(v)) for t, v in zip(kt.tau_grid,
                                                        kt.values)]
    path = os.path.join(out, "kernel.csv")
    _atomic_write(path, _csv("tau (um),re_K,im_K,abs_K", rows))
    return [path], {"kernel_width (um)": analysis.kernel_width(kt)}


def _decay_table(config: RunConfig) -> list[tuple]:
    def one(d: float):
        geom = Geometry(config.ws, config.we, d,
                        wavelength=config.wavelength)
        fit = analysis.decay_length_measured(geom)
        return (d, fit.L_fit, analysis.decay_length_markov(geom),
                analysis.decay_length_analytic(geom), fit.r_squared)

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        return sorted(pool.map(one, config.gaps))


def _run_decay_sweep(config: RunConfig, out: str,
                     name: str = "decay_sweep") -> tuple[list[str], dict]:
    rows = _decay_table(config)
    path = os.path.join(out, f"{name}.csv")
    _atomic_write(path, _csv(
        "gap (um),L_fit (um),L_markov (um),L_analytic (um),r_squared", rows))
    return [path], {}


def _revival_table(config: RunConfig) -> tuple[list[tuple], dict]:
    # the revival *peak* lags the onset by a sizeable buildup, so the
    # trace must extend well past slope * w_e for find_peaks to see it
    z_max = max(config.zmax,
                2.0 * analysis.revival_slope(config.geometry())
                * max(config.widths) + 10.0)

    def one(w: float):
        geom = Geometry(config.ws, w, config.gap,
                        wavelength=config.wavelength)
        h = build_hamiltonian(geom)
        tr = evolve(h, z_max=z_max, method="expm")
        fit = analysis.revival_period(
            np.column_stack([tr.z_grid, tr.energy_sys()]))
        return (w, fit.R, fit.z_peak)

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        rows = sorted(pool.map(one, config.widths))
    slope, r0, r2 = analysis.revival_scaling_fit(
        [r[0] for r in rows], [r[1] for r in rows])
    extra = {"slope_fit (per um)": slope, "R0_fit (um)": r0,
             "r_squared": r2,
             "slope_analytic (per um)":
                 analysis.revival_slope(config.geometry())}
    return rows, extra


def _run_revival_sweep(config: RunConfig, out: str,
                       name: str = "revival_sweep"
                       ) -> tuple[list[str], dict]:
    rows, extra = _revival_table(config)
    path = os.path.join(out, f"{name}.csv")
    _atomic_write(path, _csv(
        "we (um),R_onset (um),z_peak (um)", rows))
    return [path], extra


def _run_dd_scan(config: RunConfig, out: str,
                 name: str = "dd_scan") -> tuple[list[str], dict]:
    n_kicks = config.n_kicks or (1, 5, 10)
    phi = config.phi if config.phi is not None else \
        tuple(np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False))
    rows = dd_scan(config.geometry(), n_kicks, phi, config.zmax)
    path = os.path.join(out, f"{name}.csv")
    _atomic_write(path, _csv("n_kicks,phi (rad),energy_sys", rows))
    return [path], {"n_rows": len(rows)}


def _run_wgm_scan(config: RunConfig, out: str,
                  name: str = "wgm_scan") -> tuple[list[str], dict]:
    mod = WgmModulator(kappa_e=config.kappa_e, kappa_i=config.kappa_i)
    n_kicks = (config.n_kicks or (10,))[0]
    # --delta is given in units of kappa_e
    delta_units = tuple(sorted(config.delta)) if config.delta is not None \
        else tuple(np.linspace(-5.0, 5.0, 81))
    delta = tuple(d * config.kappa_e for d in delta_units)
    rows = wgm_scan(config.geometry(), mod, n_kicks, delta, config.zmax)
    rows = [(d_u, phi, e) for d_u, (_, phi, e) in zip(delta_units, rows)]
    path = os.path.join(out, f"{name}.csv")
    _atomic_write(path, _csv("delta_over_kappa_e,phi (rad),energy_sys", rows))
    return [path], {"n_rows": len(rows)}


def _run_oracle(config: RunConfig, out: str) -> tuple[list[str], dict]:
    geom = config.geometry()
    grid = oracle.default_grid(geom, z_max=config.zmax)
    plates = None
    if config.n_kicks is not None and config.phi is not None:
        schedule = make_schedule(config.n_kicks[0], config.phi[0],
                                 config.zmax)
        plates = oracle.phase_plate(schedule.positions, schedule.phi)
    fm = oracle.propagate_field(geom, grid, plates=plates)
    energy = oracle.project_energy(fm, geom)
    epath = os.path.join(out, "oracle_energy.csv")
    _atomic_write(epath, _csv("z (um),energy_sys", energy))
    ipath = os.path.join(out, "oracle_intensity.csv")
    oracle.intensity_csv(fm, ipath)
    extra = {
        "scheme": "one-way paraxial Crank-Nicolson finite differences "
                  "(substitution for a full-field frequency-domain "
                  "solver; validated by grid halving)",
        "dx (um)": grid.dx, "dz (um)": grid.dz,
        "absorber_width (um)": grid.absorber_width,
    }
    if plates is None:
        try:
            extra["ray_sin_chi"] = oracle.measure_ray_angle(fm, geom)
        except OpenwgError:
            pass
    return [epath, ipath], extra


def _run_fig2(config: RunConfig, out: str) -> tuple[list[str], dict]:
    files: list[str] = []
    extra: dict = {}
    if config.part in (None, "c"):
        f, e = _run_revival_sweep(config, out, name="fig2c")
        files += f
        extra.update(e)
    if config.part in (None, "d"):
        rows = _decay_table(config)
        path = os.path.join(out, "fig2d.csv")
        _atomic_write(path, _csv(
            "gap (um),L_fit (um),L_analytic (um)",
            [(d, lf, la) for d, lf, _, la, _ in rows]))
        files.append(path)
    return files, extra


_DISPATCH = {
    "modes": _run_modes,
    "hamiltonian": _run_hamiltonian,
    "evolve": _run_evolve,
    "kernel": _run_kernel,
    "decay-sweep": _run_decay_sweep,
    "revival-sweep": _run_revival_sweep,
    "dd-scan": _run_dd_scan,
    "wgm-scan": _run_wgm_scan,
    "oracle": _run_oracle,
    "fig1b": lambda c, o: _run_evolve(c, o, name="fig1b"),
    "fig2": _run_fig2,
    "fig3": lambda c, o: _run_dd_scan(c, o, name="fig3"),
    "fig4": lambda c, o: _run_wgm_scan(c, o, name="fig4"),
}


def run(config: RunConfig) -> int:
    diags = validate(config)
    if diags:
        raise ConfigError("; ".join(diags))
    out = config.out
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    files, extra = _DISPATCH[config.experiment](config, out)
    meta = {
        "experiment": config.experiment,
        "config": dataclasses.asdict(config),
        "version": __version__,
        "files": [os.path.basename(p) for p in files],
        "elapsed_s": time.perf_counter() - t0,
    }
    meta.update(extra)
    _atomic_write(
        os.path.join(out, f"{config.experiment.replace('-', '_')}_meta.json"),
        json.dumps(meta, indent=2, default=list) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="openwg",
        description="Coupled-waveguide open-system dynamics runner")
    p.add_argument("experiment", nargs="?", choices=EXPERIMENTS,
                   help="experiment to run (alternative to --experiment)")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--experiment", dest="experiment_flag",
                   choices=EXPERIMENTS)
    p.add_argument("--out", help="output directory (default: .)")
    p.add_argument("--ws", type=float, help="system core width, um")
    p.add_argument("--we", type=float, help="environment core width, um")
    p.add_argument("--gap", type=float, help="edge-to-edge gap, um")
    p.add_argument("--lambda", dest="wavelength", type=float,
                   help="vacuum wavelength, um")
    p.add_argument("--zmax", type=float, help="propagation length, um")
    p.add_argument("--N", dest="n_kicks", type=_parse_int_list,
                   help="kick counts, comma separated")
    p.add_argument("--phi", type=_parse_grid,
                   help="kick phase(s): value, list, or a:b:n grid "
                        "(pi accepted, e.g. 0:2pi:64)")
    p.add_argument("--kappa-i", dest="kappa_i", type=float,
                   help="modulator intrinsic loss rate")
    p.add_argument("--kappa-e", dest="kappa_e", type=float,
                   help="modulator external coupling rate")
    p.add_argument("--delta", type=_parse_grid,
                   help="modulator detuning grid (a:b:n or list)")
    p.add_argument("--part", choices=("c", "d"),
                   help="figure panel selector (fig2)")
    p.add_argument("--validate-only", action="store_true",
                   help="print diagnostics and exit without running")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        "experiment": args.experiment_flag or args.experiment,
        "out": args.out, "ws": args.ws, "we": args.we, "gap": args.gap,
        "wavelength": args.wavelength, "zmax": args.zmax,
        "n_kicks": args.n_kicks, "phi": args.phi,
        "kappa_i": args.kappa_i, "kappa_e": args.kappa_e,
        "delta": args.delta, "part": args.part,
    }
    experiment = overrides["experiment"]
    try:
        config = load_config(args.config, overrides)
        if args.validate_only:
            for d in validate(config):
                print(d)
            return 0
        return run(config)
    except OpenwgError as exc:
        label = experiment or "config"
        print(f"error: {label}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
