"""Command-line surface: scans, spectra, correlation traces, presets.

Every data-producing subcommand writes a CSV table (header row, 17
significant digits) plus a JSON sidecar carrying the fully resolved
parameters, a hash of them, the pole set, and the tolerances in force.
The sidecar is sufficient to regenerate the CSV byte-for-byte (see
:func:`replay_sidecar`), which is what makes the outputs citable.

Exit codes: 0 success, 2 configuration error, 3 numeric non-convergence.
"""

from __future__ import annotations

import concurrent.futures
import functools
import hashlib
import json
import math
import os
import sys
import time

import click
import numpy as np

from . import __version__, boundstate, langevin, presets, transport
from .boundstate import DetectionChannel
from .errors import ConfigError, NumericsError
from .model import (
    DriveMode,
    DriveSpec,
    Geometry,
    SystemConfig,
    parse_config_file,
    phase_from_string,
    resolve_drive,
)
from .numerics import get_recorder

__all__ = ["main", "compute_rows", "render_csv", "replay_sidecar"]


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    return f"{float(value):.17g}"


def _csv_bytes(header, rows) -> bytes:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return ("\n".join(lines) + "\n").encode("ascii")


def _config_payload(config: SystemConfig) -> dict:
    return {
        "geometry": config.geometry.value,
        "n_qubits": config.n_qubits,
        "omega0": config.omega0,
        "gamma": config.gamma,
        "k0L": config.k0L,
        "k0a": config.k0a,
        "markovian": config.markovian,
    }


def _config_from_payload(payload: dict) -> SystemConfig:
    return SystemConfig(
        geometry=Geometry(payload["geometry"]),
        n_qubits=int(payload["n_qubits"]),
        omega0=float(payload["omega0"]),
        gamma=float(payload["gamma"]),
        k0L=float(payload["k0L"]),
        k0a=float(payload["k0a"]),
        markovian=bool(payload["markovian"]),
    )


def _pole_payload(config: SystemConfig) -> list[list[float]]:
    return [[z.real, z.imag] for z in transport.poles(config).poles]


# ---------------------------------------------------------------------------
# compute kernels (shared by the subcommands and by sidecar replay)
# ---------------------------------------------------------------------------


def _compute_transport(params):
    cfg = _config_from_payload(params["config"])
    grid = np.linspace(params["k_min"], params["k_max"], params["points"])
    rows = []
    worst = 0.0
    for k in grid:
        sol = transport.solve_single_photon(cfg, float(k))
        t, r = sol.t, sol.r
        rows.append((k, sol.T, sol.R, t.real, t.imag, r.real, r.imag))
        if cfg.geometry is Geometry.INFINITE:
            worst = max(worst, abs(sol.T + sol.R - 1.0))
        else:
            worst = max(worst, abs(sol.R - 1.0))
    header = ["k_over_gamma", "T", "R", "re_t", "im_t", "re_r", "im_r"]
    results = {
        "poles": _pole_payload(cfg),
        "unitarity_max_abs_dev": worst,
        "tolerances": {"unitarity": 1e-12},
    }
    return header, rows, results


def _compute_poles(params):
    cfg = _config_from_payload(params["config"])
    pole_set = transport.poles(cfg)
    rows = [
        (i, z.real, -2.0 * z.imag)
        for i, z in enumerate(pole_set.poles, start=1)
    ]
    header = ["mode_index", "omega_tilde_over_gamma", "gamma_tilde_over_gamma"]
    mean = pole_set.mean()
    results = {
        "mean": [mean.real, mean.imag],
        "near_degenerate": pole_set.near_degenerate,
        "tolerances": {"mean_rule": 1e-10},
    }
    return header, rows, results


def _compute_delay(params):
    cfg = _config_from_payload(params["config"])
    grid = np.linspace(params["k_min"], params["k_max"], params["points"])
    rows = [(k, transport.time_delay(cfg, float(k))) for k in grid]
    header = ["k_over_gamma", "delay_times_gamma"]
    results = {
        "poles": _pole_payload(cfg),
        "resonant_delay_times_gamma": transport.time_delay(cfg, cfg.omega0),
    }
    return header, rows, results


def _compute_spectrum(params):
    cfg = _config_from_payload(params["config"])
    half = params["half_energy"]
    grid = np.linspace(params["omega_min"], params["omega_max"], params["points"])
    res = boundstate.incoherent_spectrum(cfg, 2.0 * half, grid)
    rows = list(
        zip(res.omega_grid, res.S_R, res.S_L, res.S_total, res.normalized)
    )
    header = ["omega_over_gamma", "S_R", "S_L", "S_total", "S_normalized"]
    results = {
        "half_energy": half,
        "flux": res.flux,
        "coherent_weight_R": res.coherent_weight_R,
        "coherent_weight_L": res.coherent_weight_L,
        "poles": _pole_payload(cfg),
        "tolerances": {"flux_quadrature_rel": 1e-8},
    }
    return header, rows, results


def _compute_g2(params):
    cfg = _config_from_payload(params["config"])
    half = params["half_energy"]
    grid = np.linspace(0.0, params["t_max"], params["points"])
    trace = boundstate.g2_trace(
        cfg, 2.0 * half, DetectionChannel(params["channel"]), grid
    )
    rows = list(zip(trace.t_grid, trace.values))
    header = ["t_times_gamma", "g2"]
    results = {
        "half_energy": half,
        "channel": params["channel"],
        "coherent_amplitude_sq_mod": abs(trace.denominator_amplitude),
        "poles": _pole_payload(cfg),
    }
    return header, rows, results


def _compute_langevin(params):
    cfg = _config_from_payload(params["config"])
    sys_ = langevin.build_system(cfg, params["amplitude"], params["drive_frequency"])
    grid = np.linspace(params["omega_min"], params["omega_max"], params["points"])
    res = langevin.regression_spectrum(sys_, grid)
    rows = list(zip(res.omega_grid, res.S_R, res.S_L))
    header = ["omega_over_gamma", "S_R", "S_L"]
    results = {
        "rabi": sys_.rabi,
        "conservation_residual": res.conservation_residual,
        "coherent_weight_R": res.coherent_weight_R,
        "coherent_weight_L": res.coherent_weight_L,
        "incoherent_integral_R": res.incoherent_integral_R,
        "incoherent_integral_L": res.incoherent_integral_L,
        "skipped_grid_indices": list(res.flagged),
        "tolerances": {"power_conservation_rel": 1e-6},
    }
    return header, rows, results


_COMPUTERS = {
    "transport": _compute_transport,
    "poles": _compute_poles,
    "delay": _compute_delay,
    "spectrum": _compute_spectrum,
    "g2": _compute_g2,
    "langevin": _compute_langevin,
}


def compute_rows(command: str, params: dict):
    """Dispatch to the compute kernel: returns (header, rows, results)."""
    try:
        kernel = _COMPUTERS[command]
    except KeyError:
        raise ConfigError(f"unknown command {command!r} in sidecar") from None
    return kernel(params)


def render_csv(command: str, params: dict) -> bytes:
    header, rows, _ = compute_rows(command, params)
    return _csv_bytes(header, rows)


def replay_sidecar(path) -> bytes:
    """Recompute the CSV described by a JSON sidecar, byte-for-byte."""
    with open(path, "r") as handle:
        doc = json.load(handle)
    return render_csv(doc["command"], doc["params"])


def _write_outputs(outdir, stem, command, params, header, rows, results):
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, stem + ".csv")
    json_path = os.path.join(outdir, stem + ".json")
    blob = _csv_bytes(header, rows)
    with open(csv_path, "wb") as handle:
        handle.write(blob)
    canonical = json.dumps(params, sort_keys=True, separators=(",", ":"))
    sidecar = {
        "command": command,
        "params": params,
        "params_sha256": hashlib.sha256(canonical.encode("ascii")).hexdigest(),
        "results": results,
        "csv": {
            "file": os.path.basename(csv_path),
            "sha256": hashlib.sha256(blob).hexdigest(),
            "rows": len(rows),
        },
        "generator": f"wgqed {__version__}",
    }
    with open(json_path, "w") as handle:
        json.dump(sidecar, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return csv_path, json_path


# ---------------------------------------------------------------------------
# option plumbing
# ---------------------------------------------------------------------------


def _config_options(fn):
    for option in reversed(
        [
            click.option(
                "--config",
                "config_path",
                type=click.Path(),
                default=None,
                help="read geometry/drive from a 'key = value' file",
            ),
            click.option(
                "--geometry",
                type=click.Choice(["infinite", "semi-infinite"]),
                default="infinite",
                show_default=True,
            ),
            click.option("--n", "n_qubits", type=int, default=1, show_default=True),
            click.option(
                "--k0L",
                "k0l",
                default="0",
                help="emitter spacing phase, radians or e.g. '0.5pi'",
            ),
            click.option(
                "--k0a",
                default="0",
                help="mirror distance phase, radians or e.g. '0.25pi'",
            ),
            click.option(
                "--omega0",
                type=float,
                default=100.0,
                show_default=True,
                help="emitter frequency in units of gamma",
            ),
        ]
    ):
        fn = option(fn)
    return fn


def _drive_options(fn):
    for option in reversed(
        [
            click.option(
                "--detuning",
                type=float,
                default=None,
                help="drive detuning from omega0 in units of gamma",
            ),
            click.option(
                "--target-transmission",
                "target_transmission",
                type=float,
                default=None,
                help="pick the drive frequency where |t|^2 equals this",
            ),
        ]
    ):
        fn = option(fn)
    return fn


def _output_option(fn):
    return click.option(
        "--output-dir",
        envvar="WGQED_OUTPUT_DIR",
        default=".",
        show_default=True,
        help="directory for CSV/JSON outputs (env: WGQED_OUTPUT_DIR)",
    )(fn)


def _build_config(config_path, geometry, n_qubits, k0l, k0a, omega0):
    """Resolve the common options to (SystemConfig, DriveSpec-from-file)."""
    if config_path is not None:
        return parse_config_file(config_path)
    config = SystemConfig(
        geometry=Geometry.INFINITE if geometry == "infinite" else Geometry.SEMI_INFINITE,
        n_qubits=n_qubits,
        omega0=omega0,
        k0L=phase_from_string(k0l),
        k0a=phase_from_string(k0a),
    )
    return config, None


def _build_drive(file_drive, detuning, target_transmission) -> DriveSpec:
    given = [
        flag
        for flag, value in (
            ("--detuning", detuning),
            ("--target-transmission", target_transmission),
        )
        if value is not None
    ]
    if len(given) > 1:
        raise click.UsageError("give at most one of --detuning/--target-transmission")
    if detuning is not None:
        return DriveSpec.detuned(detuning)
    if target_transmission is not None:
        return DriveSpec.target_transmission(target_transmission)
    return file_drive if file_drive is not None else DriveSpec.resonant()


def _physics_errors(fn):
    """Map the library's error taxonomy onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except NumericsError as exc:
            click.echo(f"numerics error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _report(csv_path, json_path):
    click.echo(f"wrote {csv_path}")
    click.echo(f"wrote {json_path}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


@click.group()
@click.version_option(version=__version__, prog_name="wgqed")
def main():
    """Photon transport and fluorescence for arrays of waveguide-coupled
    emitters: single-photon scans, two-photon spectra and correlations,
    driven steady states, figure presets, and a numerical cross-check
    suite."""


@main.command("transport")
@_config_options
@click.option("--span", type=float, default=6.0, show_default=True,
              help="scan half-width around omega0 in units of gamma")
@click.option("--points", type=int, default=1201, show_default=True)
@_output_option
@_physics_errors
def transport_cmd(config_path, geometry, n_qubits, k0l, k0a, omega0, span, points, output_dir):
    """Single-photon transmission/reflection over a frequency scan."""
    cfg, _ = _build_config(config_path, geometry, n_qubits, k0l, k0a, omega0)
    params = {
        "config": _config_payload(cfg),
        "k_min": cfg.omega0 - span * cfg.gamma,
        "k_max": cfg.omega0 + span * cfg.gamma,
        "points": points,
    }
    header, rows, results = compute_rows("transport", params)
    _report(*_write_outputs(output_dir, "transport", "transport", params, header, rows, results))


@main.command("poles")
@_config_options
@_output_option
@_physics_errors
def poles_cmd(config_path, geometry, n_qubits, k0l, k0a, omega0, output_dir):
    """Collective-mode table: effective frequencies and decay rates."""
    cfg, _ = _build_config(config_path, geometry, n_qubits, k0l, k0a, omega0)
    params = {"config": _config_payload(cfg)}
    header, rows, results = compute_rows("poles", params)
    paths = _write_outputs(output_dir, "poles", "poles", params, header, rows, results)
    mean = results["mean"]
    click.echo(f"{len(rows)} modes; mean = ({_fmt(mean[0])}, {_fmt(mean[1])})")
    _report(*paths)


@main.command("delay")
@_config_options
@click.option("--span", type=float, default=6.0, show_default=True)
@click.option("--points", type=int, default=1201, show_default=True)
@_output_option
@_physics_errors
def delay_cmd(config_path, geometry, n_qubits, k0l, k0a, omega0, span, points, output_dir):
    """Group-delay scan of the transmission phase."""
    cfg, _ = _build_config(config_path, geometry, n_qubits, k0l, k0a, omega0)
    params = {
        "config": _config_payload(cfg),
        "k_min": cfg.omega0 - span * cfg.gamma,
        "k_max": cfg.omega0 + span * cfg.gamma,
        "points": points,
    }
    header, rows, results = compute_rows("delay", params)
    _report(*_write_outputs(output_dir, "delay", "delay", params, header, rows, results))


def _preset_jobs_of_kind(preset_id, kinds):
    preset = presets.get_preset(preset_id)
    jobs = [job for job in preset.jobs if job.kind in kinds]
    if not jobs:
        names = ", ".join(sorted(k.value for k in kinds))
        raise ConfigError(f"preset {preset.id!r} has no {names} jobs")
    return preset, jobs


def _g2_points(t_max: float) -> int:
    return int(min(8000.0, max(2000.0, 5.0 * t_max)))


def _job_params(job: presets.PresetJob, t_max=None):
    """Fully resolve a preset job to (command, params)."""
    cfg = job.config
    if job.kind is presets.JobKind.SPECTRUM:
        half = presets.resolve_job_frequency(job)
        return "spectrum", {
            "config": _config_payload(cfg),
            "half_energy": half,
            "omega_min": half - 6.0 * cfg.gamma,
            "omega_max": half + 6.0 * cfg.gamma,
            "points": 2001,
        }
    if job.kind is presets.JobKind.G2:
        half = presets.resolve_job_frequency(job)
        horizon = job.t_max if t_max is None else t_max
        return "g2", {
            "config": _config_payload(cfg),
            "half_energy": half,
            "channel": job.channel.value,
            "t_max": horizon,
            "points": _g2_points(horizon),
        }
    if job.kind is presets.JobKind.DELAY_SCAN:
        return "delay", {
            "config": _config_payload(cfg),
            "k_min": cfg.omega0 - job.scan_span * cfg.gamma,
            "k_max": cfg.omega0 + job.scan_span * cfg.gamma,
            "points": 1201,
        }
    if job.kind is presets.JobKind.TRANSMISSION_SCAN:
        return "transport", {
            "config": _config_payload(cfg),
            "k_min": cfg.omega0 - job.scan_span * cfg.gamma,
            "k_max": cfg.omega0 + job.scan_span * cfg.gamma,
            "points": 1201,
        }
    return "poles", {"config": _config_payload(cfg)}


def _run_jobs(preset, jobs, output_dir, t_max=None):
    """Compute preset jobs on a worker pool; one writer per output file."""
    outdir = os.path.join(output_dir, preset.id)

    def run(job):
        command, params = _job_params(job, t_max=t_max)
        header, rows, results = compute_rows(command, params)
        return job.name, command, params, header, rows, results

    workers = min(4, os.cpu_count() or 1, len(jobs))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(run, jobs))
    for name, command, params, header, rows, results in outcomes:
        _report(*_write_outputs(outdir, name, command, params, header, rows, results))


@main.command("spectrum")
@_config_options
@_drive_options
@click.option("--preset", "preset_id", default=None,
              help="run the spectrum jobs of a figure preset instead")
@click.option("--span", type=float, default=6.0, show_default=True,
              help="detection half-width around E/2 in units of gamma")
@click.option("--points", type=int, default=2001, show_default=True)
@_output_option
@_physics_errors
def spectrum_cmd(config_path, geometry, n_qubits, k0l, k0a, omega0,
                 detuning, target_transmission, preset_id, span, points, output_dir):
    """Incoherent fluorescence spectrum of a two-photon drive."""
    if preset_id is not None:
        preset, jobs = _preset_jobs_of_kind(preset_id, {presets.JobKind.SPECTRUM})
        _run_jobs(preset, jobs, output_dir)
        return
    cfg, file_drive = _build_config(config_path, geometry, n_qubits, k0l, k0a, omega0)
    half = resolve_drive(cfg, _build_drive(file_drive, detuning, target_transmission))
    params = {
        "config": _config_payload(cfg),
        "half_energy": half,
        "omega_min": half - span * cfg.gamma,
        "omega_max": half + span * cfg.gamma,
        "points": points,
    }
    header, rows, results = compute_rows("spectrum", params)
    _report(*_write_outputs(output_dir, "spectrum", "spectrum", params, header, rows, results))


@main.command("g2")
@_config_options
@_drive_options
@click.option("--preset", "preset_id", default=None,
              help="run the correlation jobs of a figure preset instead")
@click.option("--channel", type=click.Choice(["transmitted", "reflected"]),
              default="reflected", show_default=True)
@click.option("--tmax", type=float, default=None,
              help="largest delay in units of 1/gamma [default 40; overrides presets too]")
@click.option("--points", type=int, default=None,
              help="number of delay samples [default scales with --tmax]")
@_output_option
@_physics_errors
def g2_cmd(config_path, geometry, n_qubits, k0l, k0a, omega0,
           detuning, target_transmission, preset_id, channel, tmax, points, output_dir):
    """Second-order correlation of the transmitted or reflected photons."""
    if preset_id is not None:
        preset, jobs = _preset_jobs_of_kind(preset_id, {presets.JobKind.G2})
        _run_jobs(preset, jobs, output_dir, t_max=tmax)
        return
    cfg, file_drive = _build_config(config_path, geometry, n_qubits, k0l, k0a, omega0)
    half = resolve_drive(cfg, _build_drive(file_drive, detuning, target_transmission))
    horizon = 40.0 if tmax is None else tmax
    params = {
        "config": _config_payload(cfg),
        "half_energy": half,
        "channel": channel,
        "t_max": horizon,
        "points": _g2_points(horizon) if points is None else points,
    }
    header, rows, results = compute_rows("g2", params)
    _report(*_write_outputs(output_dir, "g2", "g2", params, header, rows, results))


@main.command("langevin")
@_config_options
@click.option("--amplitude", type=float, default=0.1, show_default=True,
              help="coherent drive amplitude A (photon flux A^2, units of gamma)")
@click.option("--detuning", type=float, default=0.0, show_default=True,
              help="drive detuning from omega0 in units of gamma")
@click.option("--span", type=float, default=None,
              help="probe half-width around the drive [default 6*gamma + 3*rabi]")
@click.option("--points", type=int, default=1201, show_default=True)
@_output_option
@_physics_errors
def langevin_cmd(config_path, geometry, n_qubits, k0l, k0a, omega0,
                 amplitude, detuning, span, points, output_dir):
    """Steady-state fluorescence of a coherently driven array."""
    cfg, _ = _build_config(config_path, geometry, n_qubits, k0l, k0a, omega0)
    drive_frequency = cfg.omega0 + detuning * cfg.gamma
    sys_ = langevin.build_system(cfg, amplitude, drive_frequency)
    if span is None:
        grid = langevin.default_probe_grid(sys_, points)
        omega_min, omega_max = float(grid[0]), float(grid[-1])
    else:
        omega_min = drive_frequency - span * cfg.gamma
        omega_max = drive_frequency + span * cfg.gamma
    params = {
        "config": _config_payload(cfg),
        "amplitude": amplitude,
        "drive_frequency": drive_frequency,
        "omega_min": omega_min,
        "omega_max": omega_max,
        "points": points,
    }
    header, rows, results = compute_rows("langevin", params)
    paths = _write_outputs(output_dir, "langevin", "langevin", params, header, rows, results)
    click.echo(f"power conservation residual: {results['conservation_residual']:.3e}")
    _report(*paths)


@main.command("figure")
@click.argument("preset_id", required=False)
@click.option("--list", "list_presets", is_flag=True, help="list available presets")
@click.option("--tmax", type=float, default=None,
              help="override the delay horizon of the preset's correlation jobs")
@_output_option
@_physics_errors
def figure_cmd(preset_id, list_presets, tmax, output_dir):
    """Run every job of a figure preset (see --list for the catalog)."""
    if list_presets:
        for pid in presets.preset_ids():
            preset = presets.get_preset(pid)
            click.echo(f"{pid:6s} {len(preset.jobs):2d} jobs  {preset.title}")
        return
    if preset_id is None:
        raise click.UsageError("give a preset id or --list")
    preset = presets.get_preset(preset_id)
    _run_jobs(preset, list(preset.jobs), output_dir, t_max=tmax)


# ---------------------------------------------------------------------------
# crosscheck suite
# ---------------------------------------------------------------------------


def _closed_form_spectrum(omega, E, omega0=100.0, gamma=1.0):
    # exact single-emitter fluorescence: product of three Lorentzians
    def lorentz(x):
        return x**2 + gamma**2 / 4.0

    return gamma**4 / (
        4.0
        * math.pi**2
        * lorentz(E - omega0 - omega)
        * lorentz(E / 2.0 - omega0)
        * lorentz(omega - omega0)
    )


def _suite_single_emitter_spectrum():
    cfg = SystemConfig(geometry=Geometry.INFINITE, n_qubits=1)
    worst = 0.0
    for half in (100.0, 99.5):
        grid = np.linspace(95.0, 105.0, 401)
        res = boundstate.incoherent_spectrum(cfg, 2.0 * half, grid)
        exact = np.array([_closed_form_spectrum(w, 2.0 * half) for w in grid])
        for side in (res.S_R, res.S_L):  # each side equals the closed form
            worst = max(worst, float(np.max(np.abs(side - exact) / exact)))
    return worst, 1e-6


def _suite_unitarity():
    worst = 0.0
    grid = np.linspace(94.0, 106.0, 301)
    for k0L in (math.pi / 4, math.pi / 2):
        for n in (1, 2, 3, 5, 10):
            cfg = SystemConfig(
                geometry=Geometry.INFINITE, n_qubits=n, k0L=k0L if n > 1 else 0.0
            )
            for k in grid:
                sol = transport.solve_single_photon(cfg, float(k))
                worst = max(worst, abs(sol.T + sol.R - 1.0))
    return worst, 1e-12


def _suite_pole_mean():
    worst = 0.0
    for k0L in (math.pi / 4, math.pi / 2):
        for n in (1, 2, 3, 5, 10):
            cfg = SystemConfig(
                geometry=Geometry.INFINITE, n_qubits=n, k0L=k0L if n > 1 else 0.0
            )
            mean = transport.poles(cfg).mean()
            worst = max(worst, abs(mean - (cfg.omega0 - 0.5j * cfg.gamma)))
    return worst, 1e-10


def _suite_resonant_delay():
    worst = 0.0
    for k0L in (math.pi / 4, math.pi / 2):
        for n in (1, 2, 5, 10):
            cfg = SystemConfig(
                geometry=Geometry.INFINITE, n_qubits=n, k0L=k0L if n > 1 else 0.0
            )
            worst = max(worst, abs(transport.time_delay(cfg, cfg.omega0) - 2.0))
    return worst, 1e-4


def _suite_flux_spot_checks():
    recorder = get_recorder()
    was_enabled, recorder.enabled = recorder.enabled, True
    recorder.reset()
    try:
        jobs = [
            (SystemConfig(geometry=Geometry.INFINITE, n_qubits=1), 199.0),
            (
                SystemConfig(
                    geometry=Geometry.INFINITE, n_qubits=2, k0L=math.pi / 2
                ),
                199.6,
            ),
            (
                SystemConfig(
                    geometry=Geometry.SEMI_INFINITE, n_qubits=1, k0a=math.pi / 4
                ),
                200.4,
            ),
        ]
        for cfg, E in jobs:
            boundstate.incoherent_spectrum(cfg, E)
        summary = recorder.summary()
        if summary["checks"] < len(jobs):
            raise NumericsError(
                f"expected {len(jobs)} flux spot-checks, saw {summary['checks']}"
            )
        return summary["worst_relative_difference"], 1e-6
    finally:
        recorder.enabled = was_enabled
        recorder.reset()


def _suite_power_conservation():
    worst = 0.0
    for cfg, A in (
        (SystemConfig(geometry=Geometry.INFINITE, n_qubits=1), 0.3),
        (
            SystemConfig(geometry=Geometry.INFINITE, n_qubits=2, k0L=math.pi / 2),
            0.4,
        ),
        (
            SystemConfig(
                geometry=Geometry.SEMI_INFINITE, n_qubits=1, k0a=math.pi / 4
            ),
            0.3,
        ),
    ):
        sys_ = langevin.build_system(cfg, A, cfg.omega0 + 0.2)
        res = langevin.regression_spectrum(sys_, np.array([cfg.omega0]))
        worst = max(worst, abs(res.conservation_residual) / A**2)
    return worst, 1e-9


def _suite_weak_drive_reduction():
    worst = 0.0
    amplitude = 1e-2  # flux A^2 = 1e-4
    for cfg in (
        SystemConfig(geometry=Geometry.INFINITE, n_qubits=1),
        SystemConfig(geometry=Geometry.INFINITE, n_qubits=2, k0L=math.pi / 2),
    ):
        half = cfg.omega0 + 0.5
        grid = np.linspace(half - 4.0, half + 4.0, 161)
        pair = boundstate.incoherent_spectrum(cfg, 2.0 * half, grid)
        sys_ = langevin.build_system(cfg, amplitude, half)
        res = langevin.regression_spectrum(sys_, grid)
        scale = langevin.PLANE_WAVE_FLUX_FACTOR * amplitude**4
        err_r = np.max(np.abs(res.S_R / scale - pair.S_R))
        err_l = np.max(np.abs(res.S_L / scale - pair.S_L))
        worst = max(worst, float(max(err_r, err_l) / np.max(pair.S_total)))
    return worst, 2e-3


def _suite_pair_probability_sum():
    cfg = SystemConfig(geometry=Geometry.INFINITE, n_qubits=1)
    worst = 0.0
    for half in (100.0, 99.2, 101.7):
        for power in (0.0, 0.04, 0.25):
            t2, r2 = boundstate.photon_probabilities_n1(cfg, 2.0 * half, power)
            worst = max(worst, abs(t2 + r2 - 1.0))
    return worst, 1e-10


_CROSSCHECK_SUITES = [
    ("single-emitter spectrum vs closed form", _suite_single_emitter_spectrum),
    ("one-photon unitarity", _suite_unitarity),
    ("collective-mode average rule", _suite_pole_mean),
    ("resonant group delay = 2/gamma", _suite_resonant_delay),
    ("residue flux vs adaptive quadrature", _suite_flux_spot_checks),
    ("driven-array power conservation", _suite_power_conservation),
    ("weak coherent drive vs photon-pair theory", _suite_weak_drive_reduction),
    ("pair transmission + reflection = 1", _suite_pair_probability_sum),
]


@main.command("crosscheck")
@click.option("--json", "json_path", type=click.Path(), default=None,
              help="also write the table to this JSON file")
@_physics_errors
def crosscheck_cmd(json_path):
    """Run the independent-route validation suites and print a table."""
    width = max(len(name) for name, _ in _CROSSCHECK_SUITES)
    failures = 0
    report = []
    for name, suite in _CROSSCHECK_SUITES:
        start = time.perf_counter()
        try:
            worst, tol = suite()
            ok = worst <= tol
        except NumericsError as exc:
            worst, tol, ok = float("nan"), float("nan"), False
            click.echo(f"{name:<{width}}  error: {exc}", err=True)
        elapsed = time.perf_counter() - start
        status = "PASS" if ok else "FAIL"
        failures += not ok
        click.echo(
            f"{name:<{width}}  {worst:10.3e}  (tol {tol:8.1e})  {status}  [{elapsed:5.1f}s]"
        )
        report.append(
            {"check": name, "worst": worst, "tolerance": tol, "passed": bool(ok)}
        )
    if json_path is not None:
        with open(json_path, "w") as handle:
            json.dump({"failed": failures, "checks": report}, handle, indent=2)
            handle.write("\n")
    if failures:
        click.echo(f"{failures} check(s) failed", err=True)
        sys.exit(3)
    click.echo("all checks passed")


if __name__ == "__main__":
    main()
