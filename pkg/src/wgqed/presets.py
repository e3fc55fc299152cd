"""Curated scenario presets behind the ``figure`` CLI subcommand.

Each preset bundles the parameter sets for one of the standard survey
plots (preset ids ``fig2`` .. ``fig13`` follow the plot numbering of the
generated figure set): fluorescence spectra versus qubit number at
quarter- and eighth-wavelength spacing, time-delay/transmission/pole
scans, correlation traces at resonant and half-transmission drives, and
the mirrored-guide variants.  A preset is a tuple of jobs; every job
resolves to one output table.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .boundstate import DetectionChannel
from .errors import ConfigError
from .model import (
    DriveMode,
    DriveSpec,
    Geometry,
    SystemConfig,
    resolve_drive,
    transmission_crossings,
)

__all__ = [
    "JobKind",
    "PresetJob",
    "FigurePreset",
    "PRESETS",
    "get_preset",
    "preset_ids",
    "resolve_job_frequency",
]


class JobKind(enum.Enum):
    SPECTRUM = "spectrum"
    G2 = "g2"
    DELAY_SCAN = "delay"
    TRANSMISSION_SCAN = "transmission"
    POLE_TABLE = "poles"


@dataclass(frozen=True)
class PresetJob:
    """One output table of a figure preset.

    ``crossing`` selects among multiple drive frequencies hitting the
    same transmission target: 0 is the crossing closest to the emitter
    frequency, 1 the next one red-ward, and so on.  ``t_max`` applies to
    correlation traces, ``scan_span`` (units of gamma, both sides of
    omega0) to the frequency scans.
    """

    name: str
    kind: JobKind
    config: SystemConfig
    drive: DriveSpec | None = None
    crossing: int = 0
    channel: DetectionChannel | None = None
    t_max: float = 40.0
    scan_span: float = 6.0


@dataclass(frozen=True)
class FigurePreset:
    id: str
    title: str
    jobs: tuple[PresetJob, ...]


def _infinite(n: int, k0L: float) -> SystemConfig:
    return SystemConfig(
        geometry=Geometry.INFINITE, n_qubits=n, k0L=k0L if n > 1 else 0.0
    )


def _semi(n: int, k0a: float, k0L: float = math.pi / 2) -> SystemConfig:
    return SystemConfig(
        geometry=Geometry.SEMI_INFINITE,
        n_qubits=n,
        k0L=k0L if n > 1 else 0.0,
        k0a=k0a,
    )


_HALF_PI = math.pi / 2
_QUARTER_PI = math.pi / 4
_SPACING_TAGS = {
    "half_pi": _HALF_PI,
    "quarter_pi": _QUARTER_PI,
}

# Scan window for the red-detuned half-transmission ladder (units of
# gamma below omega0); matches the drive-resolution search span.
_LADDER_SPAN = 10.0


def resolve_job_frequency(job: PresetJob) -> float:
    """Photon frequency E/2 of a spectrum/correlation job."""
    if job.drive is None:
        raise ConfigError(f"job {job.name!r} is a scan and has no drive frequency")
    if job.drive.mode is DriveMode.TARGET_TRANSMISSION and job.crossing > 0:
        cfg = job.config
        found = transmission_crossings(
            cfg,
            job.drive.value,
            cfg.omega0 - _LADDER_SPAN * cfg.gamma,
            cfg.omega0,
        )
        found.sort(reverse=True)  # closest to omega0 first
        if job.crossing >= len(found):
            raise ConfigError(
                f"only {len(found)} red-detuned crossings with "
                f"|t|^2 = {job.drive.value:g}; cannot take index {job.crossing}"
            )
        return found[job.crossing]
    return resolve_drive(job.config, job.drive)


def _spectrum_ladder(k0L, qubit_numbers):
    jobs = []
    for n in qubit_numbers:
        cfg = _infinite(n, k0L)
        jobs.append(
            PresetJob(f"n{n:02d}_resonant", JobKind.SPECTRUM, cfg, DriveSpec.resonant())
        )
        jobs.append(
            PresetJob(
                f"n{n:02d}_half_transmission",
                JobKind.SPECTRUM,
                cfg,
                DriveSpec.target_transmission(0.5),
            )
        )
    return tuple(jobs)


def _build_presets() -> dict[str, FigurePreset]:
    presets: dict[str, FigurePreset] = {}

    presets["fig2"] = FigurePreset(
        "fig2",
        "fluorescence vs qubit number, quarter-wavelength spacing",
        _spectrum_ladder(_HALF_PI, (1, 2, 3, 5, 10)),
    )

    scan_jobs = []
    for tag, k0L in _SPACING_TAGS.items():
        cfg = _infinite(10, k0L)
        scan_jobs += [
            PresetJob(f"delay_{tag}", JobKind.DELAY_SCAN, cfg),
            PresetJob(f"transmission_{tag}", JobKind.TRANSMISSION_SCAN, cfg),
            PresetJob(f"poles_{tag}", JobKind.POLE_TABLE, cfg),
        ]
    presets["fig3"] = FigurePreset(
        "fig3",
        "time delay, transmission, and pole chart for a ten-emitter array",
        tuple(scan_jobs),
    )

    presets["fig4"] = FigurePreset(
        "fig4",
        "fluorescence vs qubit number, eighth-wavelength spacing",
        _spectrum_ladder(_QUARTER_PI, (2, 3, 5, 10)),
    )

    presets["fig5"] = FigurePreset(
        "fig5",
        "resonant reflection correlations vs qubit number",
        tuple(
            PresetJob(
                f"{tag}_n{n:02d}",
                JobKind.G2,
                _infinite(n, k0L),
                DriveSpec.resonant(),
                channel=DetectionChannel.REFLECTED,
            )
            for tag, k0L in _SPACING_TAGS.items()
            for n in (1, 2, 3, 5, 10)
        ),
    )

    def _g2_pair(k0L, qubit_numbers, t_max):
        return tuple(
            PresetJob(
                f"n{n:02d}_{channel.value}",
                JobKind.G2,
                _infinite(n, k0L),
                DriveSpec.target_transmission(0.5),
                channel=channel,
                t_max=t_max,
            )
            for n in qubit_numbers
            for channel in (DetectionChannel.TRANSMITTED, DetectionChannel.REFLECTED)
        )

    presets["fig6"] = FigurePreset(
        "fig6",
        "half-transmission correlations, quarter-wavelength spacing",
        _g2_pair(_HALF_PI, (5, 10), 100.0),
    )
    presets["fig7"] = FigurePreset(
        "fig7",
        "half-transmission correlations, eighth-wavelength spacing",
        _g2_pair(_QUARTER_PI, (5, 10), 100.0),
    )

    ten = _infinite(10, _HALF_PI)
    presets["fig8"] = FigurePreset(
        "fig8",
        "correlations at successive half-transmission drives, ten emitters",
        tuple(
            PresetJob(
                f"crossing{j}_{channel.value}",
                JobKind.G2,
                ten,
                DriveSpec.target_transmission(0.5),
                crossing=j,
                channel=channel,
                t_max=100.0,
            )
            for j in range(5)
            for channel in (DetectionChannel.TRANSMITTED, DetectionChannel.REFLECTED)
        ),
    )

    presets["fig9"] = FigurePreset(
        "fig9",
        "long-time transmitted correlations near the longest-lived mode",
        tuple(
            PresetJob(
                f"t{int(round(100 * target)):02d}",
                JobKind.G2,
                ten,
                DriveSpec.target_transmission(target),
                channel=DetectionChannel.TRANSMITTED,
                t_max=1000.0,
            )
            for target in (0.2, 0.5, 0.8)
        ),
    )

    presets["fig10"] = FigurePreset(
        "fig10",
        "mirrored-guide fluorescence, one and two emitters",
        (
            PresetJob(
                "n1_mirror_half_pi",
                JobKind.SPECTRUM,
                _semi(1, _HALF_PI),
                DriveSpec.resonant(),
            ),
            PresetJob(
                "n1_mirror_quarter_pi",
                JobKind.SPECTRUM,
                _semi(1, _QUARTER_PI),
                DriveSpec.resonant(),
            ),
            PresetJob(
                "n2_far_red",
                JobKind.SPECTRUM,
                _semi(2, _HALF_PI),
                DriveSpec.detuned(-3.5),
            ),
            PresetJob(
                "n2_near_red",
                JobKind.SPECTRUM,
                _semi(2, _HALF_PI),
                DriveSpec.detuned(-1.0),
            ),
            PresetJob(
                "n2_resonant",
                JobKind.SPECTRUM,
                _semi(2, _HALF_PI),
                DriveSpec.resonant(),
            ),
        ),
    )

    presets["fig11"] = FigurePreset(
        "fig11",
        "mirrored-guide fluorescence across the drive progression",
        tuple(
            PresetJob(
                f"drive_{str(100.0 + delta).replace('.', 'p')}",
                JobKind.SPECTRUM,
                _semi(2, _QUARTER_PI),
                DriveSpec.detuned(delta),
            )
            for delta in (-3.5, -1.0, 0.0, 1.0, 3.5)
        ),
    )

    ten_semi = _semi(10, _HALF_PI)
    presets["fig12"] = FigurePreset(
        "fig12",
        "ten emitters behind a mirror: spectrum and correlations",
        (
            PresetJob("spectrum", JobKind.SPECTRUM, ten_semi, DriveSpec.resonant()),
            PresetJob(
                "g2",
                JobKind.G2,
                ten_semi,
                DriveSpec.resonant(),
                channel=DetectionChannel.REFLECTED,
                t_max=60.0,
            ),
        ),
    )

    presets["fig13"] = FigurePreset(
        "fig13",
        "single emitter behind a mirror: correlation traces",
        tuple(
            PresetJob(
                f"mirror_{tag}_{label}",
                JobKind.G2,
                _semi(1, k0a),
                drive,
                channel=DetectionChannel.REFLECTED,
                t_max=12.0,
            )
            for tag, k0a in _SPACING_TAGS.items()
            for label, drive in (
                ("resonant", DriveSpec.resonant()),
                ("detuned_plus1", DriveSpec.detuned(1.0)),
            )
        ),
    )

    return presets


PRESETS: dict[str, FigurePreset] = _build_presets()


def preset_ids() -> list[str]:
    return list(PRESETS)


def get_preset(preset_id: str) -> FigurePreset:
    try:
        return PRESETS[preset_id]
    except KeyError:
        raise ConfigError(
            f"unknown preset {preset_id!r}; available: {', '.join(PRESETS)}"
        ) from None
