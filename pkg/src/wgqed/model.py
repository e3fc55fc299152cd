"""Physical configuration and unit conventions.

Internal units: the single-qubit decay rate into the guide is the
frequency unit (``gamma``, default 1), the propagation velocity is 1, so
lengths are inverse frequencies.  The qubit frequency ``omega0`` doubles
as the carrier momentum ``k0`` used to freeze propagation phases.

Geometry conventions:

* infinite guide -- ``n_qubits`` emitters with uniform spacing ``L``,
  placed symmetrically about ``x = 0``;
* semi-infinite guide -- a hard wall at ``x = 0`` (field node), emitters
  at negative positions, the last one a distance ``a`` from the wall.

Dimensionless inputs ``k0L`` and ``k0a`` are the corresponding
propagation phases at the carrier.
"""

from __future__ import annotations

import enum
import math
import re
import warnings
from dataclasses import dataclass

from .errors import ConfigError

__all__ = [
    "Geometry",
    "SystemConfig",
    "DriveMode",
    "DriveSpec",
    "qubit_positions",
    "resolve_drive",
    "transmission_crossings",
    "phase_from_string",
    "parse_config_text",
    "parse_config_file",
]


class Geometry(enum.Enum):
    INFINITE = "infinite"
    SEMI_INFINITE = "semi_infinite"


@dataclass(frozen=True)
class SystemConfig:
    """Immutable description of the emitter array and guide.

    Attributes:
        geometry: infinite or semi-infinite (mirror-terminated) guide.
        n_qubits: number of identical two-level emitters, >= 1.
        omega0: emitter frequency in units of ``gamma`` (default 100).
        gamma: decay rate of a single emitter into the guide; the unit
            of frequency (default 1).
        k0L: carrier phase accumulated between neighbouring emitters.
        k0a: carrier phase between the last emitter and the mirror
            (semi-infinite only; ignored otherwise).
        markovian: freeze propagation phases at the carrier momentum.
    """

    geometry: Geometry
    n_qubits: int
    omega0: float = 100.0
    gamma: float = 1.0
    k0L: float = 0.0
    k0a: float = 0.0
    markovian: bool = True

    def __post_init__(self):
        if not isinstance(self.geometry, Geometry):
            raise ConfigError(f"geometry must be a Geometry, got {self.geometry!r}")
        if self.n_qubits < 1:
            raise ConfigError("n_qubits must be >= 1")
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.omega0 < 10 * self.gamma:
            raise ConfigError(
                "omega0 must be at least 10*gamma (rotating-wave regime); "
                f"got omega0/gamma = {self.omega0 / self.gamma:g}"
            )
        if self.k0L < 0:
            raise ConfigError("k0L must be non-negative")
        if self.geometry is Geometry.SEMI_INFINITE and self.k0a <= 0:
            raise ConfigError("semi-infinite geometry requires k0a > 0")
        if self.n_qubits == 1 and self.k0L != 0.0:
            warnings.warn(
                "k0L is unused for a single emitter", UserWarning, stacklevel=3
            )
        if self.n_qubits > 1 and self.k0L == 0.0:
            raise ConfigError("k0L must be positive when n_qubits > 1")

    # -- derived quantities ------------------------------------------------
    @property
    def coupling(self) -> float:
        """Point coupling V with gamma = 2 V**2."""
        return math.sqrt(self.gamma / 2.0)

    @property
    def k0(self) -> float:
        """Carrier momentum (velocity = 1)."""
        return self.omega0

    @property
    def spacing(self) -> float:
        """Emitter spacing L in length units."""
        return self.k0L / self.k0 if self.n_qubits > 1 else 0.0

    @property
    def mirror_distance(self) -> float:
        """Distance a from the last emitter to the mirror."""
        return self.k0a / self.k0


def qubit_positions(config: SystemConfig) -> list[float]:
    """Emitter coordinates, strictly increasing.

    Infinite guide: symmetric about the origin.  Semi-infinite guide:
    the wall sits at ``x = 0`` and the emitters extend to the left, the
    nearest one at ``-a``.
    """
    n = config.n_qubits
    spacing = config.spacing
    if config.geometry is Geometry.INFINITE:
        return [(i - (n + 1) / 2.0) * spacing for i in range(1, n + 1)]
    a = config.mirror_distance
    return [-a - (n - i) * spacing for i in range(1, n + 1)]


class DriveMode(enum.Enum):
    RESONANT = "resonant"
    DETUNED = "detuned"
    TARGET_TRANSMISSION = "target_transmission"


@dataclass(frozen=True)
class DriveSpec:
    """How to pick the (identical) frequency of the two incident photons.

    ``value`` means: detuning from the emitter frequency in units of
    ``gamma`` for :attr:`DriveMode.DETUNED`; the wanted single-photon
    transmission probability for :attr:`DriveMode.TARGET_TRANSMISSION`.
    """

    mode: DriveMode
    value: float = 0.0

    def __post_init__(self):
        if self.mode is DriveMode.TARGET_TRANSMISSION and not 0.0 <= self.value <= 1.0:
            raise ConfigError("target transmission must lie in [0, 1]")

    @classmethod
    def resonant(cls) -> "DriveSpec":
        return cls(DriveMode.RESONANT)

    @classmethod
    def detuned(cls, delta: float) -> "DriveSpec":
        return cls(DriveMode.DETUNED, delta)

    @classmethod
    def target_transmission(cls, t: float) -> "DriveSpec":
        return cls(DriveMode.TARGET_TRANSMISSION, t)


# Scan window (units of gamma, red and blue of omega0) and resolutions for
# the target-transmission search.  The coarse grid alone can step across
# sub-linewidth transmission features near long-lived collective modes, so
# every mode gets a dedicated fine grid of width a few of its own
# linewidths before brackets are refined by bisection.
_SCAN_SPAN = 10.0
_SCAN_STEP = 1.0 / 200.0
_LOCAL_HALF_WIDTHS = 5.0
_LOCAL_POINTS = 200


def resolve_drive(config: SystemConfig, spec: DriveSpec) -> float:
    """Resolve a drive specification to the photon frequency E/2.

    Resonant -> ``omega0``; detuned -> ``omega0 + delta*gamma``; target
    transmission -> the frequency closest to ``omega0`` at which the
    single-photon transmission probability equals the requested value
    (red-detuned side searched first), bisected to ``1e-8 * gamma``.

    Raises:
        ConfigError: target transmission requested for a semi-infinite
            guide (reflection probability is identically one there), or
            no matching frequency found within the scan window.
    """
    if spec.mode is DriveMode.RESONANT:
        return config.omega0
    if spec.mode is DriveMode.DETUNED:
        return config.omega0 + spec.value * config.gamma
    if config.geometry is not Geometry.INFINITE:
        raise ConfigError(
            "target transmission is undefined for a semi-infinite guide: "
            "every photon is reflected (|r| = 1), so |t|^2 has no solutions"
        )
    if spec.value == 0.0:
        # Transmission vanishes exactly on resonance for every array size.
        return config.omega0
    return _closest_transmission_crossing(config, spec.value)


def transmission_crossings(
    config: SystemConfig, target: float, lo: float, hi: float
) -> list[float]:
    """All frequencies in ``[lo, hi]`` where ``|t|^2`` equals ``target``.

    Sign changes are located on a coarse grid enriched around every
    collective mode (narrow transmission features have width ~ the mode
    linewidth, not ~ gamma) and refined by bisection to ``1e-8 * gamma``.
    Sorted ascending.
    """
    from scipy.optimize import brentq

    from . import transport  # deferred: transport imports model
    from .errors import SingularMatchingError

    gamma = config.gamma

    def excess(k: float) -> float:
        try:
            return transport.solve_single_photon(config, k).T - target
        except SingularMatchingError:
            return math.nan  # dark mode exactly on the axis; skip the node

    grid = [lo + i * _SCAN_STEP * gamma for i in range(int((hi - lo) / (_SCAN_STEP * gamma)) + 1)]
    for z in transport.poles(config).poles:
        width = max(-2.0 * z.imag, 1e-6 * gamma)
        lo_m = max(lo, z.real - _LOCAL_HALF_WIDTHS * width)
        hi_m = min(hi, z.real + _LOCAL_HALF_WIDTHS * width)
        if lo_m < hi_m:
            step = (hi_m - lo_m) / _LOCAL_POINTS
            grid.extend(lo_m + j * step for j in range(_LOCAL_POINTS + 1))
    grid = sorted(set(grid))
    values = [excess(k) for k in grid]
    found = []
    for (k1, g1), (k2, g2) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if g1 == 0.0:
            found.append(k1)
        elif g1 * g2 < 0.0:
            found.append(brentq(excess, k1, k2, xtol=1e-8 * gamma))
    if values and values[-1] == 0.0:
        found.append(grid[-1])
    return found


def _closest_transmission_crossing(config: SystemConfig, target: float) -> float:
    gamma = config.gamma
    omega0 = config.omega0
    red = transmission_crossings(config, target, omega0 - _SCAN_SPAN * gamma, omega0)
    if red:
        return max(red)  # closest to omega0 from below
    blue = transmission_crossings(config, target, omega0, omega0 + _SCAN_SPAN * gamma)
    if blue:
        return min(blue)
    raise ConfigError(
        f"no frequency with |t|^2 = {target:g} within {_SCAN_SPAN:g}*gamma of omega0"
    )


# ---------------------------------------------------------------------------
# parsing helpers shared by the CLI and the config-file reader
# ---------------------------------------------------------------------------

_PHASE_RE = re.compile(r"^\s*([-+0-9.eE]*)\s*(pi)?\s*$", re.IGNORECASE)


def phase_from_string(text: str) -> float:
    """Parse a phase given either in radians or in multiples of pi.

    Accepts e.g. ``"0.5pi"``, ``"pi"``, ``"2pi"``, ``"1.5707963"``.
    """
    match = _PHASE_RE.match(text)
    if not match:
        raise ConfigError(f"cannot parse phase {text!r}")
    number, suffix = match.groups()
    if suffix and number in ("", "+", "-"):
        number += "1"
    try:
        value = float(number)
    except ValueError:
        raise ConfigError(f"cannot parse phase {text!r}") from None
    return value * (math.pi if suffix else 1.0)


_BOOLEANS = {
    "true": True,
    "yes": True,
    "1": True,
    "false": False,
    "no": False,
    "0": False,
}

_GEOMETRIES = {
    "infinite": Geometry.INFINITE,
    "semi_infinite": Geometry.SEMI_INFINITE,
    "semi-infinite": Geometry.SEMI_INFINITE,
}

_DRIVE_MODES = {
    "resonant": DriveMode.RESONANT,
    "detuned": DriveMode.DETUNED,
    "target_transmission": DriveMode.TARGET_TRANSMISSION,
    "target-transmission": DriveMode.TARGET_TRANSMISSION,
}

_KNOWN_KEYS = {
    "geometry",
    "n_qubits",
    "omega0_over_gamma",
    "k0L_over_pi",
    "k0a_over_pi",
    "markovian",
    "drive.mode",
    "drive.value",
}


def parse_config_text(text: str) -> tuple[SystemConfig, DriveSpec | None]:
    """Parse the flat ``key = value`` configuration format.

    Lines are ``key = value`` pairs; ``#`` starts a comment.  Keys:
    ``geometry``, ``n_qubits``, ``omega0_over_gamma``, ``k0L_over_pi``,
    ``k0a_over_pi``, ``markovian``, ``drive.mode``, ``drive.value``.

    Returns the system configuration and, when a drive is present, the
    drive specification (otherwise ``None``).
    """
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value

    def lookup(key: str, default: str | None = None) -> str:
        if key in entries:
            return entries[key]
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default

    geometry_text = lookup("geometry").lower()
    if geometry_text not in _GEOMETRIES:
        raise ConfigError(f"unknown geometry {geometry_text!r}")
    markovian_text = lookup("markovian", "true").lower()
    if markovian_text not in _BOOLEANS:
        raise ConfigError(f"markovian must be boolean, got {markovian_text!r}")
    try:
        config = SystemConfig(
            geometry=_GEOMETRIES[geometry_text],
            n_qubits=int(lookup("n_qubits")),
            omega0=float(lookup("omega0_over_gamma", "100")),
            gamma=1.0,
            k0L=float(lookup("k0L_over_pi", "0")) * math.pi,
            k0a=float(lookup("k0a_over_pi", "0")) * math.pi,
            markovian=_BOOLEANS[markovian_text],
        )
    except ValueError as exc:
        raise ConfigError(f"malformed numeric value: {exc}") from exc

    drive = None
    if "drive.mode" in entries or "drive.value" in entries:
        mode_text = lookup("drive.mode").lower()
        if mode_text not in _DRIVE_MODES:
            raise ConfigError(f"unknown drive mode {mode_text!r}")
        mode = _DRIVE_MODES[mode_text]
        try:
            value = float(lookup("drive.value", "0"))
        except ValueError as exc:
            raise ConfigError(f"malformed drive.value: {exc}") from exc
        drive = DriveSpec(mode, value)
    return config, drive


def parse_config_file(path) -> tuple[SystemConfig, DriveSpec | None]:
    """Read and parse a configuration file; see :func:`parse_config_text`."""
    try:
        with open(path, "r") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)
