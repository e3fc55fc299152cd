"""wgqed: transport, fluorescence, and photon correlations for qubit
arrays coupled to one-dimensional waveguides.

The package is organized around small, composable modules:

* :mod:`wgqed.model` -- configurations, unit conventions, drive resolution.
* :mod:`wgqed.transport` -- single-photon scattering, poles, time delay.
* :mod:`wgqed.boundstate` -- two-photon bound-state engine: fluorescence
  spectra, g2 correlation traces, N=1 photon-number probabilities.
* :mod:`wgqed.langevin` -- driven-qubit input-output oracle (steady state,
  regression spectra) for cross-validation at arbitrary drive strength.
* :mod:`wgqed.numerics` -- residue algebra, root finding, quadrature oracles.
* :mod:`wgqed.cli` / :mod:`wgqed.service` -- command line and HTTP surfaces.

All frequencies are in units of the single-qubit decay rate and all
lengths in units of the inverse decay rate (velocity fixed to one).
"""

from .model import DriveSpec, Geometry, SystemConfig, qubit_positions, resolve_drive

__all__ = [
    "DriveSpec",
    "Geometry",
    "SystemConfig",
    "qubit_positions",
    "resolve_drive",
]

__version__ = "0.1.0"
