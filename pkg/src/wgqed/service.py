"""HTTP interface: the library's scans and spectra as a JSON service.

Runs the same compute kernels as the command-line surface (so a curl
call and a CSV export can never disagree) and returns columnar JSON.
Configuration problems map to 422, numeric non-convergence to 500.

Start locally with ``uvicorn wgqed.service:app``.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__, langevin, presets
from .cli import _config_payload, compute_rows
from .errors import ConfigError, NumericsError
from .model import DriveSpec, Geometry, SystemConfig, resolve_drive

__all__ = ["app"]


# ---------------------------------------------------------------------------
# request/response models
# ---------------------------------------------------------------------------


class StrictModel(BaseModel):
    """Reject unknown fields: a misshapen request (flat instead of nested,
    or a typo'd key) must 422 rather than silently compute with defaults."""

    model_config = ConfigDict(extra="forbid")


class ConfigModel(StrictModel):
    geometry: Literal["infinite", "semi-infinite"] = "infinite"
    n_qubits: int = Field(1, ge=1, le=16)
    omega0: float = Field(100.0, gt=0.0, description="emitter frequency / gamma")
    gamma: float = Field(1.0, gt=0.0)
    k0L: float = Field(0.0, ge=0.0, description="spacing phase in radians")
    k0a: float = Field(0.0, ge=0.0, description="mirror distance phase in radians")
    markovian: bool = True

    def build(self) -> SystemConfig:
        return SystemConfig(
            geometry=(
                Geometry.INFINITE
                if self.geometry == "infinite"
                else Geometry.SEMI_INFINITE
            ),
            n_qubits=self.n_qubits,
            omega0=self.omega0,
            gamma=self.gamma,
            k0L=self.k0L,
            k0a=self.k0a,
            markovian=self.markovian,
        )


class DriveModel(StrictModel):
    mode: Literal["resonant", "detuned", "target_transmission"] = "resonant"
    value: float = 0.0

    def build(self) -> DriveSpec:
        if self.mode == "resonant":
            return DriveSpec.resonant()
        if self.mode == "detuned":
            return DriveSpec.detuned(self.value)
        return DriveSpec.target_transmission(self.value)


class ScanRequest(StrictModel):
    config: ConfigModel = ConfigModel()
    span: float = Field(6.0, gt=0.0, description="half-width in units of gamma")
    points: int = Field(1201, ge=2, le=20001)


class PolesRequest(StrictModel):
    config: ConfigModel = ConfigModel()


class SpectrumRequest(StrictModel):
    config: ConfigModel = ConfigModel()
    drive: DriveModel = DriveModel()
    span: float = Field(6.0, gt=0.0)
    points: int = Field(2001, ge=2, le=20001)


class G2Request(StrictModel):
    config: ConfigModel = ConfigModel()
    drive: DriveModel = DriveModel()
    channel: Literal["transmitted", "reflected"] = "reflected"
    t_max: float = Field(40.0, gt=0.0)
    points: int = Field(2000, ge=2, le=20001)


class LangevinRequest(StrictModel):
    config: ConfigModel = ConfigModel()
    amplitude: float = Field(0.1, ge=0.0, description="drive amplitude A")
    detuning: float = Field(0.0, description="drive detuning / gamma")
    span: float | None = Field(None, gt=0.0)
    points: int = Field(1201, ge=2, le=20001)


class TransportResponse(BaseModel):
    k: list[float]
    T: list[float]
    R: list[float]
    re_t: list[float]
    im_t: list[float]
    re_r: list[float]
    im_r: list[float]
    unitarity_max_abs_dev: float
    poles: list[list[float]]


class PolesResponse(BaseModel):
    omega_tilde: list[float]
    gamma_tilde: list[float]
    mean: list[float]
    near_degenerate: bool


class DelayResponse(BaseModel):
    k: list[float]
    delay: list[float]
    resonant_delay: float
    poles: list[list[float]]


class SpectrumResponse(BaseModel):
    omega: list[float]
    S_R: list[float]
    S_L: list[float]
    S_total: list[float]
    S_normalized: list[float]
    half_energy: float
    flux: float
    coherent_weight_R: float
    coherent_weight_L: float
    poles: list[list[float]]


class G2Response(BaseModel):
    t: list[float]
    g2: list[float]
    half_energy: float
    channel: str
    poles: list[list[float]]


class LangevinResponse(BaseModel):
    omega: list[float]
    S_R: list[float]
    S_L: list[float]
    rabi: float
    conservation_residual: float
    coherent_weight_R: float
    coherent_weight_L: float
    incoherent_integral_R: float
    incoherent_integral_L: float


class PresetJobSummary(BaseModel):
    name: str
    kind: str


class PresetSummary(BaseModel):
    id: str
    title: str
    jobs: list[PresetJobSummary]


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------

app = FastAPI(
    title="wgqed",
    version=__version__,
    description="photon transport and fluorescence of waveguide-coupled emitter arrays",
)


@app.exception_handler(ConfigError)
async def _config_error(request: Request, exc: ConfigError):
    return JSONResponse(status_code=422, content={"error": "config", "detail": str(exc)})


@app.exception_handler(NumericsError)
async def _numerics_error(request: Request, exc: NumericsError):
    return JSONResponse(
        status_code=500, content={"error": "numerics", "detail": str(exc)}
    )


def _columns(rows):
    return [list(column) for column in zip(*rows)]


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/transport", response_model=TransportResponse)
def transport_endpoint(req: ScanRequest):
    cfg = req.config.build()
    params = {
        "config": _config_payload(cfg),
        "k_min": cfg.omega0 - req.span * cfg.gamma,
        "k_max": cfg.omega0 + req.span * cfg.gamma,
        "points": req.points,
    }
    _, rows, results = compute_rows("transport", params)
    k, T, R, re_t, im_t, re_r, im_r = _columns(rows)
    return TransportResponse(
        k=k, T=T, R=R, re_t=re_t, im_t=im_t, re_r=re_r, im_r=im_r,
        unitarity_max_abs_dev=results["unitarity_max_abs_dev"],
        poles=results["poles"],
    )


@app.post("/poles", response_model=PolesResponse)
def poles_endpoint(req: PolesRequest):
    cfg = req.config.build()
    _, rows, results = compute_rows("poles", {"config": _config_payload(cfg)})
    _, omega_tilde, gamma_tilde = _columns(rows)
    return PolesResponse(
        omega_tilde=omega_tilde,
        gamma_tilde=gamma_tilde,
        mean=results["mean"],
        near_degenerate=results["near_degenerate"],
    )


@app.post("/delay", response_model=DelayResponse)
def delay_endpoint(req: ScanRequest):
    cfg = req.config.build()
    params = {
        "config": _config_payload(cfg),
        "k_min": cfg.omega0 - req.span * cfg.gamma,
        "k_max": cfg.omega0 + req.span * cfg.gamma,
        "points": req.points,
    }
    _, rows, results = compute_rows("delay", params)
    k, delay = _columns(rows)
    return DelayResponse(
        k=k, delay=delay,
        resonant_delay=results["resonant_delay_times_gamma"],
        poles=results["poles"],
    )


@app.post("/spectrum", response_model=SpectrumResponse)
def spectrum_endpoint(req: SpectrumRequest):
    cfg = req.config.build()
    half = resolve_drive(cfg, req.drive.build())
    params = {
        "config": _config_payload(cfg),
        "half_energy": half,
        "omega_min": half - req.span * cfg.gamma,
        "omega_max": half + req.span * cfg.gamma,
        "points": req.points,
    }
    _, rows, results = compute_rows("spectrum", params)
    omega, s_r, s_l, s_total, normalized = _columns(rows)
    return SpectrumResponse(
        omega=omega, S_R=s_r, S_L=s_l, S_total=s_total, S_normalized=normalized,
        half_energy=results["half_energy"],
        flux=results["flux"],
        coherent_weight_R=results["coherent_weight_R"],
        coherent_weight_L=results["coherent_weight_L"],
        poles=results["poles"],
    )


@app.post("/g2", response_model=G2Response)
def g2_endpoint(req: G2Request):
    cfg = req.config.build()
    half = resolve_drive(cfg, req.drive.build())
    params = {
        "config": _config_payload(cfg),
        "half_energy": half,
        "channel": req.channel,
        "t_max": req.t_max,
        "points": req.points,
    }
    _, rows, results = compute_rows("g2", params)
    t, g2 = _columns(rows)
    return G2Response(
        t=t, g2=g2,
        half_energy=results["half_energy"],
        channel=req.channel,
        poles=results["poles"],
    )


@app.post("/langevin", response_model=LangevinResponse)
def langevin_endpoint(req: LangevinRequest):
    cfg = req.config.build()
    drive_frequency = cfg.omega0 + req.detuning * cfg.gamma
    sys_ = langevin.build_system(cfg, req.amplitude, drive_frequency)
    if req.span is None:
        grid = langevin.default_probe_grid(sys_, req.points)
        omega_min, omega_max = float(grid[0]), float(grid[-1])
    else:
        omega_min = drive_frequency - req.span * cfg.gamma
        omega_max = drive_frequency + req.span * cfg.gamma
    params = {
        "config": _config_payload(cfg),
        "amplitude": req.amplitude,
        "drive_frequency": drive_frequency,
        "omega_min": omega_min,
        "omega_max": omega_max,
        "points": req.points,
    }
    _, rows, results = compute_rows("langevin", params)
    omega, s_r, s_l = _columns(rows)
    return LangevinResponse(
        omega=omega, S_R=s_r, S_L=s_l,
        rabi=results["rabi"],
        conservation_residual=results["conservation_residual"],
        coherent_weight_R=results["coherent_weight_R"],
        coherent_weight_L=results["coherent_weight_L"],
        incoherent_integral_R=results["incoherent_integral_R"],
        incoherent_integral_L=results["incoherent_integral_L"],
    )


@app.get("/presets", response_model=list[PresetSummary])
def presets_endpoint():
    return [
        PresetSummary(
            id=preset.id,
            title=preset.title,
            jobs=[
                PresetJobSummary(name=job.name, kind=job.kind.value)
                for job in preset.jobs
            ],
        )
        for preset in presets.PRESETS.values()
    ]
