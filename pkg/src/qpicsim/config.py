"""Scenario configuration: defaults, file parsing (TOML or JSON), validation.

Configuration is strict: unknown sections or keys raise ConfigError, as do
malformed sweep bounds. Files override scenario defaults; command-line flags
override files.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

__all__ = ["ScenarioConfig", "SCENARIOS", "load_config", "scenario_defaults"]

PI = math.pi

SCENARIOS = (
    "mzi_free_space",
    "mzi_theta_phi_map",
    "mzi_lossy",
    "mzi_integrated",
    "qpic_kscan",
    "qpic_slowlight",
    "qpic_phase_sweep",
)


@dataclass
class PhysicsConfig:
    """Either direct gate exposures (u_dt list) or material data (g_exc list)."""

    u_dt: list[float] | None = None
    g_exc: list[float] | None = None
    alpha_in: float = 1.0
    theta_in: float = PI / 4
    theta_out: float = 0.2 * PI
    phi_rel: float = 0.6 * PI
    u2: float = 0.3
    dx_um: float = 200.0
    num_layers: int = 5
    num_modes: int = 6
    sigma_t: float = 1.0
    a_perp: float | None = None
    j_design: str = "photonic-calibrated"
    j_dt_design: float = PI / 6
    delta_dt: float = 0.0
    dispersion_csv: str | None = None


@dataclass
class SweepConfig:
    variable: str = "phi_lo"
    start: float = 0.0
    stop: float = 2 * PI
    points: int = 401
    # second axis, used only by the theta/phi map
    variable2: str | None = None
    start2: float = 0.0
    stop2: float = 0.0
    points2: int = 1

    def __post_init__(self):
        if self.points < 1 or self.points2 < 1:
            raise ConfigError("sweep needs points >= 1")
        if self.points > 1 and not self.stop > self.start:
            raise ConfigError(f"sweep bounds must be ordered, got [{self.start}, {self.stop}]")
        if self.variable2 is not None and self.points2 > 1 and not self.stop2 > self.start2:
            raise ConfigError("second sweep axis bounds must be ordered")

    def grid(self) -> list[float]:
        if self.points == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.points - 1)
        return [self.start + i * step for i in range(self.points)]

    def grid2(self) -> list[float]:
        if self.points2 == 1:
            return [self.start2]
        step = (self.stop2 - self.start2) / (self.points2 - 1)
        return [self.start2 + i * step for i in range(self.points2)]


@dataclass
class LossConfig:
    db_total: list[float] | None = None  # MZI coupling losses, total dB split in/out
    gamma: float = 0.0  # uniform polariton loss rate, 1/ps
    l_max: int | None = None  # None: route default (2 sampled, full otherwise)
    fold_deficiency: bool = True


@dataclass
class EngineConfig:
    cutoff: int = 10
    mode: str = "auto"  # auto | pure | density | branch_enum | sampling
    trajectories: int = 10_000
    threshold: float = 1e-9
    seed: int = 2026
    se_method: str = "delta"

    def __post_init__(self):
        if self.cutoff < 1:
            raise ConfigError("cutoff must be >= 1")
        if self.mode not in ("auto", "pure", "density", "branch_enum", "sampling"):
            raise ConfigError(f"unknown engine mode {self.mode!r}")
        if self.trajectories < 1:
            raise ConfigError("trajectories must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("branch threshold must lie in (0, 1)")


@dataclass
class LayoutConfig:
    pairing: str = "brickwork-shifted"
    idle_kerr: bool = False
    custom_pairs: list[list[list[int]]] | None = None  # per layer: list of [i, j]

    def __post_init__(self):
        if self.pairing not in ("brickwork", "brickwork-shifted", "even-only", "custom"):
            raise ConfigError(f"unknown pairing {self.pairing!r}")
        if self.pairing == "custom" and not self.custom_pairs:
            raise ConfigError("custom pairing requires custom_pairs")


@dataclass
class OutputConfig:
    dir: str = "out"
    emit_plot_script: bool = False


@dataclass
class ScenarioConfig:
    scenario: str
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    phi_rel_list: list[float] | None = None  # qpic_phase_sweep only
    phase_sweep_scan: str = "kscan"  # kscan | slowlight
    convergence_tol: float = 1e-3

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; pick one of {SCENARIOS}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTION_TYPES = {
    "physics": PhysicsConfig,
    "sweep": SweepConfig,
    "loss": LossConfig,
    "engine": EngineConfig,
    "layout": LayoutConfig,
    "output": OutputConfig,
}
_TOP_LEVEL_SCALARS = ("scenario", "phi_rel_list", "phase_sweep_scan", "convergence_tol")


def scenario_defaults(scenario: str) -> ScenarioConfig:
    """Per-scenario defaults reproducing the reference parameter sets."""
    if scenario == "mzi_free_space":
        return ScenarioConfig(
            scenario=scenario,
            physics=PhysicsConfig(u_dt=[0.001, 0.005, 0.06], num_modes=2),
            sweep=SweepConfig("phi_lo", 0.0, 2 * PI, 401),
            engine=EngineConfig(cutoff=10, mode="pure"),
        )
    if scenario == "mzi_theta_phi_map":
        return ScenarioConfig(
            scenario=scenario,
            physics=PhysicsConfig(u_dt=[0.02], num_modes=2),
            sweep=SweepConfig(
                "phi_lo", 0.0, 2 * PI, 81, variable2="theta_out", start2=0.0,
                stop2=PI / 2, points2=41,
            ),
            engine=EngineConfig(cutoff=10, mode="pure"),
        )
    if scenario == "mzi_lossy":
        return ScenarioConfig(
            scenario=scenario,
            physics=PhysicsConfig(u_dt=[0.02], num_modes=2),
            sweep=SweepConfig("phi_lo", 0.0, 2 * PI, 401),
            loss=LossConfig(db_total=[0.0, 0.97, 1.93, 2.90]),
            engine=EngineConfig(cutoff=10, mode="density"),
        )
    if scenario == "mzi_integrated":
        return ScenarioConfig(
            scenario=scenario,
            physics=PhysicsConfig(u_dt=[0.001, 0.005, 0.06], num_modes=2),
            sweep=SweepConfig("phi_lo", 0.0, 2 * PI, 401),
            engine=EngineConfig(cutoff=10, mode="pure"),
        )
    if scenario == "qpic_kscan":
        return ScenarioConfig(
            scenario=scenario,
            physics=PhysicsConfig(g_exc=[10.0, 50.0, 700.0], phi_rel=0.6 * PI),
            sweep=SweepConfig("k", 0.05, 0.35, 40),
            engine=EngineConfig(cutoff=10, mode="auto"),
        )
    if scenario == "qpic_slowlight":
        return ScenarioConfig(
            scenario=scenario,
            physics=PhysicsConfig(
                g_exc=[700.0], phi_rel=0.2 * PI, j_design="fixed", u2=0.3
            ),
            sweep=SweepConfig("v_g", 10.0, 25.0, 16),
            loss=LossConfig(gamma=0.02),
            engine=EngineConfig(cutoff=6, mode="auto"),
        )
    if scenario == "qpic_phase_sweep":
        return ScenarioConfig(
            scenario=scenario,
            physics=PhysicsConfig(g_exc=[700.0], phi_rel=0.6 * PI),
            sweep=SweepConfig("k", 0.05, 0.35, 40),
            engine=EngineConfig(cutoff=6, mode="auto"),
            phi_rel_list=[0.0, 0.2 * PI, 0.4 * PI, 0.6 * PI, 0.8 * PI, PI],
        )
    raise ConfigError(f"unknown scenario {scenario!r}")


def _apply_section(obj, data: dict, section: str):
    valid = {f.name for f in dataclasses.fields(obj)}
    for key, value in data.items():
        if key not in valid:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        setattr(obj, key, value)
    # re-run validation where the section defines any
    post = getattr(obj, "__post_init__", None)
    if post is not None:
        post()
    return obj


def load_config(path: str | Path | None, scenario: str | None = None) -> ScenarioConfig:
    """Build a ScenarioConfig from defaults, a config file, or both."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix == ".json":
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        elif path.suffix == ".toml":
            try:
                data = tomllib.loads(raw.decode())
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
        else:
            raise ConfigError(f"config must be .toml or .json, got {path.suffix!r}")
        if not isinstance(data, dict):
            raise ConfigError("config root must be a table/object")

    file_scenario = data.get("scenario")
    name = scenario or file_scenario
    if name is None:
        raise ConfigError("no scenario given (flag --scenario or config key 'scenario')")
    if file_scenario is not None and scenario is not None and file_scenario != scenario:
        raise ConfigError(
            f"config file names scenario {file_scenario!r} but {scenario!r} was requested"
        )

    cfg = scenario_defaults(name)
    for key, value in data.items():
        if key == "scenario":
            continue
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ConfigError(f"section [{key}] must be a table/object")
            _apply_section(getattr(cfg, key), value, key)
        elif key in _TOP_LEVEL_SCALARS:
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"unknown top-level key {key!r}")
    cfg.__post_init__()
    return cfg
