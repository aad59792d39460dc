"""Configuration schema, JSON loading/validation, and the run manifest."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .baselines import QosTargets, StaticScoreWeights
from .channel import ChannelParams
from .errors import ConfigurationError
from .netstate import CongestionParams, DelayParams
from .routing import MetricWeights, SwitchParams
from .topology import RoadRegion

DEFAULT_SWEEP = (50, 100, 200, 300, 400, 500)


@dataclass(frozen=True)
class TopologyParams:
    road_length_m: float = 20000.0
    road_width_m: float = 200.0
    v2v_radius_m: float = 300.0
    rsu_coverage_m: float = 500.0
    buffer_cap: float = 50.0

    def __post_init__(self) -> None:
        for name in ("road_length_m", "road_width_m", "v2v_radius_m",
                     "rsu_coverage_m", "buffer_cap"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.rsu_coverage_m <= self.v2v_radius_m:
            raise ConfigurationError("rsu_coverage_m must exceed v2v_radius_m")

    @property
    def region(self) -> RoadRegion:
        return RoadRegion(self.road_length_m, self.road_width_m)


@dataclass(frozen=True)
class RoutingParams:
    v_ref_mps: float = 30.0
    pdr_min: float = 0.7
    t_max_s: float = 10.0
    q_max: float = 0.95
    carry_slots_max: int = 10
    v2i_signal_threshold_dbm: float | None = None

    def __post_init__(self) -> None:
        if self.v_ref_mps <= 0:
            raise ConfigurationError("v_ref_mps must be positive")
        if not 0.0 < self.pdr_min <= 1.0:
            raise ConfigurationError("pdr_min must be in (0, 1]")
        if self.t_max_s <= 0:
            raise ConfigurationError("t_max_s must be positive")
        if not 0.0 < self.q_max <= 1.0:
            raise ConfigurationError("q_max must be in (0, 1]")
        if self.carry_slots_max < 0:
            raise ConfigurationError("carry_slots_max must be >= 0")

    @property
    def v2i_signal_threshold_w(self) -> float | None:
        if self.v2i_signal_threshold_dbm is None:
            return None
        return dbm_to_watts(self.v2i_signal_threshold_dbm)


@dataclass(frozen=True)
class BaselineParams:
    score: StaticScoreWeights = StaticScoreWeights()
    qos: QosTargets = QosTargets()
    mrl_lr: float = 0.1
    mrl_discount: float = 0.9
    mrl_epsilon: float = 0.1
    mrl_eta: float = 0.5
    drl_epsilon: float = 0.02

    def __post_init__(self) -> None:
        for name in ("mrl_lr", "mrl_epsilon", "mrl_eta", "drl_epsilon"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1]")
        if not 0.0 <= self.mrl_discount < 1.0:
            raise ConfigurationError("mrl_discount must be in [0, 1)")


@dataclass(frozen=True)
class SimParams:
    n_vehicles: tuple[int, ...] = DEFAULT_SWEEP
    episodes: int = 200
    max_hops: int = 15
    dt_s: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.n_vehicles) == 0:
            raise ConfigurationError("n_vehicles sweep must not be empty")
        if any(n < 2 for n in self.n_vehicles):
            raise ConfigurationError("every sweep density must be >= 2 vehicles")
        if self.episodes < 1:
            raise ConfigurationError("episodes must be >= 1")
        if self.max_hops < 1:
            raise ConfigurationError("max_hops must be >= 1")
        if self.dt_s <= 0:
            raise ConfigurationError("dt_s must be positive")
        if self.seed < 0:
            raise ConfigurationError("seed must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    """Complete, validated simulator configuration."""

    topology: TopologyParams = TopologyParams()
    channel: ChannelParams = ChannelParams()
    congestion: CongestionParams = CongestionParams()
    delay: DelayParams = DelayParams()
    weights: MetricWeights = MetricWeights()
    switching: SwitchParams = SwitchParams()
    routing: RoutingParams = RoutingParams()
    baselines: BaselineParams = BaselineParams()
    sim: SimParams = SimParams()


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise ConfigurationError("power must be positive to express in dBm")
    return 10.0 * math.log10(watts) + 30.0


def _build_channel(raw: dict) -> ChannelParams:
    raw = dict(raw)
    if "tx_power_dbm" in raw and "tx_power_w" in raw:
        raise ConfigurationError("give tx_power_dbm or tx_power_w, not both")
    if "tx_power_dbm" in raw:
        raw["tx_power_w"] = dbm_to_watts(raw.pop("tx_power_dbm"))
    return _from_mapping(ChannelParams, raw, "channel")


def _from_mapping(cls, raw: dict, section: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigurationError(
            f"unknown key(s) in '{section}': {', '.join(sorted(unknown))}"
        )
    return cls(**raw)


def _build_weights(raw: dict) -> MetricWeights:
    raw = dict(raw)
    raw.setdefault("alpha", 0.4)
    raw.setdefault("beta", 0.2)
    raw.setdefault("gamma", 0.2)
    raw.setdefault("delta", 0.2)
    raw.setdefault("baselines", [raw["beta"], raw["gamma"], raw["delta"]])
    raw["baselines"] = tuple(raw["baselines"])
    return _from_mapping(MetricWeights, raw, "weights")


def _build_baselines(raw: dict) -> BaselineParams:
    raw = dict(raw)
    score_keys = {"w_rate", "w_ber", "w_dist", "w_load"}
    score = {k: raw.pop(k) for k in list(raw) if k in score_keys}
    qos = {}
    if "drl_targets" in raw:
        qos["targets"] = tuple(raw.pop("drl_targets"))
    if "drl_weights" in raw:
        qos["weights"] = tuple(raw.pop("drl_weights"))
    raw["score"] = _from_mapping(StaticScoreWeights, score, "baselines")
    raw["qos"] = _from_mapping(QosTargets, qos, "baselines")
    return _from_mapping(BaselineParams, raw, "baselines")


def _build_sim(raw: dict) -> SimParams:
    raw = dict(raw)
    if "n_vehicles" in raw:
        raw["n_vehicles"] = tuple(int(n) for n in raw["n_vehicles"])
    return _from_mapping(SimParams, raw, "sim")


_SECTION_BUILDERS = {
    "topology": lambda raw: _from_mapping(TopologyParams, raw, "topology"),
    "channel": _build_channel,
    "congestion": lambda raw: _from_mapping(CongestionParams, raw, "congestion"),
    "delay": lambda raw: _from_mapping(DelayParams, raw, "delay"),
    "weights": _build_weights,
    "switching": lambda raw: _from_mapping(SwitchParams, raw, "switching"),
    "routing": lambda raw: _from_mapping(RoutingParams, raw, "routing"),
    "baselines": _build_baselines,
    "sim": _build_sim,
}


def config_from_dict(data: dict) -> SimConfig:
    """Build a validated SimConfig, applying defaults for absent keys."""
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    unknown = set(data) - set(_SECTION_BUILDERS)
    if unknown:
        raise ConfigurationError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    for section, builder in _SECTION_BUILDERS.items():
        raw = data.get(section, {})
        if not isinstance(raw, dict):
            raise ConfigurationError(f"config section '{section}' must be an object")
        kwargs[section] = builder(raw)
    return SimConfig(**kwargs)


def load_config(path: str | Path | None) -> SimConfig:
    """Load a JSON config file; a missing path means all defaults."""
    if path is None:
        return SimConfig()
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"config parse error in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(data)


def config_to_dict(cfg: SimConfig) -> dict:
    """Fully expanded, reloadable plain-dict form of a config."""
    out: dict = {}
    for section in _SECTION_BUILDERS:
        value = getattr(cfg, section)
        out[section] = _expand(value)
    base = out["baselines"]
    flat = dict(base.pop("score"))
    qos = base.pop("qos")
    flat.update(base)
    flat["drl_targets"] = list(qos["targets"])
    flat["drl_weights"] = list(qos["weights"])
    out["baselines"] = flat
    return out


def _expand(value):
    if dataclasses.is_dataclass(value):
        return {f.name: _expand(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, tuple):
        return list(value)
    return value


def config_digest(cfg: SimConfig) -> str:
    """Stable SHA-256 over the canonical JSON form of the expanded config."""
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class RunManifest:
    """Provenance sidecar written next to every result set."""

    config_sha256: str
    code_version: str
    seed: int
    created_utc: str
    outputs: list[str] = field(default_factory=list)

    @classmethod
    def for_run(cls, cfg: SimConfig, seed: int) -> "RunManifest":
        return cls(
            config_sha256=config_digest(cfg),
            code_version=__version__,
            seed=seed,
            created_utc=datetime.now(timezone.utc).isoformat(),
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
