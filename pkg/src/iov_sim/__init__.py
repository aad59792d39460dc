"""Discrete-time vehicular network routing simulator.

Simulates single-packet relay episodes over a moving highway topology and
compares an adaptive multi-criteria forwarding scheme against four simpler
baselines across a range of vehicle densities.
"""

__version__ = "0.1.0"

from .channel import ChannelParams, FadingSample, LinkQuality, UNIT_FADING, assess_link
from .config import SimConfig, config_from_dict, load_config
from .errors import (
    ConfigurationError,
    DeadLinkError,
    InvalidLinkError,
    MetricDomainError,
    NodeNotFoundError,
    SimError,
)
from .harness import (
    ALGORITHMS,
    EpisodeMetrics,
    EpisodeTrace,
    SweepRow,
    audit_episode,
    composite_score,
    run_episode,
    run_point,
    run_sweep,
)
from .routing import AdaptiveScheme, MetricWeights, SwitchParams, hop_metric
from .topology import RoadRegion, Topology, init_topology, step_mobility

__all__ = [
    "__version__",
    "ALGORITHMS",
    "AdaptiveScheme",
    "ChannelParams",
    "ConfigurationError",
    "DeadLinkError",
    "EpisodeMetrics",
    "EpisodeTrace",
    "FadingSample",
    "InvalidLinkError",
    "LinkQuality",
    "MetricDomainError",
    "MetricWeights",
    "NodeNotFoundError",
    "RoadRegion",
    "SimConfig",
    "SimError",
    "SweepRow",
    "SwitchParams",
    "Topology",
    "UNIT_FADING",
    "assess_link",
    "audit_episode",
    "composite_score",
    "config_from_dict",
    "hop_metric",
    "init_topology",
    "load_config",
    "run_episode",
    "run_point",
    "run_sweep",
    "step_mobility",
]
