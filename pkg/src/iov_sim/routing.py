"""Adaptive multi-metric next-hop selection: screening, scoring, switching."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import channel as ch
from .errors import ConfigurationError, MetricDomainError
from .netstate import node_load
from .topology import Topology, distances_from, reachable_rsus, rsu_distances_from

MODE_V2V = "v2v"
MODE_V2I = "v2i"
MODE_RECOVERY = "recovery"
MODE_CARRY = "carry"


@dataclass(frozen=True)
class MetricWeights:
    """Weights of the four hop-metric terms plus their adaptation anchors.

    `baselines` holds the pre-adaptation (beta, gamma, delta); alpha has no
    anchor because adaptation leaves it untouched before renormalization.
    """

    alpha: float = 0.4
    beta: float = 0.2
    gamma: float = 0.2
    delta: float = 0.2
    baselines: tuple[float, float, float] = (0.2, 0.2, 0.2)

    def __post_init__(self) -> None:
        parts = (self.alpha, self.beta, self.gamma, self.delta)
        if any(w < 0 for w in parts) or any(w < 0 for w in self.baselines):
            raise ConfigurationError("metric weights must be >= 0")
        if abs(sum(parts) - 1.0) > 1e-9:
            raise ConfigurationError("metric weights must sum to 1")


@dataclass(frozen=True)
class SwitchParams:
    """Constants governing the primary/backup switch threshold."""

    c_th: float = 1.5
    c_th_min: float = 0.5
    c_th_max: float = 5.0
    window_decisions: int = 20
    disruptions_hi: int = 3
    switches_hi: int = 10
    decrease_factor: float = 0.9
    increase_factor: float = 1.1

    def __post_init__(self) -> None:
        if not 0 < self.c_th_min <= self.c_th <= self.c_th_max:
            raise ConfigurationError("need 0 < c_th_min <= c_th <= c_th_max")
        if self.window_decisions < 1:
            raise ConfigurationError("window_decisions must be >= 1")
        if not 0 < self.decrease_factor < 1 < self.increase_factor:
            raise ConfigurationError("need decrease_factor < 1 < increase_factor")


@dataclass
class SwitchState:
    """Mutable per-episode switching state."""

    c_th: float
    recent_disruptions: int = 0
    recent_switches: int = 0
    decisions_in_window: int = 0


@dataclass(frozen=True)
class LinkBundle:
    """Per-candidate link assessment for one decision slot."""

    ids: np.ndarray          # sorted candidate vehicle ids
    distance_m: np.ndarray
    rx_power_w: np.ndarray
    snr: np.ndarray
    ber: np.ndarray
    prr: np.ndarray
    rate_bps: np.ndarray
    stability: np.ndarray
    load: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def quality(self, index: int) -> ch.LinkQuality:
        return ch.LinkQuality(
            distance_m=float(self.distance_m[index]),
            rx_power_w=float(self.rx_power_w[index]),
            snr=float(self.snr[index]),
            ber=float(self.ber[index]),
            prr=float(self.prr[index]),
            rate_bps=float(self.rate_bps[index]),
        )


class LinkSampler:
    """Draws per-slot fading and assembles candidate link bundles.

    Results are memoized until `new_slot` so that a screening pass and a
    later lookup of the chosen link see the same channel draw.
    """

    def __init__(self, params: ch.ChannelParams, v_ref_mps: float, rng: np.random.Generator):
        self.params = params
        self.v_ref_mps = v_ref_mps
        self.rng = rng
        self._cache: dict[tuple[int, bytes], LinkBundle] = {}

    def new_slot(self) -> None:
        self._cache.clear()

    def _fading(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        shadow = self.rng.normal(0.0, self.params.shadow_sigma_db, k)
        multipath = self.rng.exponential(1.0, k)
        return shadow, multipath

    def assess(self, topo: Topology, src: int, ids: np.ndarray) -> LinkBundle:
        key = (src, ids.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        diff = topo.positions[ids] - topo.positions[src]
        dist = np.hypot(diff[:, 0], diff[:, 1])
        shadow, multipath = self._fading(len(ids))
        fields = ch.assess_links_array(self.params, dist, shadow, multipath)
        vdiff = topo.velocities[ids] - topo.velocities[src]
        v_rel = np.hypot(vdiff[:, 0], vdiff[:, 1])
        stab = link_stability_array(v_rel, dist, self.v_ref_mps, topo.v2v_radius_m)
        load = np.minimum(1.0, topo.queue_len[ids] / topo.buffer_cap)
        bundle = LinkBundle(
            ids=ids, distance_m=dist, stability=stab, load=load, **fields
        )
        self._cache[key] = bundle
        return bundle


class FrozenLinkSampler(LinkSampler):
    """Sampler with one fixed fading draw per unordered vehicle pair.

    Used anywhere a static channel is needed, e.g. exhaustive-search
    comparisons where every path must see identical link quality.
    """

    def __init__(self, params: ch.ChannelParams, v_ref_mps: float,
                 fading: dict[tuple[int, int], ch.FadingSample]):
        super().__init__(params, v_ref_mps, rng=np.random.default_rng(0))
        self.fading = fading

    def _pair(self, a: int, b: int) -> tuple[int, int]:
        return (a, b) if a <= b else (b, a)

    def assess(self, topo: Topology, src: int, ids: np.ndarray) -> LinkBundle:
        samples = [self.fading.get(self._pair(src, int(i)), ch.UNIT_FADING) for i in ids]
        shadow = np.array([s.shadow_db for s in samples])
        multipath = np.array([s.multipath_gain for s in samples])
        diff = topo.positions[ids] - topo.positions[src]
        dist = np.hypot(diff[:, 0], diff[:, 1])
        fields = ch.assess_links_array(self.params, dist, shadow, multipath)
        vdiff = topo.velocities[ids] - topo.velocities[src]
        v_rel = np.hypot(vdiff[:, 0], vdiff[:, 1])
        stab = link_stability_array(v_rel, dist, self.v_ref_mps, topo.v2v_radius_m)
        load = np.minimum(1.0, topo.queue_len[ids] / topo.buffer_cap)
        return LinkBundle(ids=ids, distance_m=dist, stability=stab, load=load, **fields)


def link_stability(v_rel_mps: float, distance_m: float, v_ref_mps: float, r_v_m: float) -> float:
    """Stability of a link in [0, 1]; 1 means co-moving and co-located."""
    if v_rel_mps < 0 or distance_m < 0:
        raise ConfigurationError("v_rel and distance must be >= 0")
    if v_ref_mps <= 0 or r_v_m <= 0:
        raise ConfigurationError("v_ref and r_v must be positive")
    return 1.0 - 0.5 * min(1.0, v_rel_mps / v_ref_mps) - 0.5 * min(1.0, distance_m / r_v_m)


def link_stability_array(v_rel, distance_m, v_ref_mps: float, r_v_m: float):
    return (
        1.0
        - 0.5 * np.minimum(1.0, v_rel / v_ref_mps)
        - 0.5 * np.minimum(1.0, distance_m / r_v_m)
    )


def hop_metric(
    prr: float, next_load: float, c_global: float, stability: float, w: MetricWeights
) -> float:
    """Composite per-hop cost; lower is better."""
    if not ch.PRR_FLOOR <= prr <= ch.PRR_CEIL:
        raise MetricDomainError("prr outside [0.01, 0.999]")
    if not 0.0 <= next_load <= 1.0:
        raise MetricDomainError("next_load outside [0, 1]")
    if not 0.0 <= c_global <= 1.0:
        raise MetricDomainError("c_global outside [0, 1]")
    if not 0.0 <= stability <= 1.0:
        raise MetricDomainError("stability outside [0, 1]")
    return (
        w.alpha / prr
        + w.beta * next_load
        + w.gamma * c_global
        + w.delta * (1.0 - stability)
    )


def adapt_weights(w: MetricWeights, c_global: float, own_load: float) -> MetricWeights:
    """Re-balance the metric weights for the current congestion and own load.

    Congestion inflates the congestion term and deflates the stability
    term; own queue pressure inflates the load term. Alpha is carried
    through unchanged and the result is renormalized to sum to one.
    """
    if not 0.0 <= c_global <= 1.0 or not 0.0 <= own_load <= 1.0:
        raise MetricDomainError("c_global and own_load must be in [0, 1]")
    beta0, gamma0, delta0 = w.baselines
    pre = (
        w.alpha,
        beta0 * (1.0 + own_load),
        gamma0 * (1.0 + c_global),
        delta0 * (1.0 - c_global),
    )
    total = sum(pre)
    if total <= 0:
        raise ConfigurationError("adapted weights would collapse to zero")
    return MetricWeights(
        alpha=pre[0] / total,
        beta=pre[1] / total,
        gamma=pre[2] / total,
        delta=pre[3] / total,
        baselines=w.baselines,
    )


def adapt_threshold(
    state: SwitchState, disruptions: int, switches: int, params: SwitchParams
) -> SwitchState:
    """Move the switch threshold after one observation window.

    Frequent disruptions argue for switching to the stable backup sooner
    (lower threshold); frequent switches argue for more inertia.
    """
    c = state.c_th
    if disruptions > params.disruptions_hi:
        c = max(params.c_th_min, c * params.decrease_factor)
    elif switches > params.switches_hi:
        c = min(params.c_th_max, c * params.increase_factor)
    return replace(state, c_th=c, recent_disruptions=0, recent_switches=0,
                   decisions_in_window=0)


def select_mode(
    topo: Topology,
    src: int,
    *,
    signal_threshold_w: float | None = None,
    channel_params: ch.ChannelParams | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[str, set[int]]:
    """Choose V2I when RSU support is available, V2V otherwise.

    The default criterion is coverage distance. The optional
    signal-threshold variant instead demands a sampled RSU downlink power
    above `signal_threshold_w`.
    """
    rsus = reachable_rsus(topo, src)
    if signal_threshold_w is None:
        return (MODE_V2I, rsus) if rsus else (MODE_V2V, set())
    if channel_params is None or rng is None:
        raise ConfigurationError("signal-threshold mode needs channel params and rng")
    audible = set()
    rsu_d = rsu_distances_from(topo, src)
    for rsu_id in sorted(rsus):
        d = float(rsu_d[-rsu_id - 1])
        fading = ch.sample_fading(channel_params, rng)
        if ch.rx_power(channel_params, max(d, channel_params.ref_dist_m), fading) >= signal_threshold_w:
            audible.add(rsu_id)
    return (MODE_V2I, audible) if audible else (MODE_V2V, set())


def _base_candidate_mask(
    topo: Topology, src: int, dst: int, visited: frozenset[int] | set[int]
) -> np.ndarray:
    d_src = distances_from(topo, src)
    d_dst = distances_from(topo, dst)
    mask = (d_src <= topo.v2v_radius_m) & (d_dst < d_dst[src])
    mask[src] = False
    for v in visited:
        if 0 <= v < topo.n_vehicles:
            mask[v] = False
    return mask


def _v2i_filter(topo: Topology, mask: np.ndarray, rsu_ids: set[int]) -> np.ndarray:
    """Restrict a candidate mask to vehicles covered by one of the RSUs."""
    if not rsu_ids:
        return np.zeros_like(mask)
    covered = np.zeros_like(mask)
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return covered
    pos = topo.positions[idx]
    for rsu_id in rsu_ids:
        k = -rsu_id - 1
        d = np.hypot(pos[:, 0] - topo.rsu_positions[k, 0], pos[:, 1] - topo.rsu_positions[k, 1])
        covered[idx[d <= topo.rsu_coverage_m]] = True
    return mask & covered


def screen_candidates(
    topo: Topology,
    src: int,
    dst: int,
    mode: str,
    visited: frozenset[int] | set[int] = frozenset(),
    rsu_ids: set[int] | None = None,
) -> np.ndarray:
    """Connected, progress-making candidates for the given mode.

    V2I narrows the V2V set to vehicles under the coverage of an RSU
    reachable from the source; when that narrowed set is empty the
    screening falls through to plain V2V.
    """
    ids, _ = screen_candidates_with_mode(topo, src, dst, mode, visited, rsu_ids)
    return ids


def screen_candidates_with_mode(
    topo: Topology,
    src: int,
    dst: int,
    mode: str,
    visited: frozenset[int] | set[int] = frozenset(),
    rsu_ids: set[int] | None = None,
) -> tuple[np.ndarray, str]:
    mask = _base_candidate_mask(topo, src, dst, visited)
    if mode == MODE_V2I:
        rsus = reachable_rsus(topo, src) if rsu_ids is None else rsu_ids
        narrowed = _v2i_filter(topo, mask, rsus)
        if narrowed.any():
            return np.flatnonzero(narrowed), MODE_V2I
    return np.flatnonzero(mask), MODE_V2V


def recovery_candidates(
    topo: Topology, src: int, dst: int, visited: frozenset[int] | set[int]
) -> np.ndarray:
    """Connectivity-only fallback set: progress is no longer required."""
    d_src = distances_from(topo, src)
    mask = d_src <= topo.v2v_radius_m
    mask[src] = False
    for v in visited:
        if 0 <= v < topo.n_vehicles:
            mask[v] = False
    return np.flatnonzero(mask)


def estimate_local_congestion(
    topo: Topology, src: int, density_divisor: float = 1.0
) -> float:
    """Plug-in congestion estimate from the local neighbor count.

    Under uniform density the expected neighbor count inside one V2V disk
    equals the global coverage ratio, so the count itself (scaled by the
    saturation divisor) estimates the congestion level.
    """
    count = len(v2v_neighbor_ids(topo, src))
    saturation_n = topo.region.area_m2 * density_divisor / (math.pi * topo.v2v_radius_m**2)
    expected_at_saturation = saturation_n * math.pi * topo.v2v_radius_m**2 / topo.region.area_m2
    return min(1.0, count / expected_at_saturation)


def v2v_neighbor_ids(topo: Topology, src: int) -> np.ndarray:
    d = distances_from(topo, src)
    mask = d <= topo.v2v_radius_m
    mask[src] = False
    return np.flatnonzero(mask)


@dataclass
class RouteDecision:
    """Outcome of one next-hop decision."""

    mode: str
    chosen: int | None
    carry: bool = False
    primary: int | None = None
    backup: int | None = None
    primary_metric: float | None = None
    backup_stability: float | None = None
    switched: bool = False
    quality: ch.LinkQuality | None = None
    chosen_stability: float | None = None
    chosen_load: float | None = None
    chosen_metric: float | None = None
    candidate_count: int = 0


def decide_next_hop(
    topo: Topology,
    src: int,
    dst: int,
    c_global: float,
    weights: MetricWeights,
    switch_state: SwitchState,
    sampler: LinkSampler,
    visited: frozenset[int] | set[int] = frozenset(),
    *,
    allow_recovery: bool = True,
    signal_threshold_w: float | None = None,
) -> RouteDecision:
    """Pick the next hop by metric minimization with a stability backup.

    The primary is the metric argmin, the backup the stability argmax
    (ties to the lower node id). The backup is taken only when the
    primary's metric exceeds the switch threshold and the two differ.
    When screening is empty, recovery drops the progress requirement;
    when even recovery is empty the decision is a carry signal.
    """
    mode, rsus = select_mode(
        topo, src,
        signal_threshold_w=signal_threshold_w,
        channel_params=sampler.params if signal_threshold_w is not None else None,
        rng=sampler.rng if signal_threshold_w is not None else None,
    )
    ids, used_mode = screen_candidates_with_mode(topo, src, dst, mode, visited, rsus)
    if len(ids) == 0:
        if not allow_recovery:
            return RouteDecision(mode=used_mode, chosen=None)
        ids = recovery_candidates(topo, src, dst, visited)
        if len(ids) == 0:
            return RouteDecision(mode=MODE_CARRY, chosen=None, carry=True)
        used_mode = MODE_RECOVERY

    bundle = sampler.assess(topo, src, ids)
    metric = (
        weights.alpha / bundle.prr
        + weights.beta * bundle.load
        + weights.gamma * c_global
        + weights.delta * (1.0 - bundle.stability)
    )
    primary_idx = int(np.argmin(metric))
    backup_idx = int(np.argmax(bundle.stability))
    primary = int(ids[primary_idx])
    backup = int(ids[backup_idx])
    switched = bool(metric[primary_idx] > switch_state.c_th and backup != primary)
    chosen_idx = backup_idx if switched else primary_idx

    return RouteDecision(
        mode=used_mode,
        chosen=int(ids[chosen_idx]),
        primary=primary,
        backup=backup,
        primary_metric=float(metric[primary_idx]),
        backup_stability=float(bundle.stability[backup_idx]),
        switched=switched,
        quality=bundle.quality(chosen_idx),
        chosen_stability=float(bundle.stability[chosen_idx]),
        chosen_load=float(bundle.load[chosen_idx]),
        chosen_metric=float(metric[chosen_idx]),
        candidate_count=len(ids),
    )


class AdaptiveScheme:
    """Episode-scoped driver tying adaptation, switching, and decisions together."""

    name = "proposed"

    def __init__(
        self,
        weights: MetricWeights,
        switch_params: SwitchParams,
        density_divisor: float = 1.0,
        signal_threshold_w: float | None = None,
    ):
        self.base_weights = weights
        self.switch_params = switch_params
        self.density_divisor = density_divisor
        self.signal_threshold_w = signal_threshold_w
        self.state = SwitchState(c_th=switch_params.c_th)
        self.last_weights = weights
        self.last_c: float | None = None

    def begin_episode(self) -> None:
        self.state = SwitchState(c_th=self.switch_params.c_th)

    def congestion_view(self, topo: Topology, src: int, c_global: float) -> float:
        """RSU broadcast when covered, local neighbor estimate otherwise."""
        if reachable_rsus(topo, src):
            return c_global
        return estimate_local_congestion(topo, src, self.density_divisor)

    def decide(
        self,
        topo: Topology,
        src: int,
        dst: int,
        visited: frozenset[int] | set[int],
        sampler: LinkSampler,
        c_global: float,
    ) -> RouteDecision:
        c = self.congestion_view(topo, src, c_global)
        self.last_c = c
        own = node_load(float(topo.queue_len[src]), topo.buffer_cap)
        w = adapt_weights(self.base_weights, c, own)
        self.last_weights = w
        decision = decide_next_hop(
            topo, src, dst, c, w, self.state, sampler, visited,
            signal_threshold_w=self.signal_threshold_w,
        )

        st = self.state
        st.decisions_in_window += 1
        if decision.switched:
            st.recent_switches += 1
        # recovery and carry both signal that the normal route broke down
        if decision.mode in (MODE_RECOVERY, MODE_CARRY):
            st.recent_disruptions += 1
        if st.decisions_in_window >= self.switch_params.window_decisions:
            self.state = adapt_threshold(
                st, st.recent_disruptions, st.recent_switches, self.switch_params
            )
        return decision
