"""Synthetic trace generator with planted client groups.

Clients belong to interest groups, each group owns a video catalog, and
every client visits once per session window: a burst of Zipf-distributed
requests aimed at the client's own catalog with probability in_group_prob
and at an hour-weighted other catalog otherwise. The planted partition is
returned alongside the records so recovery can be scored.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .fileio import atomic_write
from .logs import LogRecord

# One visit never spreads wider than requests * MAX_STEP_SECONDS, which
# both keeps it inside its window and keeps it a single session at the
# default 1800 s idle bound.
MAX_STEP_SECONDS = 30
BYTES_RANGE = (100_000, 4_000_000)

LOG_HEADER = "# client_id user_id timestamp video_id status_code bytes_sent"
GROUND_TRUTH_HEADER = "client_id,group_id"


@dataclass(frozen=True)
class WorkloadConfig:
    num_clients: int = 50
    num_videos: int = 200
    num_groups: int = 5
    in_group_prob: float = 0.9
    zipf_exponent: float = 0.8
    requests_min: int = 140
    requests_max: int = 160
    num_session_windows: int = 3
    window_spacing: int = 86400
    shared_pool: int = 0
    category_schedule: Mapping[int, tuple[float, ...]] = field(default_factory=dict)
    seed: int = 7

    def __post_init__(self) -> None:
        if self.num_clients < 1 or self.num_videos < 1:
            raise ValueError("need at least one client and one video")
        if not 1 <= self.num_groups <= self.num_clients:
            raise ValueError(
                f"num_groups must be in [1, num_clients], got {self.num_groups}"
            )
        if not 0.0 <= self.in_group_prob <= 1.0:
            raise ValueError(f"in_group_prob must be in [0, 1], got {self.in_group_prob}")
        if self.zipf_exponent <= 0.0:
            raise ValueError(f"zipf_exponent must be positive, got {self.zipf_exponent}")
        if not 1 <= self.requests_min <= self.requests_max:
            raise ValueError(
                f"bad request range [{self.requests_min}, {self.requests_max}]"
            )
        if self.num_session_windows < 1:
            raise ValueError("num_session_windows must be >= 1")
        if self.window_spacing < 1:
            raise ValueError("window_spacing must be >= 1")
        if not 0 <= self.shared_pool <= self.num_videos:
            raise ValueError(f"shared_pool must be in [0, num_videos], got {self.shared_pool}")
        for hour, multipliers in self.category_schedule.items():
            if not 0 <= hour <= 23:
                raise ValueError(f"schedule hour {hour} outside [0, 23]")
            if len(multipliers) != self.num_groups:
                raise ValueError(
                    f"schedule for hour {hour} has {len(multipliers)} multipliers, "
                    f"expected {self.num_groups}"
                )
            if any(m < 0 for m in multipliers):
                raise ValueError(f"negative multiplier in schedule hour {hour}")


@dataclass(frozen=True)
class GroundTruth:
    """Planted structure: client to group, group to catalog (hot rank first)."""

    group_of: Mapping[str, int]
    catalogs: Mapping[int, tuple[str, ...]]


class ZipfSampler:
    """Inverse-CDF sampler over ranks 0..n-1 with weight (rank+1)**-exponent."""

    def __init__(self, num_items: int, exponent: float) -> None:
        if num_items < 1:
            raise ValueError("num_items must be >= 1")
        if exponent <= 0.0:
            raise ValueError("exponent must be positive")
        self.num_items = num_items
        self.exponent = exponent
        cumulative = []
        total = 0.0
        for rank in range(1, num_items + 1):
            total += rank ** -exponent
            cumulative.append(total)
        self._cumulative = cumulative
        self._total = total

    def weight(self, rank: int) -> float:
        """Normalized probability of the 0-based rank."""
        return (rank + 1) ** -self.exponent / self._total

    def sample(self, rng: random.Random) -> int:
        index = bisect_right(self._cumulative, rng.random() * self._total)
        return min(index, self.num_items - 1)


def validate_feasibility(config: WorkloadConfig) -> None:
    """Reject configs that cannot produce the promised structure."""
    span_cap = config.requests_max * MAX_STEP_SECONDS
    if config.window_spacing <= span_cap:
        raise ValueError(
            f"window_spacing {config.window_spacing} cannot hold a visit of up to "
            f"{config.requests_max} requests (needs > {span_cap})"
        )
    if config.shared_pool == 0 and config.num_videos < config.num_groups:
        raise ValueError(
            f"{config.num_videos} videos cannot fill {config.num_groups} exclusive catalogs"
        )


def plant_ground_truth(config: WorkloadConfig) -> GroundTruth:
    """Deterministic group membership and catalogs for a config.

    Clients split into contiguous near-equal groups. The optional shared
    pool sits at the front (hottest ranks) of every catalog; the remaining
    videos are divided into disjoint contiguous slices.
    """
    validate_feasibility(config)
    video_width = len(str(config.num_videos - 1))
    client_width = len(str(config.num_clients - 1))
    videos = [f"v{i:0{video_width}d}" for i in range(config.num_videos)]
    clients = [f"c{i:0{client_width}d}" for i in range(config.num_clients)]
    shared = tuple(videos[: config.shared_pool])
    rest = videos[config.shared_pool :]
    group_of = {
        client: index * config.num_groups // config.num_clients
        for index, client in enumerate(clients)
    }
    base_size, leftover = divmod(len(rest), config.num_groups)
    catalogs: dict[int, tuple[str, ...]] = {}
    cursor = 0
    for group in range(config.num_groups):
        size = base_size + (1 if group < leftover else 0)
        catalogs[group] = shared + tuple(rest[cursor : cursor + size])
        cursor += size
        if not catalogs[group]:
            raise ValueError(f"group {group} ended up with an empty catalog")
    return GroundTruth(group_of, catalogs)


def _pick_other_group(
    rng: random.Random, own: int, config: WorkloadConfig, hour: int
) -> int:
    others = [g for g in range(config.num_groups) if g != own]
    multipliers = config.category_schedule.get(hour)
    if multipliers is None:
        return others[rng.randrange(len(others))]
    weights = [multipliers[g] for g in others]
    total = sum(weights)
    if total <= 0.0:
        return others[rng.randrange(len(others))]
    draw = rng.random() * total
    acc = 0.0
    for group, weight in zip(others, weights):
        acc += weight
        if draw < acc:
            return group
    return others[-1]


def generate(config: WorkloadConfig) -> tuple[list[LogRecord], GroundTruth]:
    """Produce a sorted synthetic trace and its planted ground truth.

    Identical configs (seed included) produce identical records.
    """
    truth = plant_ground_truth(config)
    samplers = {
        group: ZipfSampler(len(catalog), config.zipf_exponent)
        for group, catalog in truth.catalogs.items()
    }
    rng = random.Random(config.seed)
    span_cap = config.requests_max * MAX_STEP_SECONDS
    records: list[LogRecord] = []
    clients = sorted(truth.group_of)
    for window in range(config.num_session_windows):
        window_start = window * config.window_spacing
        for client in clients:
            own = truth.group_of[client]
            count = rng.randint(config.requests_min, config.requests_max)
            stamp = window_start + rng.randrange(config.window_spacing - span_cap)
            for _ in range(count):
                group = own
                if config.num_groups > 1 and rng.random() >= config.in_group_prob:
                    group = _pick_other_group(rng, own, config, (stamp // 3600) % 24)
                video = truth.catalogs[group][samplers[group].sample(rng)]
                size = rng.randrange(*BYTES_RANGE)
                records.append(
                    LogRecord(client, "u" + client[1:], stamp, video, 200, size)
                )
                stamp += rng.randint(1, MAX_STEP_SECONDS)
    records.sort(key=lambda record: record.timestamp)
    return records, truth


def popularity_histogram(records: Iterable[LogRecord]) -> Counter[str]:
    """Request count per video id."""
    return Counter(record.video_id for record in records)


def format_log_record(record: LogRecord) -> str:
    return (
        f"{record.client_id} {record.user_id} {record.timestamp} "
        f"{record.video_id} {record.status_code} {record.bytes_sent}"
    )


def render_trace_log(records: Iterable[LogRecord]) -> str:
    lines = [LOG_HEADER]
    lines.extend(format_log_record(record) for record in records)
    return "\n".join(lines) + "\n"


def write_trace_log(records, path) -> None:
    atomic_write(path, render_trace_log(records))


def render_ground_truth(truth: GroundTruth) -> str:
    lines = [GROUND_TRUTH_HEADER]
    for client in sorted(truth.group_of):
        lines.append(f"{client},{truth.group_of[client]}")
    return "\n".join(lines) + "\n"


def write_ground_truth(truth: GroundTruth, path) -> None:
    atomic_write(path, render_ground_truth(truth))
