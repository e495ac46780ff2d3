"""Binary adaptive-resonance (ART1) clustering engine.

Patterns reach clusters through real-valued bottom-up weights, the best
match must pass a vigilance test on binary similarity, and an accepted
pattern is folded into the winning prototype by bitwise AND (fast
learning). Clusters are created on demand up to a fixed cap.

Everything is plain Python floats and ints on purpose: matching values
are sums of exact dyadic-free fractions and the winner rule breaks ties
by index, so the summation order is part of the contract. Weights are
accumulated in ascending index order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .fileio import atomic_write

# Defaults of a cluster slot that has never learned anything.
UNCOMMITTED_TOP_DOWN = 1


class CapacityError(RuntimeError):
    """Every allowed cluster exists and none passed vigilance."""

    def __init__(self, best_cluster: int, best_similarity: float) -> None:
        super().__init__(
            "no free cluster and none passed vigilance "
            f"(best: cluster {best_cluster}, similarity {best_similarity:.6f})"
        )
        self.best_cluster = best_cluster
        self.best_similarity = best_similarity


@dataclass(frozen=True)
class Art1Config:
    input_dim: int
    vigilance: float
    max_clusters: int
    max_epochs: int = 10

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if not 0.0 <= self.vigilance <= 1.0:
            raise ValueError(f"vigilance must be in [0, 1], got {self.vigilance}")
        if self.max_clusters < 1:
            raise ValueError(f"max_clusters must be >= 1, got {self.max_clusters}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")


class Art1Network:
    """Mutable clustering state: one prototype row and one weight row per cluster."""

    def __init__(self, config: Art1Config) -> None:
        self.config = config
        self.top_down: list[list[int]] = []  # binary prototypes
        self.bottom_up: list[list[float]] = []  # real matching weights

    @property
    def active_clusters(self) -> int:
        return len(self.top_down)

    @property
    def uncommitted_bottom_up(self) -> float:
        """Bottom-up weight of a never-committed slot: 1 / (1 + input_dim)."""
        return 1.0 / (1.0 + self.config.input_dim)


@dataclass(frozen=True)
class Assignment:
    """Final pattern-to-cluster mapping with per-pattern vigilance rejections.

    `clusters[k]` is the cluster of pattern k after the last epoch and
    `rejections[k]` lists the clusters that won the match but failed the
    vigilance test for pattern k during that epoch, in rejection order.
    """

    clusters: tuple[int, ...]
    rejections: tuple[tuple[int, ...], ...]
    converged: bool
    epochs: int


@dataclass(frozen=True)
class ClusterReport:
    cluster_index: int
    client_ids: tuple[str, ...]
    prototype: tuple[int, ...]
    member_count: int


def init_network(config: Art1Config) -> Art1Network:
    """Fresh network with no committed clusters."""
    return Art1Network(config)


def _require_dim(net: Art1Network, pattern: Sequence[int]) -> None:
    if len(pattern) != net.config.input_dim:
        raise ValueError(
            f"pattern length {len(pattern)} does not match input_dim {net.config.input_dim}"
        )


def _set_bits(pattern: Sequence[int]) -> list[int]:
    ones = []
    for i, value in enumerate(pattern):
        if value == 1:
            ones.append(i)
        elif value != 0:
            raise ValueError(f"pattern element {i} is {value!r}, expected 0 or 1")
    return ones


def match_values(net: Art1Network, pattern: Sequence[int]) -> list[float]:
    """Matching value of the pattern against every active cluster.

    The value for cluster j is the dot product of the pattern with the
    cluster's bottom-up weights, summed in ascending index order.
    """
    _require_dim(net, pattern)
    ones = _set_bits(pattern)
    values = []
    for row in net.bottom_up:
        total = 0.0
        for i in ones:
            total += row[i]
        values.append(total)
    return values


def select_winner(values: Sequence[float], excluded: Iterable[int] = ()) -> int | None:
    """Index of the largest value outside `excluded`; ties go to the lowest index."""
    banned = set(excluded)
    winner = None
    best = 0.0
    for j, value in enumerate(values):
        if j in banned:
            continue
        if winner is None or value > best:
            winner, best = j, value
    return winner


def similarity(pattern: Sequence[int], prototype: Sequence[int]) -> float:
    """Fraction of the pattern's set bits that are also set in the prototype."""
    if len(pattern) != len(prototype):
        raise ValueError(
            f"pattern length {len(pattern)} does not match prototype length {len(prototype)}"
        )
    set_bits = 0
    common = 0
    for x, t in zip(pattern, prototype):
        if x:
            set_bits += 1
            if t:
                common += 1
    if set_bits == 0:
        raise ValueError("similarity is undefined for an all-zero pattern")
    return common / set_bits


def _commit(net: Art1Network, cluster: int, pattern: Sequence[int]) -> None:
    # Fast learning: prototype shrinks to its AND with the pattern and the
    # bottom-up row is rescaled to new_prototype / (0.5 + |new_prototype|).
    proto = net.top_down[cluster]
    new_proto = [t if x else 0 for t, x in zip(proto, pattern)]
    scale = 1.0 / (0.5 + sum(new_proto))
    net.top_down[cluster] = new_proto
    net.bottom_up[cluster] = [scale if t else 0.0 for t in new_proto]


def _create(net: Art1Network, pattern: Sequence[int]) -> int:
    proto = [1 if x else 0 for x in pattern]
    scale = 1.0 / (0.5 + sum(proto))
    net.top_down.append(proto)
    net.bottom_up.append([scale if t else 0.0 for t in proto])
    return net.active_clusters - 1


def _present(
    net: Art1Network, pattern: Sequence[int], force_assign: bool
) -> tuple[int, list[int]]:
    _require_dim(net, pattern)
    ones = _set_bits(pattern)
    if not ones:
        raise ValueError("cannot present an all-zero pattern")
    values = match_values(net, pattern)
    rejected: list[int] = []
    tested: list[tuple[float, int]] = []
    while True:
        winner = select_winner(values, rejected)
        if winner is None:
            if net.active_clusters < net.config.max_clusters:
                return _create(net, pattern), rejected
            best_similarity = max(v for v, _ in tested)
            best_cluster = min(j for v, j in tested if v == best_similarity)
            if force_assign:
                _commit(net, best_cluster, pattern)
                return best_cluster, rejected
            raise CapacityError(best_cluster, best_similarity)
        value = similarity(pattern, net.top_down[winner])
        if value >= net.config.vigilance:
            _commit(net, winner, pattern)
            return winner, rejected
        rejected.append(winner)
        tested.append((value, winner))


def present_pattern(
    net: Art1Network, pattern: Sequence[int], *, force_assign: bool = False
) -> int:
    """Assign one pattern and return its cluster index.

    The best-matching cluster is tried first; a vigilance failure disables
    it for this presentation and the search repeats on the rest. When no
    candidate is left, a new cluster is created from the pattern if the cap
    allows, otherwise CapacityError reports the closest rejected cluster.
    With force_assign=True the closest rejected cluster learns the pattern
    instead of raising.
    """
    index, _ = _present(net, pattern, force_assign)
    return index


def train(
    net: Art1Network,
    patterns: Sequence[Sequence[int]],
    *,
    force_assign: bool = False,
) -> Assignment:
    """Present every pattern repeatedly until assignments stabilise.

    Full passes run until two consecutive epochs produce identical
    assignments or config.max_epochs is reached; max_epochs=1 gives a
    plain single pass. `converged` reports which way the loop ended.
    """
    dim = net.config.input_dim
    for k, pattern in enumerate(patterns):
        if len(pattern) != dim:
            raise ValueError(f"pattern {k} has length {len(pattern)}, expected {dim}")
        if not _set_bits(pattern):
            raise ValueError(f"pattern {k} is all zeros")
    if not patterns:
        return Assignment((), (), True, 0)
    previous: list[int] | None = None
    clusters: list[int] = []
    rejections: list[tuple[int, ...]] = []
    epochs = 0
    converged = False
    for _ in range(net.config.max_epochs):
        epochs += 1
        clusters = []
        rejections = []
        for pattern in patterns:
            index, rejected = _present(net, pattern, force_assign)
            clusters.append(index)
            rejections.append(tuple(rejected))
        if previous is not None and clusters == previous:
            converged = True
            break
        previous = list(clusters)
    return Assignment(tuple(clusters), tuple(rejections), converged, epochs)


def report_clusters(
    net: Art1Network, assignment: Assignment, client_ids: Sequence[str]
) -> list[ClusterReport]:
    """One report per non-empty cluster; members deduped in first-seen order."""
    if len(client_ids) != len(assignment.clusters):
        raise ValueError(
            f"{len(client_ids)} client ids for {len(assignment.clusters)} assignments"
        )
    members: dict[int, list[str]] = {}
    for client, cluster in zip(client_ids, assignment.clusters):
        bucket = members.setdefault(cluster, [])
        if client not in bucket:
            bucket.append(client)
    reports = []
    for cluster in sorted(members):
        ids = tuple(members[cluster])
        reports.append(
            ClusterReport(cluster, ids, tuple(net.top_down[cluster]), len(ids))
        )
    return reports


def render_snapshot(net: Art1Network) -> str:
    """Plain-text dump of a network.

    Line 1 holds `input_dim max_clusters vigilance active_clusters`; each
    cluster then contributes one line of input_dim prototype digits and one
    line of input_dim weights. Floats use 17 significant digits, enough to
    reload every double bit for bit.
    """
    cfg = net.config
    lines = [f"{cfg.input_dim} {cfg.max_clusters} {cfg.vigilance:.17g} {net.active_clusters}"]
    for proto, weights in zip(net.top_down, net.bottom_up):
        lines.append("".join("1" if bit else "0" for bit in proto))
        lines.append(" ".join(f"{w:.17g}" for w in weights))
    return "\n".join(lines) + "\n"


def save_snapshot(net: Art1Network, path) -> None:
    atomic_write(path, render_snapshot(net))


def load_snapshot(path) -> Art1Network:
    """Inverse of save_snapshot; a loaded network re-saves byte-identically."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise ValueError("empty snapshot file")
    header = lines[0].split()
    if len(header) != 4:
        raise ValueError(f"malformed snapshot header: {lines[0]!r}")
    try:
        dim, cap = int(header[0]), int(header[1])
        vigilance = float(header[2])
        active = int(header[3])
    except ValueError:
        raise ValueError(f"malformed snapshot header: {lines[0]!r}") from None
    config = Art1Config(input_dim=dim, vigilance=vigilance, max_clusters=cap)
    if not 0 <= active <= cap:
        raise ValueError(f"active cluster count {active} outside [0, {cap}]")
    if len(lines) != 1 + 2 * active:
        raise ValueError(f"expected {1 + 2 * active} lines, found {len(lines)}")
    net = Art1Network(config)
    for c in range(active):
        proto_line = lines[1 + 2 * c]
        weight_line = lines[2 + 2 * c]
        if len(proto_line) != dim or any(ch not in "01" for ch in proto_line):
            raise ValueError(f"bad prototype row for cluster {c}: {proto_line!r}")
        weights = [float(token) for token in weight_line.split()]
        if len(weights) != dim:
            raise ValueError(f"bad weight row for cluster {c}: expected {dim} values")
        if any(w < 0.0 or w > 1.0 for w in weights):
            raise ValueError(f"weight outside [0, 1] in cluster {c}")
        net.top_down.append([1 if ch == "1" else 0 for ch in proto_line])
        net.bottom_up.append(weights)
    return net
