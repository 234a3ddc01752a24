"""Event-log ingestion: TSV parsing, reaction joining, per-user profiles.

Canonical inputs are headerless UTF-8 TSV files with LF line endings;
'#'-prefixed lines are comments and blank lines are skipped:

    posts.tsv      network <tab> author <tab> post_id <tab> epoch_seconds
    reactions.tsv  network <tab> post_id <tab> reactor <tab> epoch_seconds
    edges.tsv      network <tab> src <tab> dst     (dst is in src's audience)
    users.tsv      user <tab> tz_offset_minutes <tab> city <tab> network

The reactor column may hold "-" when the source data does not identify who
reacted; such rows support delay estimation and analysis but not schedule
derivation. Malformed lines are counted, never silently dropped.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .delays import DelayPair
from .errors import IngestError
from .temporal import (
    ActionProfile,
    KIND_CREATED,
    KIND_REACTIONS,
    MAX_TZ_OFFSET_MIN,
    TimeWindow,
    WeeklyGrid,
    aggregate_profile,
)

NETWORKS = ("TW", "FB", "FP", "GP")

#: Networks whose relationship is mutual, so the edge file must be symmetric.
BIDIRECTIONAL_NETWORKS = ("FB",)

MISSING_ID = "-"

DEFAULT_MAX_MALFORMED_FRAC = 0.01


@dataclass(frozen=True)
class PostRecord:
    network: str
    author: str
    post_id: str
    created_at: int


@dataclass(frozen=True)
class ReactionRecord:
    network: str
    post_id: str
    reactor: str
    reacted_at: int


@dataclass(frozen=True)
class UserMeta:
    user: str
    tz_offset_min: int
    city: str | None
    network: str

    def __post_init__(self) -> None:
        if not -MAX_TZ_OFFSET_MIN <= self.tz_offset_min <= MAX_TZ_OFFSET_MIN:
            raise ValueError(f"tz offset {self.tz_offset_min} out of range")


@dataclass(frozen=True)
class LoadReport:
    path: str
    parsed: int
    malformed: int
    skipped_network: int = 0


class SocialGraph:
    """Audience and followed-set adjacency.

    ``audience(u)`` is the set of users who can react to u's posts;
    ``followed(u)`` the set whose posts u can react to. The two mappings are
    transposes of each other by construction.
    """

    __slots__ = ("_out", "_in", "_n_edges")

    def __init__(self, edges: Iterable[tuple[str, str]]):
        out: dict[str, set[str]] = defaultdict(set)
        inn: dict[str, set[str]] = defaultdict(set)
        n = 0
        for src, dst in edges:
            if dst not in out[src]:
                out[src].add(dst)
                inn[dst].add(src)
                n += 1
        self._out = {u: frozenset(v) for u, v in out.items()}
        self._in = {u: frozenset(v) for u, v in inn.items()}
        self._n_edges = n

    def audience(self, user: str) -> frozenset[str]:
        return self._out.get(user, frozenset())

    def followed(self, user: str) -> frozenset[str]:
        return self._in.get(user, frozenset())

    @property
    def out_edges(self) -> Mapping[str, frozenset[str]]:
        return self._out

    @property
    def in_edges(self) -> Mapping[str, frozenset[str]]:
        return self._in

    @property
    def users(self) -> frozenset[str]:
        return frozenset(self._out) | frozenset(self._in)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def transposed(self) -> "SocialGraph":
        g = SocialGraph(())
        g._out, g._in, g._n_edges = self._in, self._out, self._n_edges
        return g

    def is_symmetric(self) -> bool:
        return self._out == self._in


def _load_tsv(path, n_fields: int, parse_row, network: str | None,
              network_field: int, max_malformed_frac: float):
    records = []
    malformed = 0
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                malformed += 1
                continue
            if fields[network_field] not in NETWORKS:
                malformed += 1
                continue
            if network is not None and fields[network_field] != network:
                skipped += 1
                continue
            try:
                records.append(parse_row(fields))
            except ValueError:
                malformed += 1
    total = len(records) + malformed
    if total and malformed / total > max_malformed_frac:
        raise IngestError(
            f"{path}: {malformed} of {total} lines malformed, above the "
            f"{max_malformed_frac:.2%} limit"
        )
    return records, LoadReport(str(path), len(records), malformed, skipped)


def load_posts(path, network: str | None = None,
               max_malformed_frac: float = DEFAULT_MAX_MALFORMED_FRAC):
    def row(f):
        return PostRecord(f[0], f[1], f[2], int(f[3]))
    return _load_tsv(path, 4, row, network, 0, max_malformed_frac)


def load_reactions(path, network: str | None = None,
                   max_malformed_frac: float = DEFAULT_MAX_MALFORMED_FRAC):
    def row(f):
        return ReactionRecord(f[0], f[1], f[2], int(f[3]))
    return _load_tsv(path, 4, row, network, 0, max_malformed_frac)


def load_users(path, network: str | None = None,
               max_malformed_frac: float = DEFAULT_MAX_MALFORMED_FRAC):
    def row(f):
        city = f[2] if f[2] and f[2] != MISSING_ID else None
        return UserMeta(f[0], int(f[1]), city, f[3])
    return _load_tsv(path, 4, row, network, 3, max_malformed_frac)


def load_graph(path, network: str | None = None, bidirectional: bool = False,
               max_malformed_frac: float = DEFAULT_MAX_MALFORMED_FRAC):
    """Load edges.tsv into a :class:`SocialGraph`.

    With ``bidirectional=True`` (e.g. mutual-friend networks) the loader
    verifies that every edge is listed in both directions.
    """
    def row(f):
        return (f[1], f[2])
    edges, report = _load_tsv(path, 3, row, network, 0, max_malformed_frac)
    graph = SocialGraph(edges)
    if bidirectional and not graph.is_symmetric():
        raise IngestError(f"{path}: bidirectional network with asymmetric edges")
    return graph, report


@dataclass(frozen=True)
class JoinResult:
    pairs: list[DelayPair]
    n_dangling: int
    n_negative_delay: int

    @property
    def n_joined(self) -> int:
        return len(self.pairs)


def join_reactions(posts: list[PostRecord],
                   reactions: list[ReactionRecord]) -> JoinResult:
    """Join reactions to their posts, producing delay pairs.

    One pair per reaction whose post_id resolves and whose delay is >= 0.
    Dangling references and negative delays (clock skew, perturbation
    artifacts) are dropped and counted separately, so that
    ``n_joined + n_dangling + n_negative_delay == len(reactions)``.
    """
    networks = {p.network for p in posts} | {r.network for r in reactions}
    if len(networks) > 1:
        raise IngestError(f"join requires a single network, got {sorted(networks)}")
    index: dict[str, PostRecord] = {}
    for p in posts:
        if p.post_id in index:
            raise IngestError(f"duplicate post_id {p.post_id!r}")
        index[p.post_id] = p
    pairs: list[DelayPair] = []
    dangling = 0
    negative = 0
    for r in reactions:
        post = index.get(r.post_id)
        if post is None:
            dangling += 1
        elif r.reacted_at < post.created_at:
            negative += 1
        else:
            pairs.append(DelayPair(post.author, r.reactor,
                                   post.created_at, r.reacted_at))
    return JoinResult(pairs, dangling, negative)


@dataclass(frozen=True)
class UserProfiles:
    """Per-user created-post and self-reaction profiles over one window."""

    created: dict[str, ActionProfile]
    reactions: dict[str, ActionProfile]
    unknown_tz: frozenset[str]  # users bucketized at UTC for lack of metadata


def build_profiles(posts: list[PostRecord], pairs: list[DelayPair],
                   users: list[UserMeta], grid: WeeklyGrid,
                   window: TimeWindow) -> UserProfiles:
    """Aggregate in-window events into per-user weekly profiles.

    Created-post profiles count a user's authored posts; self-reaction
    profiles count the reactions the user performed (as reactor), at the
    reaction's own timestamp. Users without events get zero profiles;
    users with events but no timezone metadata default to UTC and are
    flagged in ``unknown_tz``.
    """
    tz = {u.user: u.tz_offset_min for u in users}
    post_times: dict[str, list[int]] = defaultdict(list)
    for p in posts:
        if window.contains(p.created_at):
            post_times[p.author].append(p.created_at)
    react_times: dict[str, list[int]] = defaultdict(list)
    for pr in pairs:
        if pr.reactor != MISSING_ID and window.contains(pr.reaction_time):
            react_times[pr.reactor].append(pr.reaction_time)

    everyone = set(tz) | set(post_times) | set(react_times)
    created = {}
    reactions = {}
    for u in everyone:
        off = tz.get(u, 0)
        created[u] = aggregate_profile(post_times.get(u, ()), off, grid, KIND_CREATED)
        reactions[u] = aggregate_profile(react_times.get(u, ()), off, grid, KIND_REACTIONS)
    unknown = frozenset((set(post_times) | set(react_times)) - set(tz))
    return UserProfiles(created, reactions, unknown)


@dataclass(frozen=True)
class ColumnMap:
    """0-based column indices of a foreign dataset layout; None = absent.

    The published event datasets in this domain ship anonymized ids and
    timestamps but no fixed byte-level schema, so the adapter is driven by
    an explicit mapping instead of guessing.
    """

    post_id: int = 0
    author: int | None = 1
    created_at: int = 2
    reaction_post_id: int = 0
    reacted_at: int = 1
    reactor: int | None = None


@dataclass(frozen=True)
class AdapterReport:
    posts_written: int
    reactions_written: int
    skipped: int
    analysis_only: bool  # True when reactor ids are absent from the source


def adapt_open_dataset(posts_in, reactions_in, posts_out, reactions_out,
                       network: str, colmap: ColumnMap = ColumnMap()) -> AdapterReport:
    """Rewrite a foreign post/reaction dump into the canonical TSV format.

    Rows that cannot be mapped are skipped and counted. When the source has
    no reactor column the canonical rows carry "-" and the result is marked
    analysis-only: delay estimation and cohort analysis work, schedule
    derivation does not.
    """
    if network not in NETWORKS:
        raise ValueError(f"unknown network {network!r}")
    skipped = 0

    def rows(path, needed):
        nonlocal skipped
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                f = line.split("\t")
                if len(f) <= needed:
                    skipped += 1
                    continue
                yield f

    n_posts = 0
    max_post_col = max(colmap.post_id, colmap.created_at,
                       colmap.author if colmap.author is not None else 0)
    with open(posts_out, "w", encoding="utf-8") as out:
        for f in rows(posts_in, max_post_col):
            author = f[colmap.author] if colmap.author is not None else MISSING_ID
            try:
                ts = int(f[colmap.created_at])
            except ValueError:
                skipped += 1
                continue
            out.write(f"{network}\t{author}\t{f[colmap.post_id]}\t{ts}\n")
            n_posts += 1

    n_reactions = 0
    max_react_col = max(colmap.reaction_post_id, colmap.reacted_at,
                        colmap.reactor if colmap.reactor is not None else 0)
    with open(reactions_out, "w", encoding="utf-8") as out:
        for f in rows(reactions_in, max_react_col):
            reactor = f[colmap.reactor] if colmap.reactor is not None else MISSING_ID
            try:
                ts = int(f[colmap.reacted_at])
            except ValueError:
                skipped += 1
                continue
            out.write(f"{network}\t{f[colmap.reaction_post_id]}\t{reactor}\t{ts}\n")
            n_reactions += 1

    return AdapterReport(n_posts, n_reactions, skipped,
                         analysis_only=colmap.reactor is None or colmap.author is None)
