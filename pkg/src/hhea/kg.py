"""Knowledge graph containers, TSV ingestion, and anchor handling.

Fact files are tab-separated UTF-8 text, one fact per line:

    head<TAB>relation<TAB>tail                          (non-temporal)
    head<TAB>relation<TAB>tail<TAB>time                 (single month)
    head<TAB>relation<TAB>tail<TAB>begin<TAB>end        (month interval)

Lines starting with ``#`` are comments.  Months are ``YYYY-MM`` strings mapped
onto a configurable calendar (default 1995-2021, 324 months).  Entity and
relation IDs are assigned densely in first-appearance order, so loading is
deterministic and serialisation round-trips exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CalendarConfig",
    "TimeSpan",
    "Fact",
    "KnowledgeGraph",
    "AnchorSet",
    "FactFileError",
    "AnchorFileError",
    "load_kg",
    "save_kg",
    "load_anchors",
    "split_anchors",
    "time_index",
    "month_string",
    "entity_time_vector",
    "entity_time_vectors",
    "round_half_up",
]

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")

# Sentinel used in the internal time arrays of non-temporal graphs.
_NO_TIME = -1


class FactFileError(ValueError):
    """Raised for malformed fact files; message carries path and line number."""


class AnchorFileError(ValueError):
    """Raised for malformed or unresolvable anchor files."""


@dataclass(frozen=True)
class CalendarConfig:
    """Month calendar: ``base_year``-01 is index 0, ``n_months`` indexes total."""

    base_year: int = 1995
    n_months: int = 324

    def __post_init__(self):
        if self.base_year < 0 or self.n_months < 1:
            raise ValueError("calendar requires base_year >= 0 and n_months >= 1")


def time_index(date: str, calendar: CalendarConfig) -> int:
    """Map a ``YYYY-MM`` string to its month index on the calendar."""
    m = _MONTH_RE.match(date)
    if m is None:
        raise ValueError(f"invalid month string {date!r} (expected YYYY-MM)")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range in {date!r}")
    idx = (year - calendar.base_year) * 12 + (month - 1)
    if not 0 <= idx < calendar.n_months:
        raise ValueError(
            f"{date!r} outside calendar ({calendar.base_year}-01 .. "
            f"{calendar.n_months} months)"
        )
    return idx


def month_string(index: int, calendar: CalendarConfig) -> str:
    """Inverse of :func:`time_index`."""
    if not 0 <= index < calendar.n_months:
        raise ValueError(f"month index {index} outside calendar")
    year, month = divmod(index, 12)
    return f"{calendar.base_year + year:04d}-{month + 1:02d}"


@dataclass(frozen=True)
class TimeSpan:
    """Closed month interval ``[begin, end]``; single timestamps have begin == end."""

    begin: int
    end: int

    def __post_init__(self):
        if self.begin < 0 or self.end < self.begin:
            raise ValueError(f"invalid time span [{self.begin}, {self.end}]")


@dataclass(frozen=True)
class Fact:
    head: int
    relation: int
    tail: int
    time: TimeSpan | None = None


class KnowledgeGraph:
    """Immutable multigraph over dense entity and relation IDs.

    Facts are stored as parallel numpy arrays plus a CSR adjacency index in
    which every fact contributes one entry to its head's list (direction +1)
    and one to its tail's list (direction -1).  Instances are safe for
    concurrent read access.
    """

    def __init__(
        self,
        entity_names: list[str],
        relation_names: list[str],
        facts: list[Fact],
        temporal: bool,
        calendar: CalendarConfig | None = None,
    ):
        self.entity_names = list(entity_names)
        self.relation_names = list(relation_names)
        self.temporal = bool(temporal)
        self.calendar = calendar if calendar is not None else CalendarConfig()

        n_ent, n_rel = len(self.entity_names), len(self.relation_names)
        self._ent_ids = {name: i for i, name in enumerate(self.entity_names)}
        self._rel_ids = {name: i for i, name in enumerate(self.relation_names)}
        if len(self._ent_ids) != n_ent:
            raise ValueError("duplicate entity names")
        if len(self._rel_ids) != n_rel:
            raise ValueError("duplicate relation names")

        n = len(facts)
        self.heads = np.empty(n, dtype=np.int64)
        self.rels = np.empty(n, dtype=np.int64)
        self.tails = np.empty(n, dtype=np.int64)
        self.time_begin = np.full(n, _NO_TIME, dtype=np.int64)
        self.time_end = np.full(n, _NO_TIME, dtype=np.int64)
        for i, f in enumerate(facts):
            if not (0 <= f.head < n_ent and 0 <= f.tail < n_ent):
                raise ValueError(f"fact {i}: entity ID out of range")
            if not 0 <= f.relation < n_rel:
                raise ValueError(f"fact {i}: relation ID out of range")
            if self.temporal:
                if f.time is None:
                    raise ValueError(f"fact {i}: temporal graph requires a time span")
                if f.time.end >= self.calendar.n_months:
                    raise ValueError(f"fact {i}: time span outside calendar")
                self.time_begin[i] = f.time.begin
                self.time_end[i] = f.time.end
            elif f.time is not None:
                raise ValueError(f"fact {i}: non-temporal graph carries a time span")
            self.heads[i] = f.head
            self.rels[i] = f.relation
            self.tails[i] = f.tail

        self._build_adjacency()

    def _build_adjacency(self):
        n_ent, n_facts = self.n_entities, self.n_facts
        src = np.concatenate([self.heads, self.tails])
        other = np.concatenate([self.tails, self.heads])
        rels = np.concatenate([self.rels, self.rels])
        dirs = np.concatenate(
            [np.ones(n_facts, dtype=np.int8), -np.ones(n_facts, dtype=np.int8)]
        )
        begins = np.concatenate([self.time_begin, self.time_begin])
        ends = np.concatenate([self.time_end, self.time_end])

        # Stable sort keeps fact order within each entity's list (head entries
        # first, then tail entries).
        order = np.argsort(src, kind="stable")
        counts = np.bincount(src, minlength=n_ent)
        self.adj_indptr = np.zeros(n_ent + 1, dtype=np.int64)
        np.cumsum(counts, out=self.adj_indptr[1:])
        self.adj_neighbor = other[order]
        self.adj_relation = rels[order]
        self.adj_direction = dirs[order]
        self.adj_time_begin = begins[order]
        self.adj_time_end = ends[order]

    # -- basic accessors ---------------------------------------------------

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations(self) -> int:
        return len(self.relation_names)

    @property
    def n_facts(self) -> int:
        return len(self.heads)

    def entity_id(self, name: str) -> int:
        try:
            return self._ent_ids[name]
        except KeyError:
            raise KeyError(f"unknown entity {name!r}") from None

    def relation_id(self, name: str) -> int:
        try:
            return self._rel_ids[name]
        except KeyError:
            raise KeyError(f"unknown relation {name!r}") from None

    def facts(self) -> list[Fact]:
        out = []
        for i in range(self.n_facts):
            time = None
            if self.temporal:
                time = TimeSpan(int(self.time_begin[i]), int(self.time_end[i]))
            out.append(Fact(int(self.heads[i]), int(self.rels[i]), int(self.tails[i]), time))
        return out

    def degrees(self) -> np.ndarray:
        """Fact incidences per entity (a self-loop counts twice)."""
        return np.diff(self.adj_indptr)

    def degree(self, entity: int) -> int:
        return int(self.adj_indptr[entity + 1] - self.adj_indptr[entity])

    def neighbors(self, entity: int) -> np.ndarray:
        """Neighbor IDs of one entity, multiset order following fact order."""
        return self.adj_neighbor[self.adj_indptr[entity] : self.adj_indptr[entity + 1]]

    def adjacency(self, entity: int) -> list[tuple[int, int, int, TimeSpan | None]]:
        """(neighbor, relation, direction, time span) entries for one entity."""
        lo, hi = self.adj_indptr[entity], self.adj_indptr[entity + 1]
        out = []
        for p in range(lo, hi):
            time = None
            if self.temporal:
                time = TimeSpan(int(self.adj_time_begin[p]), int(self.adj_time_end[p]))
            out.append(
                (
                    int(self.adj_neighbor[p]),
                    int(self.adj_relation[p]),
                    int(self.adj_direction[p]),
                    time,
                )
            )
        return out


def _split_line(raw: str) -> list[str]:
    # Trim the line terminator only; entity names keep interior whitespace.
    return raw.rstrip("\n").rstrip("\r").split("\t")


def load_kg(
    facts_path: str,
    temporal: bool,
    calendar: CalendarConfig | None = None,
) -> KnowledgeGraph:
    """Load a fact TSV into an indexed :class:`KnowledgeGraph`.

    IDs follow first appearance (head before tail, line by line).  Malformed
    lines, bad time strings, and out-of-calendar months raise
    :class:`FactFileError` with the offending line number.
    """
    calendar = calendar if calendar is not None else CalendarConfig()
    ent_ids: dict[str, int] = {}
    rel_ids: dict[str, int] = {}
    entity_names: list[str] = []
    relation_names: list[str] = []
    facts: list[Fact] = []

    def intern(name: str, table: dict[str, int], names: list[str]) -> int:
        eid = table.get(name)
        if eid is None:
            eid = len(names)
            table[name] = eid
            names.append(name)
        return eid

    with open(facts_path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.startswith("#"):
                continue
            fields = _split_line(raw)
            try:
                if temporal:
                    if len(fields) not in (4, 5):
                        raise ValueError(
                            f"expected 4 or 5 tab-separated fields, got {len(fields)}"
                        )
                else:
                    if len(fields) != 3:
                        raise ValueError(
                            f"expected 3 tab-separated fields, got {len(fields)}"
                        )
                head_name, rel_name, tail_name = fields[0], fields[1], fields[2]
                if not head_name or not rel_name or not tail_name:
                    raise ValueError("empty field")
                time = None
                if temporal:
                    begin = time_index(fields[3], calendar)
                    end = begin if len(fields) == 4 else time_index(fields[4], calendar)
                    if end < begin:
                        raise ValueError(
                            f"time interval ends before it begins "
                            f"({fields[3]} .. {fields[4]})"
                        )
                    time = TimeSpan(begin, end)
            except ValueError as exc:
                raise FactFileError(f"{facts_path}:{lineno}: {exc}") from None
            head = intern(head_name, ent_ids, entity_names)
            rel = intern(rel_name, rel_ids, relation_names)
            tail = intern(tail_name, ent_ids, entity_names)
            facts.append(Fact(head, rel, tail, time))

    if not facts:
        raise FactFileError(f"{facts_path}: no facts")
    return KnowledgeGraph(entity_names, relation_names, facts, temporal, calendar)


def save_kg(kg: KnowledgeGraph, path: str) -> None:
    """Write the graph back to fact TSV; reloading reproduces identical IDs."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for i in range(kg.n_facts):
            row = [
                kg.entity_names[kg.heads[i]],
                kg.relation_names[kg.rels[i]],
                kg.entity_names[kg.tails[i]],
            ]
            if kg.temporal:
                begin, end = int(kg.time_begin[i]), int(kg.time_end[i])
                row.append(month_string(begin, kg.calendar))
                if end != begin:
                    row.append(month_string(end, kg.calendar))
            fh.write("\t".join(row) + "\n")


@dataclass
class AnchorSet:
    """Ordered alignment pairs (KG1 entity ID, KG2 entity ID), duplicates banned."""

    pairs: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate anchor pair")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.pairs:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        arr = np.asarray(self.pairs, dtype=np.int64)
        return arr[:, 0], arr[:, 1]

    def side(self, side: int) -> np.ndarray:
        if side not in (1, 2):
            raise ValueError("side must be 1 or 2")
        return self.arrays()[side - 1]


def load_anchors(path: str, kg1: KnowledgeGraph, kg2: KnowledgeGraph) -> AnchorSet:
    """Load ``name1<TAB>name2`` alignment pairs, resolving names against both graphs."""
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.startswith("#"):
                continue
            fields = _split_line(raw)
            if len(fields) != 2:
                raise AnchorFileError(
                    f"{path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}"
                )
            name1, name2 = fields
            try:
                e1 = kg1.entity_id(name1)
            except KeyError:
                raise AnchorFileError(
                    f"{path}:{lineno}: unknown KG1 entity {name1!r}"
                ) from None
            try:
                e2 = kg2.entity_id(name2)
            except KeyError:
                raise AnchorFileError(
                    f"{path}:{lineno}: unknown KG2 entity {name2!r}"
                ) from None
            if (e1, e2) in seen:
                raise AnchorFileError(f"{path}:{lineno}: duplicate pair {name1!r}, {name2!r}")
            seen.add((e1, e2))
            pairs.append((e1, e2))
    return AnchorSet(pairs)


def round_half_up(x: float) -> int:
    """round() with ties away from zero, for non-negative counts."""
    return int(np.floor(x + 0.5))


def split_anchors(
    anchors: AnchorSet, train_fraction: float, seed: int
) -> tuple[AnchorSet, AnchorSet]:
    """Deterministic seeded train/test partition; both parts keep file order."""
    n = len(anchors)
    if n == 0:
        raise ValueError("cannot split an empty anchor set")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = round_half_up(train_fraction * n)
    if n_train == 0 or n_train == n:
        raise ValueError(
            f"train_fraction {train_fraction} yields an empty train or test split"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return (
        AnchorSet([anchors.pairs[i] for i in train_idx]),
        AnchorSet([anchors.pairs[i] for i in test_idx]),
    )


def entity_time_vector(kg: KnowledgeGraph, entity: int) -> np.ndarray:
    """Binary month-occurrence vector: 1 where any incident fact's span covers the month."""
    if not kg.temporal:
        raise ValueError("entity_time_vector requires a temporal graph")
    vec = np.zeros(kg.calendar.n_months, dtype=np.int8)
    lo, hi = kg.adj_indptr[entity], kg.adj_indptr[entity + 1]
    for p in range(lo, hi):
        vec[kg.adj_time_begin[p] : kg.adj_time_end[p] + 1] = 1
    return vec


def entity_time_vectors(kg: KnowledgeGraph) -> np.ndarray:
    """All entities' binary month-occurrence vectors as an (N, n_months) matrix."""
    if not kg.temporal:
        raise ValueError("entity_time_vectors requires a temporal graph")
    mat = np.zeros((kg.n_entities, kg.calendar.n_months), dtype=np.int8)
    single = kg.time_begin == kg.time_end
    if single.any():
        mat[kg.heads[single], kg.time_begin[single]] = 1
        mat[kg.tails[single], kg.time_begin[single]] = 1
    for i in np.flatnonzero(~single):
        span = slice(kg.time_begin[i], kg.time_end[i] + 1)
        mat[kg.heads[i], span] = 1
        mat[kg.tails[i], span] = 1
    return mat
