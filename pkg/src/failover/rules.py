"""Forwarding rule model shared by the protection, baseline, and simulator code.

A :class:`ForwardingMatrix` holds per-node rule tables keyed by a
:class:`Match` (failure label + destination, optionally source and incoming
link for the disjoint-path baselines) mapping to an action.  Fast-failover
behavior is expressed through group entries: an ordered bucket list where the
first bucket whose watched link is live wins.

Label semantics:

* ``PRIMARY``: packet on its default shortest path.
* ``LinkFail(u, v)``: link between ``u`` and ``v`` observed down, detected
  at ``u`` (``v`` is the far endpoint the detour plans around).
* ``NodeFail(v)``: node ``v`` presumed down.
* ``AnyLinkFailTo(v)``: match-only wildcard covering ``NodeFail(v)`` and
  ``LinkFail(x, v)`` for every ``x``; packets never carry it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Union

from .topology import Link, Topology

__all__ = [
    "FailureLabel",
    "PRIMARY",
    "link_fail",
    "node_fail",
    "any_link_fail_to",
    "Match",
    "Output",
    "PushLabelOutput",
    "PopLabelOutput",
    "RewriteLabelOutput",
    "GroupRef",
    "Drop",
    "Action",
    "Bucket",
    "GroupEntry",
    "UncoveredEntry",
    "ForwardingMatrix",
    "MODE_SHORTEST",
    "MODE_PER_LINK",
    "MODE_PER_NODE",
    "MODE_HYBRID",
    "MODE_DISJOINT_LINK",
    "MODE_DISJOINT_NODE",
]

MODE_SHORTEST = "shortest"
MODE_PER_LINK = "per-link"
MODE_PER_NODE = "per-node"
MODE_HYBRID = "hybrid"
MODE_DISJOINT_LINK = "disjoint-link"
MODE_DISJOINT_NODE = "disjoint-node"

_KIND_ORDER = {"primary": 0, "link": 1, "node": 2, "anylink": 3}


@dataclass(frozen=True, order=False)
class FailureLabel:
    """Tag carried by detoured packets (or a wildcard match form)."""

    kind: str  # "primary" | "link" | "node" | "anylink"
    u: int = -1
    v: int = -1

    def sort_key(self) -> tuple[int, int, int]:
        return (_KIND_ORDER[self.kind], self.u, self.v)

    def __lt__(self, other: "FailureLabel") -> bool:
        return self.sort_key() < other.sort_key()

    @property
    def is_primary(self) -> bool:
        return self.kind == "primary"

    def __str__(self) -> str:
        if self.kind == "primary":
            return "primary"
        if self.kind == "link":
            return f"link:{self.u}-{self.v}"
        if self.kind == "node":
            return f"node:{self.v}"
        return f"anylink:*-{self.v}"

    @classmethod
    def parse(cls, text: str) -> "FailureLabel":
        if text == "primary":
            return PRIMARY
        kind, _, rest = text.partition(":")
        if kind == "link":
            u, v = rest.split("-")
            return link_fail(int(u), int(v))
        if kind == "node":
            return node_fail(int(rest))
        if kind == "anylink":
            return any_link_fail_to(int(rest.split("-")[-1]))
        raise ValueError(f"unknown label {text!r}")


PRIMARY = FailureLabel("primary")


def link_fail(detector: int, opposite: int) -> FailureLabel:
    """Label for a failed link, ordered (detecting node, far endpoint)."""
    return FailureLabel("link", detector, opposite)


def node_fail(v: int) -> FailureLabel:
    return FailureLabel("node", -1, v)


def any_link_fail_to(v: int) -> FailureLabel:
    return FailureLabel("anylink", -1, v)


class Match(NamedTuple):
    """Rule match key.  ``src``/``in_link`` are used only by the disjoint
    baselines, which must key on (source, destination, incoming port)."""

    label: FailureLabel
    dst: int
    src: Optional[int] = None
    in_link: Optional[Link] = None

    def sort_key(self):
        return (
            self.label.sort_key(),
            self.dst,
            -1 if self.src is None else self.src,
            (-1, -1) if self.in_link is None else self.in_link.pair,
        )


@dataclass(frozen=True)
class Output:
    link: Link


@dataclass(frozen=True)
class PushLabelOutput:
    label: FailureLabel
    link: Link


@dataclass(frozen=True)
class PopLabelOutput:
    link: Link


@dataclass(frozen=True)
class RewriteLabelOutput:
    label: FailureLabel
    link: Link


@dataclass(frozen=True)
class GroupRef:
    group_id: int


@dataclass(frozen=True)
class Drop:
    pass


Action = Union[Output, PushLabelOutput, PopLabelOutput, RewriteLabelOutput, GroupRef, Drop]

# Actions a group bucket may carry (no nested groups).
BucketAction = Union[Output, PushLabelOutput, PopLabelOutput, RewriteLabelOutput, Drop]


class Bucket(NamedTuple):
    """Fast-failover bucket: usable when ``watch`` is live (``None`` watches
    nothing and is always usable, e.g. a terminal Drop)."""

    watch: Optional[Link]
    action: BucketAction


@dataclass(frozen=True)
class GroupEntry:
    group_id: int
    node: int
    buckets: tuple[Bucket, ...]


class UncoveredEntry(NamedTuple):
    """A (failure, destination) case the configuration cannot deliver."""

    failure: str
    node: int
    dst: int
    reason: str  # "destination_failed" | "no_detour" | "no_disjoint_pair"


class ForwardingMatrix:
    """Per-node rule tables plus fast-failover groups."""

    def __init__(self, mode: str, n: int):
        self.mode = mode
        self.n = n
        self.tables: list[dict[Match, Action]] = [dict() for _ in range(n)]
        self.groups: dict[int, GroupEntry] = {}
        self._group_index: dict[tuple[int, tuple[Bucket, ...]], int] = {}
        self.uncovered: list[UncoveredEntry] = []
        self.stats: dict[str, float] = {}

    # -- construction ------------------------------------------------------

    def add_rule(self, node: int, match: Match, action: Action) -> None:
        """Install a rule; re-adding an identical rule is a no-op, a
        conflicting action for the same exact match is a bug."""
        existing = self.tables[node].get(match)
        if existing is not None and existing != action:
            raise ValueError(
                f"conflicting rule at node {node} for {match}: {existing} vs {action}"
            )
        self.tables[node][match] = action

    def set_rule(self, node: int, match: Match, action: Action) -> None:
        self.tables[node][match] = action

    def intern_group(self, node: int, buckets: tuple[Bucket, ...]) -> GroupRef:
        """Groups with identical ordered buckets at one node are shared."""
        key = (node, buckets)
        group_id = self._group_index.get(key)
        if group_id is None:
            group_id = len(self.groups)
            self._group_index[key] = group_id
            self.groups[group_id] = GroupEntry(group_id, node, buckets)
        return GroupRef(group_id)

    def prune_unreferenced_groups(self) -> None:
        used = {
            action.group_id
            for table in self.tables
            for action in table.values()
            if isinstance(action, GroupRef)
        }
        self.groups = {gid: g for gid, g in self.groups.items() if gid in used}
        self._group_index = {
            (g.node, g.buckets): gid for gid, g in self.groups.items()
        }

    # -- queries -----------------------------------------------------------

    def get(self, node: int, match: Match) -> Optional[Action]:
        return self.tables[node].get(match)

    def group(self, group_id: int) -> GroupEntry:
        return self.groups[group_id]

    def rule_count(self) -> int:
        return sum(len(table) for table in self.tables)

    def group_forwarding_count(self) -> int:
        return sum(
            1
            for table in self.tables
            for action in table.values()
            if isinstance(action, GroupRef)
        )

    def distinct_group_count(self) -> int:
        return len(self.groups)

    def iter_rules(self) -> Iterator[tuple[int, Match, Action]]:
        """Deterministic (node, match, action) order for serialization."""
        for node in range(self.n):
            for match in sorted(self.tables[node], key=Match.sort_key):
                yield node, match, self.tables[node][match]

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on violation.

        Output-style actions must use links incident to their node, labels
        may only be pushed onto primary-matched packets and popped off
        labeled ones, and every group needs at least two buckets watching
        local links and must be referenced from its own node.
        """
        def incident(node: int, link: Link) -> bool:
            return node in (link.u, link.v)

        pushing_groups = {
            gid
            for gid, g in self.groups.items()
            if any(isinstance(b.action, PushLabelOutput) for b in g.buckets)
        }
        for node in range(self.n):
            for match, action in self.tables[node].items():
                if isinstance(action, (Output, PushLabelOutput, PopLabelOutput, RewriteLabelOutput)):
                    if not incident(node, action.link):
                        raise ValueError(f"rule at {node} outputs on non-incident {action.link}")
                if isinstance(action, PushLabelOutput) and not match.label.is_primary:
                    raise ValueError(f"push from non-primary match at node {node}")
                if isinstance(action, PopLabelOutput) and match.label.is_primary:
                    raise ValueError(f"pop from primary match at node {node}")
                if isinstance(action, GroupRef):
                    group = self.groups.get(action.group_id)
                    if group is None:
                        raise ValueError(f"unresolved group {action.group_id} at node {node}")
                    if group.node != node:
                        raise ValueError(f"node {node} references group of node {group.node}")
                    if action.group_id in pushing_groups and not match.label.is_primary:
                        raise ValueError(f"label push reachable from non-primary match at {node}")
        for gid, group in self.groups.items():
            if len(group.buckets) < 2:
                raise ValueError(f"group {gid} has fewer than two buckets")
            for bucket in group.buckets:
                if bucket.watch is not None and not incident(group.node, bucket.watch):
                    raise ValueError(f"group {gid} watches non-incident {bucket.watch}")
                if isinstance(bucket.action, GroupRef):
                    raise ValueError(f"group {gid} nests a group reference")

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        groups = self.groups
        return {
            "mode": self.mode,
            "n": self.n,
            "rules": [
                {
                    "node": node,
                    "label": str(match.label),
                    "dst": match.dst,
                    "src": match.src,
                    "in_link": None if match.in_link is None else str(match.in_link),
                    "action": _action_to_json(action),
                }
                for node, match, action in self.iter_rules()
            ],
            "groups": [
                {
                    "id": gid,
                    "node": groups[gid].node,
                    "buckets": [
                        {
                            "watch": None if b.watch is None else str(b.watch),
                            "action": _action_to_json(b.action),
                        }
                        for b in groups[gid].buckets
                    ],
                }
                for gid in sorted(groups)
            ],
            "uncovered": [list(entry) for entry in self.uncovered],
            "stats": self.stats,
        }

    @classmethod
    def from_json(cls, data: dict, t: Topology) -> "ForwardingMatrix":
        fw = cls(data["mode"], data["n"])
        for entry in data["rules"]:
            match = Match(
                FailureLabel.parse(entry["label"]),
                entry["dst"],
                entry["src"],
                None if entry["in_link"] is None else _parse_link(entry["in_link"], t),
            )
            fw.tables[entry["node"]][match] = _action_from_json(entry["action"], t)
        for g in data["groups"]:
            buckets = tuple(
                Bucket(
                    None if b["watch"] is None else _parse_link(b["watch"], t),
                    _action_from_json(b["action"], t),
                )
                for b in g["buckets"]
            )
            fw.groups[g["id"]] = GroupEntry(g["id"], g["node"], buckets)
        fw._group_index = {
            (g.node, g.buckets): gid for gid, g in fw.groups.items()
        }
        fw.uncovered = [UncoveredEntry(*entry) for entry in data.get("uncovered", [])]
        fw.stats = dict(data.get("stats", {}))
        return fw


def _parse_link(text: str, t: Topology) -> Link:
    u, v = (int(x) for x in text.split("-"))
    link = t.link_between(u, v)
    if link is None:
        raise ValueError(f"matrix references link {text} absent from topology")
    return link


def _action_to_json(action: Action) -> dict:
    if isinstance(action, Output):
        return {"type": "output", "link": str(action.link)}
    if isinstance(action, PushLabelOutput):
        return {"type": "push", "label": str(action.label), "link": str(action.link)}
    if isinstance(action, PopLabelOutput):
        return {"type": "pop", "link": str(action.link)}
    if isinstance(action, RewriteLabelOutput):
        return {"type": "rewrite", "label": str(action.label), "link": str(action.link)}
    if isinstance(action, GroupRef):
        return {"type": "group", "id": action.group_id}
    if isinstance(action, Drop):
        return {"type": "drop"}
    raise TypeError(f"unknown action {action!r}")


def _action_from_json(data: dict, t: Topology) -> Action:
    kind = data["type"]
    if kind == "output":
        return Output(_parse_link(data["link"], t))
    if kind == "push":
        return PushLabelOutput(FailureLabel.parse(data["label"]), _parse_link(data["link"], t))
    if kind == "pop":
        return PopLabelOutput(_parse_link(data["link"], t))
    if kind == "rewrite":
        return RewriteLabelOutput(FailureLabel.parse(data["label"]), _parse_link(data["link"], t))
    if kind == "group":
        return GroupRef(data["id"])
    if kind == "drop":
        return Drop()
    raise ValueError(f"unknown action type {kind!r}")
