"""Deterministic forwarding simulator.

Walks one packet through a :class:`ForwardingMatrix` under a single failure
scenario, honoring fast-failover group semantics (first bucket with a live
watched link wins) and label push/pop/rewrite actions, and records the exact
trace.

Rule lookup order at a node, most to least specific:

1. ``(label, dst, src, in_link)`` and ``(label, dst, src)``: the disjoint
   baselines key on source and incoming port for crankback routing;
2. exact ``(label, dst)``;
3. wildcard ``(AnyLinkFailTo(v), dst)`` for a packet labeled
   ``LinkFail(x, v)`` or ``NodeFail(v)``;
4. ``(Primary, dst)``.

A trace ends delivered, dropped (explicit drop, no matching rule, or the
selected output link is dead; packets never traverse dead links), or
loop-detected when the ``(node, label, incoming link)`` state repeats.
Loops indicate a rule-computation bug and are reported as their own class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .rules import (
    Action,
    Drop,
    FailureLabel,
    ForwardingMatrix,
    GroupRef,
    Match,
    PRIMARY,
    PopLabelOutput,
    PushLabelOutput,
    RewriteLabelOutput,
)
from .topology import FailureScenario, Link, Topology

__all__ = ["TraceStep", "Trace", "simulate", "crankback_of"]

DELIVERED = "delivered"
DROPPED = "dropped"
LOOP = "loop"


@dataclass(frozen=True)
class TraceStep:
    node: int
    label: FailureLabel  # label after this node's actions
    link: Optional[Link]  # outgoing link, None on the terminal step
    weight: float


@dataclass
class Trace:
    src: int
    dst: int
    scenario: FailureScenario
    steps: list[TraceStep] = field(default_factory=list)
    outcome: str = DROPPED
    reason: str = ""
    total_weight: float = 0.0
    crankback_weight: float = 0.0

    @property
    def delivered(self) -> bool:
        return self.outcome == DELIVERED

    @property
    def node_sequence(self) -> tuple[int, ...]:
        return tuple(step.node for step in self.steps)

    def dump(self) -> str:
        lines = []
        for step in self.steps:
            link = "-" if step.link is None else str(step.link)
            weight = "-" if step.link is None else repr(step.weight)
            lines.append(f"{step.node} {step.label} {link} {weight}")
        lines.append(
            f"{self.outcome} total={self.total_weight!r} crankback={self.crankback_weight!r}"
        )
        return "\n".join(lines) + "\n"


def _lookup(fw: ForwardingMatrix, node: int, label: FailureLabel, dst: int,
            src: int, in_link: Optional[Link]) -> Optional[Action]:
    table = fw.tables[node]
    action = table.get(Match(label, dst, src, in_link))
    if action is not None:
        return action
    if in_link is not None:
        action = table.get(Match(label, dst, src, None))
        if action is not None:
            return action
    action = table.get(Match(label, dst))
    if action is not None:
        return action
    if label.kind in ("link", "node"):
        action = table.get(Match(FailureLabel("anylink", -1, label.v), dst))
        if action is not None:
            return action
    if not label.is_primary:
        action = table.get(Match(PRIMARY, dst))
        if action is not None:
            return action
    return None


def simulate(
    fw: ForwardingMatrix,
    t: Topology,
    scenario: FailureScenario,
    src: int,
    dst: int,
) -> Trace:
    """Forward one packet from ``src`` to ``dst`` under ``scenario``."""
    if src == dst:
        raise ValueError("source and destination must differ")
    trace = Trace(src, dst, scenario)
    if not scenario.node_is_live(src):
        trace.reason = "source is the failed node"
        return trace
    node = src
    label = PRIMARY
    in_link: Optional[Link] = None
    seen: set[tuple[int, FailureLabel, Optional[Link]]] = set()
    while node != dst:
        state = (node, label, in_link)
        if state in seen:
            trace.outcome = LOOP
            trace.reason = "forwarding state repeated"
            return trace
        seen.add(state)
        action = _lookup(fw, node, label, dst, src, in_link)
        if action is None:
            trace.reason = "no matching rule"
            return trace
        if isinstance(action, GroupRef):
            action = _fire_group(fw, action.group_id, scenario)
            if action is None:
                trace.reason = "no live group bucket"
                return trace
        if isinstance(action, Drop):
            trace.reason = "drop rule"
            return trace
        if isinstance(action, PushLabelOutput):
            label, out = action.label, action.link
        elif isinstance(action, PopLabelOutput):
            label, out = PRIMARY, action.link
        elif isinstance(action, RewriteLabelOutput):
            label, out = action.label, action.link
        else:
            out = action.link
        if not scenario.link_is_live(out):
            trace.reason = f"output link {out} is dead"
            return trace
        trace.steps.append(TraceStep(node, label, out, out.weight))
        trace.total_weight += out.weight
        in_link = out
        node = out.other(node)
    trace.steps.append(TraceStep(node, label, None, 0.0))
    trace.outcome = DELIVERED
    trace.crankback_weight = crankback_of(trace)
    return trace


def _fire_group(fw: ForwardingMatrix, group_id: int, scenario: FailureScenario):
    for bucket in fw.groups[group_id].buckets:
        if bucket.watch is None or scenario.link_is_live(bucket.watch):
            return bucket.action
    return None


def crankback_of(trace: Trace) -> float:
    """Weight of the trace portion retracing earlier links in reverse.

    Each reversed traversal consumes one matching earlier forward traversal,
    so a link bounced twice counts twice.
    """
    unmatched: dict[tuple[int, int], int] = {}
    total = 0.0
    node = trace.src
    for step in trace.steps:
        if step.link is None:
            break
        nxt = step.link.other(node)
        if unmatched.get((nxt, node), 0) > 0:
            unmatched[(nxt, node)] -= 1
            total += step.link.weight
        else:
            unmatched[(node, nxt)] = unmatched.get((node, nxt), 0) + 1
        node = nxt
    return total
