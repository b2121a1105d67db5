"""Failure-disjoint backup forwarding configurations.

Three computations share one structure: start from the all-to-all primary
matrix, then for every node ``n`` and outgoing link ``l`` compute a detour
tree for the destinations whose primary path departs on ``l``:

* per-link: the detour avoids the physical link ``l`` and is keyed by a
  ``LinkFail(n, opposite)`` label;
* per-node: the detour avoids the entire opposite node and is keyed by
  ``NodeFail(opposite)``;
* hybrid: both families in one matrix.  The detecting node assumes a link
  failure (pushes the link label, follows the link detour); any detour rule
  that outputs straight toward the label's far endpoint ``v`` becomes a
  fast-failover group whose second bucket rewrites the label to
  ``NodeFail(v)`` and continues on the node-avoiding detour.  Node-family
  rules are installed under the ``AnyLinkFailTo(v)`` wildcard so they match
  both node labels and (after deduplication) link labels.

The detecting node's primary rule becomes a fast-failover group: bucket 1
outputs on the watched primary link, bucket 2 pushes the failure label and
outputs on the detour.  Along a detour, the first node whose preferred
primary path no longer touches the failed element carries a pop rule (the
detour provably rejoins that primary path there); for hybrid link labels the
pop additionally requires the primary path to avoid the opposite node, since
the packet may actually be detouring a node failure.

``optimize`` deletes every labeled rule from the pop point on (labeled
packets then fall through to the primary match, which provably forwards
along the identical path) and, for hybrid matrices, link rules whose action
equals the node-family wildcard rule at the same node and destination.
Delivered node sequences and weights are unchanged by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .rules import (
    MODE_HYBRID,
    MODE_PER_LINK,
    MODE_PER_NODE,
    PRIMARY,
    Bucket,
    Drop,
    ForwardingMatrix,
    Match,
    Output,
    PopLabelOutput,
    PushLabelOutput,
    RewriteLabelOutput,
    UncoveredEntry,
    any_link_fail_to,
    link_fail,
    node_fail,
)
from .spf import (
    ShortestPathTree,
    SpCounter,
    all_shortest_trees,
    primary_matrix_from_trees,
    shortest_tree,
)
from .topology import FailureScenario, Link, Topology

__all__ = ["per_link_rules", "per_node_rules", "hybrid_rules", "optimize"]

_LINK = "link"
_NODE = "node"


@dataclass
class _Build:
    t: Topology
    trees: list[ShortestPathTree]
    fw: ForwardingMatrix
    affected: dict[tuple[int, Link], set[int]]
    # hybrid only: (detour node, far endpoint v, dst, exact label, output link)
    upgrade_rules: list[tuple[int, int, int, object, Link]] = field(default_factory=list)
    # hybrid only: extra node-family targets per detecting arc (node, v)
    upgrade_targets: dict[tuple[int, int], set[int]] = field(default_factory=dict)
    # node family first hops: (detector, v) -> {dst: first link or None}
    node_first_hop: dict[tuple[int, int], dict[int, Optional[Link]]] = field(
        default_factory=dict
    )


def per_link_rules(t: Topology) -> ForwardingMatrix:
    """Primary + backup rules surviving any single link failure."""
    return _build(t, MODE_PER_LINK)


def per_node_rules(t: Topology) -> ForwardingMatrix:
    """Primary + backup rules surviving any single node failure (packets to
    the failed node itself are undeliverable and dropped)."""
    return _build(t, MODE_PER_NODE)


def hybrid_rules(t: Topology) -> ForwardingMatrix:
    """Link-failure detours preferred, upgraded to node-failure detours when
    a second dead link toward the same node is observed."""
    return _build(t, MODE_HYBRID)


def _build(t: Topology, mode: str) -> ForwardingMatrix:
    counter = SpCounter()
    trees = all_shortest_trees(t, counter)
    fw, affected = primary_matrix_from_trees(t, trees)
    fw.mode = mode
    ctx = _Build(t, trees, fw, affected)
    if mode == MODE_PER_LINK:
        _install_family(ctx, _LINK, counter, hybrid=False)
    elif mode == MODE_PER_NODE:
        _install_family(ctx, _NODE, counter, hybrid=False)
    else:
        _install_family(ctx, _LINK, counter, hybrid=True)
        _install_family(ctx, _NODE, counter, hybrid=True)
        _install_upgrade_groups(ctx)
    fw.stats["sp_invocations"] = counter.count
    return fw


def _path_links(path: tuple[int, ...]) -> set[tuple[int, int]]:
    return {
        (a, b) if a < b else (b, a) for a, b in zip(path, path[1:])
    }


def _pop_allowed(
    ctx: _Build, node: int, dst: int, family: str, failed: Link, opposite: int, hybrid: bool
) -> bool:
    """May the failure label be removed at ``node``?  True when the preferred
    primary path from ``node`` no longer touches the failed element."""
    primary_path = ctx.trees[node].paths[dst]
    if family == _LINK:
        if failed.pair in _path_links(primary_path):
            return False
        if hybrid and opposite in primary_path:
            return False
        return True
    return opposite not in primary_path


def _install_family(ctx: _Build, family: str, counter: SpCounter, hybrid: bool) -> None:
    t, fw = ctx.t, ctx.fw
    for n in t.nodes:
        for m, _w, link in t.neighbors(n):
            if family == _LINK:
                scenario = FailureScenario.link_down(n, m)
                label = link_fail(n, m)
                match_label = label
            else:
                scenario = FailureScenario.node_down(m)
                label = node_fail(m)
                match_label = any_link_fail_to(m) if hybrid else label
            base_targets = ctx.affected.get((n, link), set())
            targets = set(base_targets)
            if hybrid and family == _NODE:
                targets |= ctx.upgrade_targets.get((n, m), set())
            tree_targets = targets - ({m} if family == _NODE else set())
            # One detour computation per outgoing arc, affected set or not:
            # the complexity budget is exactly |N| + 2·|links| invocations.
            tree = shortest_tree(t, n, excluded=scenario, targets=tree_targets, counter=counter)
            first_hops: dict[int, Optional[Link]] = {}
            for d in sorted(targets):
                if family == _NODE and d == m:
                    detour = None
                    reason = "destination_failed"
                elif d in tree.dist:
                    detour = tree.paths[d]
                    reason = None
                else:
                    detour = None
                    reason = "no_detour"
                first_hops[d] = (
                    None if detour is None else t.link_between(n, detour[1])
                )
                owns_group = d in base_targets and not (hybrid and family == _NODE)
                if owns_group:
                    bucket1 = Bucket(link, Output(link))
                    if detour is None:
                        bucket2 = Bucket(None, Drop())
                        fw.uncovered.append(UncoveredEntry(str(scenario), n, d, reason))
                    else:
                        first = first_hops[d]
                        bucket2 = Bucket(first, PushLabelOutput(label, first))
                    fw.set_rule(n, Match(PRIMARY, d), fw.intern_group(n, (bucket1, bucket2)))
                elif detour is None and d in base_targets and reason == "no_detour":
                    # hybrid node family: gap is informational, the link
                    # family still owns the group for this destination
                    fw.uncovered.append(UncoveredEntry(str(scenario), n, d, reason))
                if detour is None:
                    continue
                _install_detour_rules(ctx, family, hybrid, label, match_label, link, m, d, detour)
            if family == _NODE:
                ctx.node_first_hop[(n, m)] = first_hops


def _install_detour_rules(
    ctx: _Build,
    family: str,
    hybrid: bool,
    label,
    match_label,
    failed: Link,
    opposite: int,
    d: int,
    detour: tuple[int, ...],
) -> None:
    t, fw = ctx.t, ctx.fw
    for idx in range(1, len(detour) - 1):
        w_node = detour[idx]
        out = t.link_between(w_node, detour[idx + 1])
        match = Match(match_label, d)
        if _pop_allowed(ctx, w_node, d, family, failed, opposite, hybrid):
            # The detour provably coincides with this node's primary path
            # from here on, so popping hands the packet back unchanged.
            prim_next = ctx.trees[w_node].next_link[d]
            assert prim_next == out, "detour must rejoin the primary path at the pop point"
            fw.add_rule(w_node, match, PopLabelOutput(prim_next))
        else:
            fw.add_rule(w_node, match, Output(out))
            if hybrid and family == _LINK and detour[idx + 1] == opposite:
                # Live link-detour rule heading straight for the label's far
                # endpoint: upgrade point for a presumed node failure.
                ctx.upgrade_rules.append((w_node, opposite, d, label, out))
                ctx.upgrade_targets.setdefault((w_node, opposite), set()).add(d)


def _install_upgrade_groups(ctx: _Build) -> None:
    fw = ctx.fw
    for w_node, v, d, label, out in ctx.upgrade_rules:
        bucket1 = Bucket(out, Output(out))
        first = ctx.node_first_hop.get((w_node, v), {}).get(d)
        if d == v:
            bucket2 = Bucket(None, Drop())
            fw.uncovered.append(
                UncoveredEntry(str(FailureScenario.node_down(v)), w_node, d, "destination_failed")
            )
        elif first is None:
            bucket2 = Bucket(None, Drop())
            fw.uncovered.append(
                UncoveredEntry(str(FailureScenario.node_down(v)), w_node, d, "no_detour")
            )
        else:
            bucket2 = Bucket(first, RewriteLabelOutput(node_fail(v), first))
        fw.set_rule(w_node, Match(label, d), fw.intern_group(w_node, (bucket1, bucket2)))


def optimize(fw: ForwardingMatrix, t: Topology) -> ForwardingMatrix:
    """Shrink the rule table without changing any delivered packet path.

    (a) Label stripping: once a detour reaches a node whose primary path is
    unaffected by the failure, the label has done its job.  All labeled
    rules from that pop point on are deleted, the pop rule included: a
    labeled packet with no labeled rule falls through to the primary match,
    which at such nodes forwards along the exact same path the pop rule
    would have (the detour rejoins the primary path there).
    (b) Hybrid dedup: an exact link-failure rule whose action equals the
    node-family wildcard rule at the same node and destination is deleted;
    the wildcard match covers those packets with the identical action.
    """
    if fw.mode not in (MODE_PER_LINK, MODE_PER_NODE, MODE_HYBRID):
        raise ValueError(f"optimize expects a protection matrix, got mode {fw.mode!r}")
    out = ForwardingMatrix(fw.mode, fw.n)
    for node in range(fw.n):
        for match, action in fw.tables[node].items():
            if not match.label.is_primary and isinstance(action, PopLabelOutput):
                continue
            out.tables[node][match] = action
    if fw.mode == MODE_HYBRID:
        for node in range(fw.n):
            table = out.tables[node]
            for match in [m for m in table if m.label.kind == "link"]:
                wildcard = Match(any_link_fail_to(match.label.v), match.dst)
                if table.get(wildcard) == table[match]:
                    del table[match]
    out.groups = dict(fw.groups)
    out._group_index = dict(fw._group_index)
    out.prune_unreferenced_groups()
    out.uncovered = list(fw.uncovered)
    out.stats = dict(fw.stats)
    out.stats["rules_before_optimize"] = fw.rule_count()
    out.stats["optimized"] = 1.0
    return out
