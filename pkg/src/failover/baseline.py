"""Min-sum fully-disjoint path pairs and crankback-routing rules.

The disjoint pair computation follows the arc-reversal scheme: take the
shortest path, reverse its arcs with negated weights, find a second shortest
path with a negative-arc-capable engine, then cancel interlacing arc pairs
and decompose the remainder into the two final paths.  A shortest-path-tree
reweighting variant (non-negative residual, plain Dijkstra) is kept as an
internal cross-check; both are exact and must agree on the pair total.

Crankback rules mirror how fully-disjoint protection behaves in practice:
primary-path rules match on (source, destination, incoming port); a node
detecting a failure bounces packets back along the traversed prefix, and the
source recognizes returned packets by their incoming port and switches to
the backup path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .rules import (
    MODE_DISJOINT_LINK,
    MODE_DISJOINT_NODE,
    PRIMARY,
    Bucket,
    ForwardingMatrix,
    Match,
    Output,
    UncoveredEntry,
)
from .spf import (
    all_shortest_trees,
    bellman_ford_distances,
    lex_dijkstra,
    queued_bellman_ford,
)
from .topology import Link, Topology

__all__ = [
    "DisjointPair",
    "bhandari_link_disjoint",
    "bhandari_node_disjoint",
    "suurballe_link_disjoint",
    "suurballe_node_disjoint",
    "disjoint_rules",
]

ArcMap = dict[int, list[tuple[int, float]]]


@dataclass(frozen=True)
class DisjointPair:
    """Min-sum pair of disjoint paths; primary is the lighter one."""

    primary: tuple[int, ...]
    primary_weight: float
    backup: tuple[int, ...]
    backup_weight: float

    @property
    def total(self) -> float:
        return self.primary_weight + self.backup_weight


def _arc_map(t: Topology) -> ArcMap:
    arcs: ArcMap = {u: [] for u in t.nodes}
    for link in t.links:
        arcs[link.u].append((link.v, link.weight))
        arcs[link.v].append((link.u, link.weight))
    for lst in arcs.values():
        lst.sort()
    return arcs


def _split_arc_map(t: Topology) -> ArcMap:
    """Node-splitting transform: x -> x_in (2x), x_out (2x+1); a pair of
    link-disjoint paths here maps back to internally node-disjoint paths."""
    arcs: ArcMap = {}
    for x in t.nodes:
        arcs[2 * x] = [(2 * x + 1, 0.0)]
        arcs[2 * x + 1] = []
    for link in t.links:
        arcs[2 * link.u + 1].append((2 * link.v, link.weight))
        arcs[2 * link.v + 1].append((2 * link.u, link.weight))
    for lst in arcs.values():
        lst.sort()
    return arcs


def _merge_split_path(path: tuple[int, ...]) -> tuple[int, ...]:
    merged: list[int] = []
    for p in path:
        x = p // 2
        if not merged or merged[-1] != x:
            merged.append(x)
    return tuple(merged)


def _arc_weight(arcs: ArcMap, a: int, b: int) -> float:
    for v, w in arcs[a]:
        if v == b:
            return w
    raise KeyError((a, b))


def _simplify(walk: list[int]) -> tuple[int, ...]:
    """Splice out revisits (zero-weight cycles can linger under weight ties)."""
    out: list[int] = []
    pos: dict[int, int] = {}
    for node in walk:
        if node in pos:
            del out[pos[node] + 1 :]
            pos = {n: i for i, n in enumerate(out)}
        else:
            pos[node] = len(out)
            out.append(node)
    return tuple(out)


def _two_disjoint_paths(
    arcs: ArcMap, s: int, d: int, reweight: bool
) -> Optional[tuple[tuple[int, ...], tuple[int, ...]]]:
    dist1, paths1 = lex_dijkstra(lambda u: arcs.get(u, ()), s)
    if d not in paths1:
        return None
    p1 = paths1[d]
    p1_arcs = list(zip(p1, p1[1:]))
    p1_set = set(p1_arcs)
    anti = {(b, a) for a, b in p1_arcs}

    residual: ArcMap = {}
    if not reweight:
        # Arc reversal with negated weights; the anti-parallel direction of a
        # used link is replaced, not kept, so a physical link is never reused.
        for u, lst in arcs.items():
            residual[u] = [
                (v, w) for v, w in lst if (u, v) not in p1_set and (u, v) not in anti
            ]
        for a, b in p1_arcs:
            residual.setdefault(b, []).append((a, -_arc_weight(arcs, a, b)))
        dist2, paths2 = queued_bellman_ford(lambda u: residual.get(u, ()), s)
        if d in dist2:
            exact = bellman_ford_distances(lambda u: residual.get(u, ()), s)[d]
            if dist2[d] - exact > 1e-9 * max(1.0, abs(exact)):
                raise AssertionError(
                    "path-restricted Bellman-Ford missed the residual optimum"
                )
    else:
        # Shortest-path-tree reweighting: w' = (w + dist[u]) - dist[v] is
        # exactly >= 0 in floats (dist[v] is the min over candidates that
        # include dist[u] + w), so plain Dijkstra applies; reversed arcs of
        # the first path get the zero weight of their forward counterpart.
        for u, lst in arcs.items():
            if u not in dist1:
                continue
            residual[u] = [
                (v, (w + dist1[u]) - dist1[v])
                for v, w in lst
                if v in dist1 and (u, v) not in p1_set and (u, v) not in anti
            ]
        for a, b in p1_arcs:
            residual.setdefault(b, []).append((a, 0.0))
        _, paths2 = lex_dijkstra(lambda u: residual.get(u, ()), s)
    if d not in paths2:
        return None
    p2 = paths2[d]
    p2_set = set(zip(p2, p2[1:]))

    cancelled = {(a, b) for (a, b) in p1_set if (b, a) in p2_set}
    remaining = (p1_set - cancelled) | (p2_set - {(b, a) for (a, b) in cancelled})
    out_map: dict[int, list[int]] = {}
    for a, b in remaining:
        out_map.setdefault(a, []).append(b)
    for lst in out_map.values():
        lst.sort()
    result = []
    for _ in range(2):
        walk = [s]
        cur = s
        while cur != d:
            cur = out_map[cur].pop(0)
            walk.append(cur)
        result.append(_simplify(walk))
    return result[0], result[1]


def _path_weight(t: Topology, path: tuple[int, ...]) -> float:
    total = 0.0
    for a, b in zip(path, path[1:]):
        link = t.link_between(a, b)
        assert link is not None, f"path uses missing link {a}-{b}"
        total += link.weight
    return total


def _make_pair(t: Topology, a: tuple[int, ...], b: tuple[int, ...]) -> DisjointPair:
    wa, wb = _path_weight(t, a), _path_weight(t, b)
    if (wa, a) <= (wb, b):
        return DisjointPair(a, wa, b, wb)
    return DisjointPair(b, wb, a, wa)


def _disjoint_pair(
    t: Topology, s: int, d: int, node_disjoint: bool, reweight: bool
) -> Optional[DisjointPair]:
    if s == d:
        raise ValueError("source and destination must differ")
    if node_disjoint:
        res = _two_disjoint_paths(_split_arc_map(t), 2 * s + 1, 2 * d, reweight)
        if res is None:
            return None
        return _make_pair(t, _merge_split_path(res[0]), _merge_split_path(res[1]))
    res = _two_disjoint_paths(_arc_map(t), s, d, reweight)
    if res is None:
        return None
    return _make_pair(t, res[0], res[1])


def bhandari_link_disjoint(t: Topology, s: int, d: int) -> Optional[DisjointPair]:
    """Min-sum pair of link-disjoint s-d paths, or None if no pair exists."""
    return _disjoint_pair(t, s, d, node_disjoint=False, reweight=False)


def bhandari_node_disjoint(t: Topology, s: int, d: int) -> Optional[DisjointPair]:
    """Min-sum pair of internally node-disjoint s-d paths, or None."""
    return _disjoint_pair(t, s, d, node_disjoint=True, reweight=False)


def suurballe_link_disjoint(t: Topology, s: int, d: int) -> Optional[DisjointPair]:
    """Reweighting-based cross-check; same contract as the arc-reversal form."""
    return _disjoint_pair(t, s, d, node_disjoint=False, reweight=True)


def suurballe_node_disjoint(t: Topology, s: int, d: int) -> Optional[DisjointPair]:
    return _disjoint_pair(t, s, d, node_disjoint=True, reweight=True)


def disjoint_rules(t: Topology, variant: str = "link") -> ForwardingMatrix:
    """Crankback forwarding rules from pre-positioned disjoint path pairs.

    Every ordered pair gets primary-path rules matched on (source,
    destination, incoming link); intermediate detection bounces the packet
    back along its prefix and the source switches over to the backup path.
    Pairs with no disjoint pair fall back to plain shortest-path rules and
    are recorded as uncovered.
    """
    if variant not in ("link", "node"):
        raise ValueError(f"variant must be 'link' or 'node', got {variant!r}")
    node_disjoint = variant == "node"
    fw = ForwardingMatrix(MODE_DISJOINT_NODE if node_disjoint else MODE_DISJOINT_LINK, t.n)
    fallback_trees = None
    for s in t.nodes:
        for d in range(s + 1, t.n):
            pair = _disjoint_pair(t, s, d, node_disjoint, reweight=False)
            if pair is None:
                if fallback_trees is None:
                    fallback_trees = all_shortest_trees(t)
                for src, dst in ((s, d), (d, s)):
                    fw.uncovered.append(
                        UncoveredEntry("any_on_primary", src, dst, "no_disjoint_pair")
                    )
                    if dst in fallback_trees[src].paths:
                        _install_primary_only(fw, t, src, dst, fallback_trees[src].paths[dst])
                continue
            _install_pair_rules(fw, t, s, d, pair)
            mirrored = DisjointPair(
                tuple(reversed(pair.primary)),
                pair.primary_weight,
                tuple(reversed(pair.backup)),
                pair.backup_weight,
            )
            _install_pair_rules(fw, t, d, s, mirrored)
    return fw


def _links_along(t: Topology, path: tuple[int, ...]) -> list[Link]:
    links = []
    for a, b in zip(path, path[1:]):
        link = t.link_between(a, b)
        assert link is not None
        links.append(link)
    return links


def _install_pair_rules(
    fw: ForwardingMatrix, t: Topology, src: int, dst: int, pair: DisjointPair
) -> None:
    p_links = _links_along(t, pair.primary)
    b_links = _links_along(t, pair.backup)
    # Source: fast failover between the two first hops, plus the rule that
    # recognizes a cranked-back packet by its incoming port.
    buckets = (
        Bucket(p_links[0], Output(p_links[0])),
        Bucket(b_links[0], Output(b_links[0])),
    )
    fw.add_rule(src, Match(PRIMARY, dst, src, None), fw.intern_group(src, buckets))
    if len(pair.primary) > 2:
        fw.add_rule(src, Match(PRIMARY, dst, src, p_links[0]), Output(b_links[0]))
    for i in range(1, len(pair.primary) - 1):
        x = pair.primary[i]
        prev_link, next_link = p_links[i - 1], p_links[i]
        buckets = (
            Bucket(next_link, Output(next_link)),
            Bucket(prev_link, Output(prev_link)),  # bounce back toward source
        )
        fw.add_rule(x, Match(PRIMARY, dst, src, prev_link), fw.intern_group(x, buckets))
        # Pass returned packets further back along the prefix.
        fw.add_rule(x, Match(PRIMARY, dst, src, next_link), Output(prev_link))
    for i in range(1, len(pair.backup) - 1):
        y = pair.backup[i]
        fw.add_rule(y, Match(PRIMARY, dst, src, b_links[i - 1]), Output(b_links[i]))


def _install_primary_only(
    fw: ForwardingMatrix, t: Topology, src: int, dst: int, path: tuple[int, ...]
) -> None:
    links = _links_along(t, path)
    fw.add_rule(src, Match(PRIMARY, dst, src, None), Output(links[0]))
    for i in range(1, len(path) - 1):
        fw.add_rule(path[i], Match(PRIMARY, dst, src, links[i - 1]), Output(links[i]))
