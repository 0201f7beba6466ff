"""Trust-aware query propagation.

A query spreads hop by hop. Each peer forwards to a number of its best-ranked
neighbors that shrinks as the peer's community saturates (wide TTL-limited
flooding early, a single directed walk with a longer TTL once saturated).
A receiver drops a query whose immediate sender it classifies as malicious.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

from .content import FileId, InterestProfile
from .overlay import LinkKind, OverlayGraph
from .trust import Recommender, TrustClass, TrustLedger, check_trust_rating, honest_recommendation


@dataclass
class SearchParams:
    base_fanout: int = 2
    ttl_bfs: int = 5
    ttl_dfs: int = 10


@dataclass
class Query:
    id: int
    origin: int
    target: FileId
    ttl_remaining: int
    sender: int
    prob_com_at_origin: float


@dataclass
class QueryResult:
    query_id: int
    origin: int
    target: FileId
    ttl: int
    responders: list[int] = field(default_factory=list)
    hops_to_match: dict[int, int] = field(default_factory=dict)
    blocked_count: int = 0
    messages_sent: int = 0
    visited: int = 1


def fanout(prob_com: float, base_fanout: int) -> int:
    """Messages a peer sends: ``base_fanout`` at zero community, 1 when saturated."""
    if not 0.0 <= prob_com <= 1.0:
        raise ValueError(f"prob_com must lie in [0, 1], got {prob_com}")
    # Round half up; Python's round() would send 0.5 -> 0.
    return max(1, math.floor((1.0 - prob_com) * base_fanout + 0.5))


def _base_order(
    peer: int,
    graph: OverlayGraph,
    ledgers: Sequence[TrustLedger],
    classify: Callable[[int, int], TrustClass],
) -> list[tuple[int, bool]]:
    """Non-malicious neighbors as ``(peer, is_community)``, community links
    first, then by descending trust score (unknown = 0), then peer id."""
    ledger = ledgers[peer]
    keyed = []
    for v, kind in graph.neighbors(peer).items():
        if classify(peer, v) is TrustClass.MALICIOUS:
            continue
        s = ledger.score(v)
        keyed.append((kind is not LinkKind.COMMUNITY, -(s if s is not None else 0.0), v))
    keyed.sort()
    return [(v, not conn) for conn, _, v in keyed]


def _by_interest(base: list[tuple[int, bool]], category: int, profiles: Sequence[InterestProfile]) -> list[int]:
    # Stable partition: interested community partners move to the front.
    first = [v for v, com in base if com and category in profiles[v]]
    if not first:
        return [v for v, _ in base]
    chosen = set(first)
    return first + [v for v, _ in base if v not in chosen]


def rank_neighbors(
    peer: int,
    target: FileId,
    graph: OverlayGraph,
    ledgers: Sequence[TrustLedger],
    profiles: Sequence[InterestProfile],
    recommend: Recommender = honest_recommendation,
) -> list[int]:
    """Neighbors of ``peer`` in forwarding preference order.

    Neighbors ``peer`` classifies as malicious are dropped. The rest sort by:
    community link whose partner is interested in the target's category,
    then any community link, then ``peer``'s trust score (unknown = 0),
    then lower peer id.
    """
    def classify(a: int, b: int) -> TrustClass:
        return check_trust_rating(a, b, ledgers, graph.neighbors(a), recommend)

    return _by_interest(_base_order(peer, graph, ledgers, classify), target.category, profiles)


Responds = Callable[[int, FileId], bool]


class SearchEngine:
    """Runs queries against a snapshot of graph, ledgers and libraries.

    Rankings, fanouts and trust classifications are memoised; call
    :meth:`invalidate` whenever the graph or any ledger changes.
    """

    def __init__(
        self,
        graph: OverlayGraph,
        ledgers: Sequence[TrustLedger],
        libraries: Sequence[set[FileId]],
        profiles: Sequence[InterestProfile],
        params: SearchParams | None = None,
        recommend: Recommender = honest_recommendation,
        responds: Responds | None = None,
    ):
        self.graph = graph
        self.ledgers = ledgers
        self.libraries = libraries
        self.profiles = profiles
        self.params = params or SearchParams()
        self.recommend = recommend
        self.responds = responds or (lambda peer, target: target in libraries[peer])
        self.trace_out: TextIO | None = None
        self.invalidate()

    def invalidate(self) -> None:
        self._base_cache: dict[int, list[tuple[int, bool]]] = {}
        self._rank_cache: dict[tuple[int, int], list[int]] = {}
        self._class_cache: dict[tuple[int, int], TrustClass] = {}
        self._fanout_cache: dict[int, int] = {}

    def classify(self, asker: int, subject: int) -> TrustClass:
        key = (asker, subject)
        c = self._class_cache.get(key)
        if c is None:
            c = check_trust_rating(asker, subject, self.ledgers, self.graph.neighbors(asker), self.recommend)
            self._class_cache[key] = c
        return c

    def ranked(self, peer: int, target: FileId) -> list[int]:
        key = (peer, target.category)
        r = self._rank_cache.get(key)
        if r is None:
            base = self._base_cache.get(peer)
            if base is None:
                base = self._base_cache[peer] = _base_order(peer, self.graph, self.ledgers, self.classify)
            r = self._rank_cache[key] = _by_interest(base, target.category, self.profiles)
        return r

    def fanout_at(self, peer: int) -> int:
        f = self._fanout_cache.get(peer)
        if f is None:
            f = fanout(self.graph.prob_com(peer), self.params.base_fanout)
            self._fanout_cache[peer] = f
        return f

    def make_query(self, qid: int, origin: int, target: FileId) -> Query:
        p = self.graph.prob_com(origin)
        ttl = self.params.ttl_dfs if self.fanout_at(origin) == 1 else self.params.ttl_bfs
        return Query(qid, origin, target, ttl, origin, p)

    def _trace(self, qid: int, hop: int, src: int, dst: int, action: str) -> None:
        if self.trace_out is not None:
            self.trace_out.write(f"{qid} {hop} {src} {dst} {action}\n")

    def execute(self, query: Query) -> QueryResult:
        """Propagate ``query`` synchronously, one hop per round.

        A peer processes a query at most once: the first copy it accepts in
        the earliest round. A blocked copy does not mark the receiver as
        visited, so another sender may still deliver the query.
        """
        origin, target, ttl = query.origin, query.target, query.ttl_remaining
        res = QueryResult(query.id, origin, target, ttl)
        visited = {origin}
        frontier = [origin] if ttl > 0 else []
        tracing = self.trace_out is not None
        hop = 0
        while frontier:
            hop += 1
            sends: list[tuple[int, int]] = []
            for u in frontier:
                k = self.fanout_at(u)
                for v in self.ranked(u, target):
                    if v not in visited:
                        sends.append((u, v))
                        if tracing:
                            self._trace(query.id, hop, u, v, "forward")
                        k -= 1
                        if k == 0:
                            break
            res.messages_sent += len(sends)
            frontier = []
            for u, v in sends:
                if v in visited:
                    continue
                if self.classify(v, u) is TrustClass.MALICIOUS:
                    res.blocked_count += 1
                    if tracing:
                        self._trace(query.id, hop, u, v, "block")
                    continue
                visited.add(v)
                if self.responds(v, target):
                    res.responders.append(v)
                    res.hops_to_match[v] = hop
                    if tracing:
                        self._trace(query.id, hop, u, v, "match")
                if hop < ttl:
                    frontier.append(v)
                elif tracing:
                    self._trace(query.id, hop, u, v, "ttl_expire")
        res.visited = len(visited)
        return res


def execute_query(
    query: Query,
    graph: OverlayGraph,
    ledgers: Sequence[TrustLedger],
    libraries: Sequence[set[FileId]],
    profiles: Sequence[InterestProfile],
    params: SearchParams | None = None,
    recommend: Recommender = honest_recommendation,
) -> QueryResult:
    return SearchEngine(graph, ledgers, libraries, profiles, params, recommend).execute(query)
