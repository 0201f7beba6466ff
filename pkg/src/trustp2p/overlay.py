"""Overlay topology: a power-law graph of permanent connectivity links plus
trust-earned community links whose growth is capped per peer.

Each peer may grow from its initial (generated) degree up to
``edge_limit * initial_degree``. Only community links can be added or removed.
"""

from __future__ import annotations

import enum
import io
import math
from typing import Iterable, Iterator, TextIO

import numpy as np

from .errors import ConfigError, ParameterError

# Slack for the float product edge_limit * initial_degree.
_EPS = 1e-9


class LinkKind(enum.Enum):
    CONNECTIVITY = "C"
    COMMUNITY = "M"


class OverlayGraph:
    """Undirected simple graph over peers ``0..n-1`` with tagged edges.

    ``debug=True`` re-checks the relative-connectivity bound after every
    mutation and raises ``AssertionError`` on a violation.
    """

    def __init__(self, n_peers: int, edge_limit: float = 2.0, debug: bool = False):
        if n_peers < 1:
            raise ParameterError(f"n_peers must be positive, got {n_peers}")
        if not edge_limit > 1.0:
            raise ConfigError(f"edge_limit must be > 1, got {edge_limit}", keys=["edge_limit"])
        self.n_peers = n_peers
        self.edge_limit = float(edge_limit)
        self.debug = debug
        self._adj: list[dict[int, LinkKind]] = [{} for _ in range(n_peers)]
        self._n_community = [0] * n_peers
        self.initial_degree: list[int] = [0] * n_peers
        self.mutations = 0

    @classmethod
    def from_edges(
        cls,
        n_peers: int,
        edges: Iterable[tuple[int, int]],
        edge_limit: float = 2.0,
        debug: bool = False,
    ) -> "OverlayGraph":
        """Build a graph whose connectivity links are ``edges``.

        Initial degrees are taken from this edge set; every peer must have at
        least one edge.
        """
        g = cls(n_peers, edge_limit=edge_limit, debug=debug)
        for u, v in edges:
            if u == v:
                raise ParameterError(f"self-loop on peer {u}")
            if v in g._adj[u]:
                raise ParameterError(f"parallel edge {u}-{v}")
            g._adj[u][v] = LinkKind.CONNECTIVITY
            g._adj[v][u] = LinkKind.CONNECTIVITY
        for x in range(n_peers):
            d = len(g._adj[x])
            if d == 0:
                raise ParameterError(f"peer {x} has no connectivity links")
            g.initial_degree[x] = d
        return g

    # -- queries -----------------------------------------------------------

    def _check_peer(self, x: int) -> None:
        if not 0 <= x < self.n_peers:
            raise KeyError(f"unknown peer {x}")

    def degree(self, x: int) -> int:
        self._check_peer(x)
        return len(self._adj[x])

    def community_degree(self, x: int) -> int:
        self._check_peer(x)
        return self._n_community[x]

    def neighbors(self, x: int) -> dict[int, LinkKind]:
        """Read-only view (by convention) of ``x``'s neighbors and link kinds."""
        self._check_peer(x)
        return self._adj[x]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def kind(self, u: int, v: int) -> LinkKind | None:
        return self._adj[u].get(v)

    def ric(self, x: int) -> float:
        """Relative increase in connectivity: current over initial degree."""
        self._check_peer(x)
        return len(self._adj[x]) / self.initial_degree[x]

    def prob_com(self, x: int) -> float:
        """Fraction of the allowed extra degree that ``x`` has acquired, in [0, 1]."""
        if not self.edge_limit > 1.0:
            raise ConfigError(f"edge_limit must be > 1, got {self.edge_limit}", keys=["edge_limit"])
        self._check_peer(x)
        init = self.initial_degree[x]
        p = (len(self._adj[x]) - init) / (init * (self.edge_limit - 1.0))
        return min(1.0, max(0.0, p))

    def max_degree(self, x: int) -> int:
        return math.floor(self.edge_limit * self.initial_degree[x] + _EPS)

    def n_edges(self) -> int:
        return sum(len(a) for a in self._adj) // 2

    def edges(self) -> Iterator[tuple[int, int, LinkKind]]:
        """All edges as ``(u, v, kind)`` with ``u < v``, sorted."""
        for u in range(self.n_peers):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v]

    # -- mutations ---------------------------------------------------------

    def add_community_link(self, i: int, j: int) -> bool:
        """Add a community link if none exists and both peers stay within bound."""
        self._check_peer(i)
        self._check_peer(j)
        if i == j:
            raise ParameterError("cannot link a peer to itself")
        if j in self._adj[i]:
            return False
        if len(self._adj[i]) + 1 > self.edge_limit * self.initial_degree[i] + _EPS:
            return False
        if len(self._adj[j]) + 1 > self.edge_limit * self.initial_degree[j] + _EPS:
            return False
        self._adj[i][j] = LinkKind.COMMUNITY
        self._adj[j][i] = LinkKind.COMMUNITY
        self._n_community[i] += 1
        self._n_community[j] += 1
        self.mutations += 1
        if self.debug:
            self._assert_bound(i)
            self._assert_bound(j)
        return True

    def delete_community_link(self, i: int, j: int) -> bool:
        """Remove the ``i``-``j`` edge only if it is a community link."""
        if not (0 <= i < self.n_peers and 0 <= j < self.n_peers):
            return False
        if self._adj[i].get(j) is not LinkKind.COMMUNITY:
            return False
        del self._adj[i][j]
        del self._adj[j][i]
        self._n_community[i] -= 1
        self._n_community[j] -= 1
        self.mutations += 1
        if self.debug:
            self._assert_bound(i)
            self._assert_bound(j)
        return True

    # -- invariants / IO -----------------------------------------------------

    def _assert_bound(self, x: int) -> None:
        assert len(self._adj[x]) <= self.edge_limit * self.initial_degree[x] + _EPS, (
            f"peer {x}: degree {len(self._adj[x])} exceeds "
            f"{self.edge_limit} x initial {self.initial_degree[x]}"
        )

    def check_invariants(self) -> None:
        """Raise ``AssertionError`` if any structural invariant is broken."""
        for u in range(self.n_peers):
            n_conn = 0
            for v, k in self._adj[u].items():
                assert v != u, f"self-loop at {u}"
                assert self._adj[v].get(u) is k, f"asymmetric edge {u}-{v}"
                if k is LinkKind.CONNECTIVITY:
                    n_conn += 1
            assert n_conn == self.initial_degree[u], f"connectivity degree of {u} changed"
            assert len(self._adj[u]) - n_conn == self._n_community[u]
            self._assert_bound(u)

    def connectivity_edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v, k in self.edges() if k is LinkKind.CONNECTIVITY]

    def write_edgelist(self, out: TextIO) -> None:
        """Write ``u v kind`` lines (kind C or M), ``u < v``, sorted."""
        for u, v, k in self.edges():
            out.write(f"{u} {v} {k.value}\n")

    def edgelist_text(self) -> str:
        buf = io.StringIO()
        self.write_edgelist(buf)
        return buf.getvalue()


def generate_power_law(
    n_peers: int,
    m_attach: int,
    rng_seed: int,
    edge_limit: float = 2.0,
    debug: bool = False,
) -> OverlayGraph:
    """Barabasi-Albert preferential attachment graph.

    Starts from a star on ``m_attach + 1`` nodes; every later node attaches to
    ``m_attach`` distinct existing nodes chosen proportionally to degree.
    The result is connected and has ``m_attach * (n_peers - m_attach)`` edges.
    """
    if m_attach < 1 or n_peers <= m_attach:
        raise ParameterError(f"need n_peers > m_attach >= 1, got n_peers={n_peers}, m_attach={m_attach}")
    rng = np.random.default_rng(rng_seed)
    edges: list[tuple[int, int]] = [(0, v) for v in range(1, m_attach + 1)]
    # Each node appears once per incident edge, so a uniform pick is degree-proportional.
    repeated: list[int] = [0] * m_attach + list(range(1, m_attach + 1))
    for new in range(m_attach + 1, n_peers):
        targets: set[int] = set()
        chosen: list[int] = []
        while len(chosen) < m_attach:
            t = repeated[int(rng.integers(len(repeated)))]
            if t not in targets:
                targets.add(t)
                chosen.append(t)
        for t in chosen:
            edges.append((t, new))
            repeated.append(t)
            repeated.append(new)
    return OverlayGraph.from_edges(n_peers, edges, edge_limit=edge_limit, debug=debug)
