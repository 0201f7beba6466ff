"""Download from the best-reputed responder, rate it, and rewire.

After a search, the requester tries responders in order of its trust in them
until it gets an authentic copy. Every attempt is rated in the requester's
ledger. A provider that served a fake loses its community link to the
requester; the provider that served the authentic copy may gain one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .content import FileId
from .overlay import OverlayGraph
from .trust import Recommender, TrustClass, TrustLedger, check_trust_rating, honest_recommendation


@dataclass
class DownloadOutcome:
    origin: int
    providers_tried: list[int] = field(default_factory=list)
    authentic: list[bool] = field(default_factory=list)

    @property
    def attempts(self) -> int:
        return len(self.providers_tried)

    @property
    def succeeded(self) -> bool:
        return bool(self.authentic) and self.authentic[-1]


def order_providers(origin: int, responders: Sequence[int], ledger: TrustLedger) -> list[int]:
    """Responders by descending trust score (unknown = 0), then peer id."""
    def key(p: int):
        s = ledger.score(p)
        return (-(s if s is not None else 0.0), p)
    return sorted(responders, key=key)


def select_and_download(
    origin: int,
    responders: Sequence[int],
    ledgers: Sequence[TrustLedger],
    serve: Callable[[int], bool],
    library: set[FileId] | None = None,
    target: FileId | None = None,
) -> DownloadOutcome:
    """Try providers best-first until one serves an authentic file.

    ``serve(provider)`` decides authenticity of one download. Each attempt is
    rated +1/-1 in ``origin``'s ledger. On success ``target`` joins ``library``.
    """
    if not responders:
        raise ValueError("select_and_download needs at least one responder")
    ledger = ledgers[origin]
    out = DownloadOutcome(origin)
    for p in order_providers(origin, responders, ledger):
        ok = serve(p)
        ledger.record(p, 1 if ok else -1)
        out.providers_tried.append(p)
        out.authentic.append(ok)
        if ok:
            if library is not None and target is not None:
                library.add(target)
            break
    return out


def adapt_topology(
    origin: int,
    outcome: DownloadOutcome,
    graph: OverlayGraph,
    ledgers: Sequence[TrustLedger],
    degree_of_rewiring: float,
    rng: np.random.Generator,
    recommend: Recommender = honest_recommendation,
) -> list[tuple[str, int, int]]:
    """Apply link deletions and at most one link addition.

    Returns the applied changes as ``("del" | "add", origin, provider)``.
    """
    changes = []
    for p, ok in zip(outcome.providers_tried, outcome.authentic):
        if not ok and graph.delete_community_link(origin, p):
            changes.append(("del", origin, p))
    if outcome.succeeded:
        provider = outcome.providers_tried[-1]
        if graph.has_edge(origin, provider):
            return changes
        if rng.random() >= degree_of_rewiring:
            return changes
        # The provider vetoes requesters it considers malicious.
        verdict = check_trust_rating(provider, origin, ledgers, graph.neighbors(provider), recommend)
        if verdict is TrustClass.MALICIOUS:
            return changes
        if graph.add_community_link(origin, provider):
            changes.append(("add", origin, provider))
    return changes
