"""Per-generation search-quality metrics.

AR  - share of answered queries whose first download was authentic.
EAR - 100 x (mean reciprocal attempt count of good peers minus that of
      malicious peers), where a query that never yields an authentic copy
      needs unboundedly many attempts.
QMR - share of searches that returned no responder.

Rates with an empty denominator are ``None`` rather than 0.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, fields
from typing import Iterable, Sequence


@dataclass
class QueryRecord:
    origin: int
    malicious: bool
    answered: bool
    attempts: int = 0
    succeeded: bool = False


@dataclass
class GenerationMetrics:
    generation: int
    ar_good: float | None = None
    ar_malicious: float | None = None
    ear: float | None = None
    qmr_good: float | None = None
    qmr_malicious: float | None = None
    community_deg_good: float | None = None
    community_deg_malicious: float | None = None
    messages: int = 0

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def compute_ar(records: Iterable[QueryRecord]) -> tuple[float | None, float | None]:
    hits = [0, 0]
    answered = [0, 0]
    for r in records:
        if not r.answered:
            continue
        t = int(r.malicious)
        answered[t] += 1
        if r.succeeded and r.attempts == 1:
            hits[t] += 1
    return _ratio(hits[0], answered[0]), _ratio(hits[1], answered[1])


def reciprocal_attempts(r: QueryRecord) -> float:
    """1/P for one query; 0 when no authentic copy was obtained (P unbounded)."""
    return 1.0 / r.attempts if r.succeeded else 0.0


def compute_ear(records: Iterable[QueryRecord]) -> float | None:
    """Effective attempt ratio in [-100, 100].

    Every peer that issued a query contributes the mean of 1/P over its
    queries; misses and exhausted downloads count as 0. Peer values are
    averaged within each type.
    """
    per_peer: dict[int, list[float]] = defaultdict(list)
    kind: dict[int, bool] = {}
    for r in records:
        per_peer[r.origin].append(reciprocal_attempts(r))
        kind[r.origin] = r.malicious
    good = [sum(v) / len(v) for p, v in per_peer.items() if not kind[p]]
    bad = [sum(v) / len(v) for p, v in per_peer.items() if kind[p]]
    if not good or not bad:
        return None
    return (sum(good) / len(good) - sum(bad) / len(bad)) * 100.0


def compute_qmr(records: Iterable[QueryRecord]) -> tuple[float | None, float | None]:
    misses = [0, 0]
    total = [0, 0]
    for r in records:
        t = int(r.malicious)
        total[t] += 1
        if not r.answered:
            misses[t] += 1
    return _ratio(misses[0], total[0]), _ratio(misses[1], total[1])


def mean_community_degree(community_degree: Sequence[int], malicious: Sequence[bool]) -> tuple[float | None, float | None]:
    sums = [0, 0]
    counts = [0, 0]
    for d, m in zip(community_degree, malicious):
        sums[int(m)] += d
        counts[int(m)] += 1
    return _ratio(sums[0], counts[0]), _ratio(sums[1], counts[1])
