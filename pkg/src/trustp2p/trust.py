"""Per-peer transaction ledgers and trust classification.

A peer remembers its download history with at most 32 other peers (least
recently used entry evicted). The score for a partner is the signed fraction
``(pos - neg) / (pos + neg)``, in [-1, 1].
"""

from __future__ import annotations

import enum
import json
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence, TextIO

LEDGER_CAPACITY = 32
TRUSTED_ABOVE = 0.5


class TrustClass(enum.Enum):
    TRUSTWORTHY = "trustworthy"
    MALICIOUS = "malicious"
    UNCERTAIN = "uncertain"
    UNKNOWN = "unknown"


@dataclass
class TransactionRecord:
    positives: int = 0
    negatives: int = 0

    @property
    def score(self) -> float:
        return (self.positives - self.negatives) / (self.positives + self.negatives)


class TrustLedger:
    """LRU map of partner peer -> :class:`TransactionRecord`.

    ``record`` and ``get`` refresh recency; ``peek`` and ``score`` do not,
    so that reading trust (including recommendation polling) never reorders
    or mutates the ledger.
    """

    def __init__(self, capacity: int = LEDGER_CAPACITY):
        if capacity < 1:
            raise ValueError("ledger capacity must be positive")
        self.capacity = capacity
        self._entries: OrderedDict[int, TransactionRecord] = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, peer: int) -> bool:
        return peer in self._entries

    def __iter__(self) -> Iterator[int]:
        """Partners from least to most recently used."""
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def record(self, peer: int, outcome: int) -> int | None:
        """Log one rated download from ``peer``. Returns the evicted peer, if any."""
        if outcome not in (1, -1):
            raise ValueError(f"outcome must be +1 or -1, got {outcome}")
        rec = self._entries.get(peer)
        evicted = None
        if rec is None:
            if len(self._entries) >= self.capacity:
                evicted, _ = self._entries.popitem(last=False)
            rec = self._entries[peer] = TransactionRecord()
        else:
            self._entries.move_to_end(peer)
        if outcome == 1:
            rec.positives += 1
        else:
            rec.negatives += 1
        return evicted

    def get(self, peer: int) -> TransactionRecord | None:
        rec = self._entries.get(peer)
        if rec is not None:
            self._entries.move_to_end(peer)
        return rec

    def peek(self, peer: int) -> TransactionRecord | None:
        return self._entries.get(peer)

    def score(self, peer: int) -> float | None:
        rec = self._entries.get(peer)
        return None if rec is None else rec.score


def record_transaction(ledger: TrustLedger, peer: int, outcome: int) -> None:
    ledger.record(peer, outcome)


def score(ledger: TrustLedger, peer: int) -> float | None:
    return ledger.score(peer)


def classify(s: float | None) -> TrustClass:
    if s is None:
        return TrustClass.UNKNOWN
    if s > TRUSTED_ABOVE:
        return TrustClass.TRUSTWORTHY
    if s < 0:
        return TrustClass.MALICIOUS
    return TrustClass.UNCERTAIN


# Recommender hook: (recommender, subject, ledgers) -> score or None.
Recommender = Callable[[int, int, Sequence[TrustLedger]], "float | None"]


def honest_recommendation(recommender: int, subject: int, ledgers: Sequence[TrustLedger]) -> float | None:
    return ledgers[recommender].score(subject)


def check_trust_rating(
    asker: int,
    subject: int,
    ledgers: Sequence[TrustLedger],
    neighbors: Mapping[int, object],
    recommend: Recommender = honest_recommendation,
) -> TrustClass:
    """How ``asker`` classifies ``subject``, falling back on recommendations.

    Direct Trustworthy/Malicious knowledge is final. Otherwise the asker polls
    those of its ``neighbors`` it itself rates Trustworthy and classifies the
    mean of their answers; no answers means Unknown.
    """
    own = ledgers[asker].peek(subject)
    own_class = classify(None if own is None else own.score)
    if own_class is TrustClass.TRUSTWORTHY or own_class is TrustClass.MALICIOUS:
        return own_class
    total = 0.0
    count = 0
    # Only ledger partners can be Trustworthy, so scan the (<= 32) ledger, not the neighbor set.
    for peer, rec in ledgers[asker].items():
        if peer == subject or rec.score <= TRUSTED_ABOVE or peer not in neighbors:
            continue
        answer = recommend(peer, subject, ledgers)
        if answer is not None:
            total += answer
            count += 1
    if count == 0:
        return TrustClass.UNKNOWN
    return classify(total / count)


def dump_ledgers(ledgers: Sequence[TrustLedger], out: TextIO) -> None:
    """JSON lines ``{peer, subject, pos, neg, score}``, LRU order per peer."""
    for peer, ledger in enumerate(ledgers):
        for subject, rec in ledger.items():
            out.write(json.dumps({
                "peer": peer,
                "subject": subject,
                "pos": rec.positives,
                "neg": rec.negatives,
                "score": rec.score,
            }) + "\n")
