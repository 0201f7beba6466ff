"""Generation-by-generation simulation driver.

One generation: every peer issues a Poisson number of queries, all searches
run against the frozen state, then downloads, trust updates and rewiring are
replayed in query-id order, and metrics are taken.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .adaptation import DownloadOutcome, adapt_topology, select_and_download
from .config import RunConfig
from .content import (
    FileId,
    assign_profiles,
    build_zipf,
    pick_query_target,
    sample_query_count,
    seed_libraries,
)
from .metrics import (
    GenerationMetrics,
    QueryRecord,
    compute_ar,
    compute_ear,
    compute_qmr,
    mean_community_degree,
)
from .overlay import generate_power_law
from .search import SearchEngine, SearchParams
from .trust import TrustLedger

log = logging.getLogger(__name__)


class BehaviorKind(enum.Enum):
    GOOD = "good"
    MALICIOUS = "malicious"


def serve_file(behavior: BehaviorKind, deception: float, rng: np.random.Generator) -> bool:
    """Whether one download from a provider of this kind is authentic."""
    if behavior is BehaviorKind.GOOD:
        return True
    return bool(rng.random() < deception)


def assign_behaviors(n_peers: int, pct_malicious: float, rng: np.random.Generator) -> list[BehaviorKind]:
    n_bad = round(pct_malicious * n_peers)
    bad = set(rng.choice(n_peers, size=n_bad, replace=False).tolist()) if n_bad else set()
    return [BehaviorKind.MALICIOUS if i in bad else BehaviorKind.GOOD for i in range(n_peers)]


@dataclass
class GenerationLog:
    """Everything that happened in one generation, for tests and traces."""

    records: list[QueryRecord]
    outcomes: dict[int, DownloadOutcome]
    changes: list[tuple[str, int, int]]


class Simulation:
    def __init__(self, config: RunConfig, trace_out: TextIO | None = None):
        config.validate()
        self.config = c = config
        ss = np.random.SeedSequence(c.rng_seed)
        graph_ss, content_ss, behavior_ss, query_ss, serve_ss, rewire_ss = ss.spawn(6)
        self.graph = generate_power_law(
            c.n_peers, c.m_attach, int(graph_ss.generate_state(1)[0]),
            edge_limit=c.edge_limit, debug=c.debug,
        )
        content_rng = np.random.default_rng(content_ss)
        self.profiles = assign_profiles(
            c.n_peers, c.n_categories, content_rng, c.interests_min, c.interests_max, c.zipf_alpha
        )
        self.libraries: list[set[FileId]] = seed_libraries(
            self.profiles, c.files_per_category, c.copies_per_peer, content_rng, c.zipf_alpha
        )
        self.file_sampler = build_zipf(c.files_per_category, c.zipf_alpha)
        self.behaviors = assign_behaviors(c.n_peers, c.pct_malicious, np.random.default_rng(behavior_ss))
        self.malicious = [b is BehaviorKind.MALICIOUS for b in self.behaviors]
        self.ledgers = [TrustLedger() for _ in range(c.n_peers)]
        self.query_rng = np.random.default_rng(query_ss)
        self.serve_rng = np.random.default_rng(serve_ss)
        self.rewire_rng = np.random.default_rng(rewire_ss)
        self.engine = SearchEngine(
            self.graph, self.ledgers, self.libraries, self.profiles,
            SearchParams(c.base_fanout, c.ttl_bfs, c.ttl_dfs),
            recommend=self.recommend,
            responds=self.responds,
        )
        self.engine.trace_out = trace_out
        self.generation = 0
        self._next_qid = 0
        self.last_log: GenerationLog | None = None

    # -- peer behavior -------------------------------------------------------

    def recommend(self, recommender: int, subject: int, ledgers) -> float | None:
        """Honest peers report their score; malicious ones praise accomplices
        and slander good peers."""
        if self.malicious[recommender]:
            return 1.0 if self.malicious[subject] else -1.0
        return ledgers[recommender].score(subject)

    def responds(self, peer: int, target: FileId) -> bool:
        if self.malicious[peer] and self.config.malicious_respond_all:
            return True
        return target in self.libraries[peer]

    def serve(self, provider: int) -> bool:
        return serve_file(self.behaviors[provider], self.config.degree_of_deception, self.serve_rng)

    # -- generation ------------------------------------------------------------

    def issue_queries(self) -> list[tuple[int, int, FileId]]:
        c = self.config
        out = []
        for peer in range(c.n_peers):
            for _ in range(sample_query_count(c.query_rate_lambda, self.query_rng)):
                target = pick_query_target(
                    self.profiles[peer], self.file_sampler, self.libraries[peer],
                    self.query_rng, c.query_retries,
                )
                out.append((self._next_qid, peer, target))
                self._next_qid += 1
        return out

    def run_generation(self) -> GenerationMetrics:
        c = self.config
        gen = self.generation
        issued = self.issue_queries()

        self.engine.invalidate()
        results = [self.engine.execute(self.engine.make_query(qid, peer, target)) for qid, peer, target in issued]

        records: list[QueryRecord] = []
        outcomes: dict[int, DownloadOutcome] = {}
        changes: list[tuple[str, int, int]] = []
        messages = 0
        for res in results:
            messages += res.messages_sent
            rec = QueryRecord(res.origin, self.malicious[res.origin], bool(res.responders))
            if res.responders:
                out = select_and_download(
                    res.origin, res.responders, self.ledgers, self.serve,
                    self.libraries[res.origin], res.target,
                )
                changes.extend(adapt_topology(
                    res.origin, out, self.graph, self.ledgers,
                    c.degree_of_rewiring, self.rewire_rng, self.recommend,
                ))
                rec.attempts = out.attempts
                rec.succeeded = out.succeeded
                outcomes[res.query_id] = out
            records.append(rec)
        if c.debug:
            self.graph.check_invariants()

        ar_g, ar_m = compute_ar(records)
        qmr_g, qmr_m = compute_qmr(records)
        cd_g, cd_m = mean_community_degree(
            [self.graph.community_degree(x) for x in range(c.n_peers)], self.malicious
        )
        m = GenerationMetrics(
            generation=gen,
            ar_good=ar_g,
            ar_malicious=ar_m,
            ear=compute_ear(records),
            qmr_good=qmr_g,
            qmr_malicious=qmr_m,
            community_deg_good=cd_g,
            community_deg_malicious=cd_m,
            messages=messages,
        )
        self.last_log = GenerationLog(records, outcomes, changes)
        self.generation += 1
        log.debug("generation %d: %s", gen, m)
        return m


def run(config: RunConfig, trace_out: TextIO | None = None, on_generation=None) -> list[GenerationMetrics]:
    """Run ``config.n_generations`` generations and return the metric series.

    ``on_generation(sim, metrics)`` is called after each generation.
    """
    sim = Simulation(config, trace_out=trace_out)
    series = []
    for _ in range(config.n_generations):
        m = sim.run_generation()
        series.append(m)
        if on_generation is not None:
            on_generation(sim, m)
    return series


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_metrics_csv(series: Iterable[GenerationMetrics], out: TextIO) -> None:
    names = GenerationMetrics.field_names()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(names)
    for m in series:
        w.writerow([_fmt(getattr(m, n)) for n in names])


def read_metrics_csv(src: TextIO) -> list[GenerationMetrics]:
    rows = csv.DictReader(src)
    series = []
    for row in rows:
        kwargs = {}
        for k, v in row.items():
            if k in ("generation", "messages"):
                kwargs[k] = int(v)
            else:
                kwargs[k] = float(v) if v != "" else None
        series.append(GenerationMetrics(**kwargs))
    return series
