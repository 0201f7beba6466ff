import io

import numpy as np
import pytest

from trustp2p import RunConfig, Simulation, run
from trustp2p.content import FileId
from trustp2p.engine import (
    BehaviorKind,
    assign_behaviors,
    read_metrics_csv,
    serve_file,
    write_metrics_csv,
)
from trustp2p.metrics import GenerationMetrics, compute_ar, compute_ear, compute_qmr

SMALL = dict(n_peers=150, n_edges_target=450, files_per_category=30, copies_per_peer=20, n_generations=6)


def small(**kw):
    return RunConfig(**{**SMALL, **kw})


def csv_text(series):
    buf = io.StringIO()
    write_metrics_csv(series, buf)
    return buf.getvalue()


class TestServe:
    def test_good_always_authentic(self):
        rng = np.random.default_rng(0)
        assert all(serve_file(BehaviorKind.GOOD, 0.0, rng) for _ in range(100))

    def test_no_deception_always_fake(self):
        rng = np.random.default_rng(0)
        assert not any(serve_file(BehaviorKind.MALICIOUS, 0.0, rng) for _ in range(1000))

    def test_deception_rate(self):
        rng = np.random.default_rng(1)
        rate = np.mean([serve_file(BehaviorKind.MALICIOUS, 0.1, rng) for _ in range(100_000)])
        assert abs(rate - 0.1) < 0.01

    def test_behavior_count(self):
        b = assign_behaviors(1000, 0.1, np.random.default_rng(0))
        assert sum(x is BehaviorKind.MALICIOUS for x in b) == 100


def test_same_seed_same_csv():
    a = csv_text(run(small(rng_seed=3, pct_malicious=0.2)))
    b = csv_text(run(small(rng_seed=3, pct_malicious=0.2)))
    c = csv_text(run(small(rng_seed=4, pct_malicious=0.2)))
    assert a == b
    assert a != c


def test_generation_bookkeeping_is_consistent():
    sim = Simulation(small(rng_seed=5, pct_malicious=0.3, debug=True))
    for _ in range(5):
        m = sim.run_generation()
        log = sim.last_log
        answered = [r for r in log.records if r.answered]
        assert len(answered) == len(log.outcomes)
        assert sorted(r.attempts for r in answered) == sorted(o.attempts for o in log.outcomes.values())
        assert (m.ar_good, m.ar_malicious) == compute_ar(log.records)
        assert (m.qmr_good, m.qmr_malicious) == compute_qmr(log.records)
        assert m.ear == compute_ear(log.records)
        n_m = sum(1 for _, _, k in sim.graph.edges() if k.value == "M")
        total = sum(sim.graph.community_degree(x) for x in range(sim.config.n_peers))
        assert total == 2 * n_m


def test_zero_rewiring_keeps_topology():
    sim = Simulation(small(rng_seed=1, pct_malicious=0.2, degree_of_rewiring=0.0))
    before = sim.graph.edgelist_text()
    for _ in range(4):
        sim.run_generation()
        assert sim.last_log.changes == []
    assert sim.graph.edgelist_text() == before


def test_no_malicious_community_only_grows():
    sim = Simulation(small(rng_seed=2, pct_malicious=0.0))
    prev = 0.0
    for _ in range(6):
        m = sim.run_generation()
        assert m.community_deg_malicious is None
        assert m.ear is None
        assert m.community_deg_good >= prev
        prev = m.community_deg_good
    assert prev > 0


def test_tiny_query_rate_gives_empty_generations():
    series = run(small(query_rate_lambda=1e-9, n_generations=3))
    for m in series:
        assert m.messages == 0
        assert m.ar_good is None and m.qmr_good is None and m.ear is None


def test_single_query_to_good_neighbor():
    sim = Simulation(RunConfig(n_peers=2, n_edges_target=1, pct_malicious=0.0, copies_per_peer=0))
    target = FileId(0, 1)
    sim.libraries[1].add(target)
    sim.issue_queries = lambda: [(0, 0, target)]
    m = sim.run_generation()
    assert (m.ar_good, m.qmr_good, m.messages) == (1.0, 0.0, 1)
    assert target in sim.libraries[0]
    assert sim.ledgers[0].score(1) == 1.0


def test_malicious_recommendations_lie():
    sim = Simulation(small(pct_malicious=0.5))
    bad = sim.malicious.index(True)
    good = sim.malicious.index(False)
    other_bad = sim.malicious.index(True, bad + 1)
    assert sim.recommend(bad, good, sim.ledgers) == -1.0
    assert sim.recommend(bad, other_bad, sim.ledgers) == 1.0
    assert sim.recommend(good, bad, sim.ledgers) is None


def test_trace_written():
    buf = io.StringIO()
    run(small(n_generations=1), trace_out=buf)
    lines = buf.getvalue().splitlines()
    assert lines
    assert {line.split()[4] for line in lines} <= {"forward", "match", "block", "ttl_expire"}


def test_csv_round_trip_with_absent_values():
    series = [GenerationMetrics(0, 1.0, None, None, 0.25, None, 1.5, None, 12)]
    text = csv_text(series)
    assert text.splitlines()[0] == (
        "generation,ar_good,ar_malicious,ear,qmr_good,qmr_malicious,"
        "community_deg_good,community_deg_malicious,messages"
    )
    assert text.splitlines()[1] == "0,1.0,,,0.25,,1.5,,12"
    assert read_metrics_csv(io.StringIO(text)) == series


def test_on_generation_callback():
    seen = []
    run(small(n_generations=3), on_generation=lambda sim, m: seen.append((sim.generation, m.generation)))
    assert seen == [(1, 0), (2, 1), (3, 2)]


def test_invalid_config_rejected():
    from trustp2p import ConfigError

    with pytest.raises(ConfigError):
        Simulation(RunConfig(edge_limit=1.0))
