"""Run configuration with validation and lossless dict round-trip."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import ConfigError


@dataclass
class RunConfig:
    # overlay
    n_peers: int = 6000
    n_edges_target: int = 18000
    edge_limit: float = 2.0
    # content
    n_categories: int = 32
    zipf_alpha: float = 0.8
    files_per_category: int = 100
    copies_per_peer: int = 60
    interests_min: int = 3
    interests_max: int = 6
    query_rate_lambda: float = 1.0
    query_retries: int = 5
    # search
    ttl_bfs: int = 5
    ttl_dfs: int = 10
    base_fanout: int = 2
    # behavior / adaptation
    pct_malicious: float = 0.1
    degree_of_deception: float = 0.1
    degree_of_rewiring: float = 0.3
    malicious_respond_all: bool = False
    # run
    n_generations: int = 100
    rng_seed: int = 0
    debug: bool = False

    @property
    def m_attach(self) -> int:
        """Preferential-attachment edges per new node to approach the edge target."""
        return max(1, round(self.n_edges_target / self.n_peers))

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = sorted(set(d) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}", keys=unknown)
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        bad = []
        for k, v in d.items():
            t = types[k]
            try:
                kwargs[k] = _coerce(v, t)
            except (TypeError, ValueError):
                bad.append(k)
        if bad:
            raise ConfigError(f"wrongly typed config values: {', '.join(bad)}", keys=bad)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "RunConfig":
        d = self.to_dict()
        d.update(changes)
        return RunConfig.from_dict(d)

    def validate(self) -> None:
        problems: dict[str, str] = {}

        def need(key: str, ok: bool, why: str) -> None:
            if not ok:
                problems[key] = why

        need("n_peers", self.n_peers >= 2, "must be >= 2")
        need("n_edges_target", self.n_edges_target >= 1, "must be >= 1")
        if "n_peers" not in problems:
            need("n_edges_target", self.m_attach < self.n_peers, "implies attachment >= n_peers")
        need("edge_limit", self.edge_limit > 1.0, "must be > 1 (community probability divides by edge_limit - 1)")
        need("n_categories", self.n_categories >= 1, "must be >= 1")
        need("zipf_alpha", self.zipf_alpha >= 0, "must be >= 0")
        need("files_per_category", self.files_per_category >= 1, "must be >= 1")
        need("copies_per_peer", self.copies_per_peer >= 0, "must be >= 0")
        need("interests_min", 1 <= self.interests_min <= self.n_categories, "must be in [1, n_categories]")
        need("interests_max", self.interests_max >= self.interests_min, "must be >= interests_min")
        need("query_rate_lambda", self.query_rate_lambda > 0, "must be > 0")
        need("query_retries", self.query_retries >= 0, "must be >= 0")
        need("ttl_bfs", self.ttl_bfs >= 1, "must be >= 1")
        need("ttl_dfs", self.ttl_dfs >= 1, "must be >= 1")
        need("base_fanout", self.base_fanout >= 1, "must be >= 1")
        need("pct_malicious", 0.0 <= self.pct_malicious <= 1.0, "must be a fraction in [0, 1]")
        need("degree_of_deception", 0.0 <= self.degree_of_deception <= 1.0, "must be in [0, 1]")
        need("degree_of_rewiring", 0.0 <= self.degree_of_rewiring <= 1.0, "must be in [0, 1]")
        need("n_generations", self.n_generations >= 0, "must be >= 0")
        if problems:
            msg = "; ".join(f"{k} {why} (got {getattr(self, k)!r})" for k, why in problems.items())
            raise ConfigError(f"invalid config: {msg}", keys=list(problems))


def _coerce(v, t):
    if t in ("bool", bool):
        if isinstance(v, bool):
            return v
        raise TypeError(v)
    if t in ("int", int):
        if isinstance(v, bool):
            raise TypeError(v)
        if isinstance(v, float) and not v.is_integer():
            raise ValueError(v)
        return int(v)
    if t in ("float", float):
        if isinstance(v, bool):
            raise TypeError(v)
        return float(v)
    return v
