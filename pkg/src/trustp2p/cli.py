"""Command-line front end: config files, sweeps and replicated runs.

Config files are plain ``key = value`` lines; ``#`` starts a comment. Values
are Python literals (``0.1``, ``true``/``false`` are also accepted); a list
value turns that key into a sweep axis. Two extra keys are understood besides
the run parameters: ``replicates`` (seeds per sweep point) and ``output_dir``.

Example::

    n_peers = 1000
    n_edges_target = 3000
    pct_malicious = [0.1, 0.2, 0.4, 0.6]
    replicates = 5
"""

from __future__ import annotations

import argparse
import ast
import itertools
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .config import RunConfig
from .engine import run, write_metrics_csv
from .errors import ConfigError
from .metrics import GenerationMetrics

log = logging.getLogger("trustp2p")

LOG_ENV = "TRUSTP2P_LOG_LEVEL"
MANIFEST = "manifest.json"
_SPECIAL = ("replicates", "output_dir")
_BARE = {"true": True, "false": False, "True": True, "False": False}


@dataclass
class ExperimentSpec:
    base: RunConfig = field(default_factory=RunConfig)
    sweep: list[tuple[str, list]] = field(default_factory=list)
    replicates: int = 1
    output_dir: Path = Path("results")

    def points(self) -> list[dict]:
        """Every combination of sweep values, in file order."""
        if not self.sweep:
            return [{}]
        keys = [k for k, _ in self.sweep]
        return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in self.sweep))]


def _literal(text: str):
    if text in _BARE:
        return _BARE[text]
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        # bare words such as a directory name
        return text


def parse_config(text: str) -> ExperimentSpec:
    """Parse a config document; errors name the key and line."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, val = body.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key or not val:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key in values:
            raise ConfigError(f"line {lineno}: {key} given twice (first on line {lines[key]})", keys=[key], line=lineno)
        if key not in _SPECIAL and key not in RunConfig.keys():
            raise ConfigError(f"line {lineno}: unknown key {key!r}", keys=[key], line=lineno)
        values[key] = _literal(val)
        lines[key] = lineno

    def fail(key: str, why: str):
        return ConfigError(f"line {lines[key]}: {key} {why}", keys=[key], line=lines[key])

    replicates = values.pop("replicates", 1)
    if isinstance(replicates, bool) or not isinstance(replicates, int) or replicates < 1:
        raise fail("replicates", f"must be a positive integer (got {replicates!r})")
    output_dir = Path(str(values.pop("output_dir", "results")))

    fixed = {k: v for k, v in values.items() if not isinstance(v, list)}
    sweep = [(k, v) for k, v in values.items() if isinstance(v, list)]
    for k, v in sweep:
        if not v:
            raise fail(k, "sweep list is empty")
    try:
        base = RunConfig.from_dict(fixed)
    except ConfigError as e:
        key = e.keys[0] if e.keys else None
        if key in lines:
            raise ConfigError(f"line {lines[key]}: {e}", keys=e.keys, line=lines[key]) from None
        raise
    for k, vals in sweep:
        for v in vals:
            try:
                base.replace(**{k: v})
            except ConfigError as e:
                raise ConfigError(f"line {lines[k]}: sweep value {v!r}: {e}", keys=[k], line=lines[k]) from None
    return ExperimentSpec(base=base, sweep=sweep, replicates=replicates, output_dir=output_dir)


def point_label(point: dict) -> str:
    if not point:
        return "base"
    return ",".join(f"{k}={v}" for k, v in point.items())


def mean_series(runs: list[list[GenerationMetrics]]) -> list[dict]:
    """Per-generation mean of each metric over replicates; missing values skipped."""
    names = GenerationMetrics.field_names()
    out = []
    for gen_rows in zip(*runs):
        row = {"generation": gen_rows[0].generation}
        for n in names[1:]:
            vals = [getattr(m, n) for m in gen_rows if getattr(m, n) is not None]
            row[n] = sum(vals) / len(vals) if vals else None
        out.append(row)
    return out


def _write_mean_csv(rows: list[dict], path: Path) -> None:
    names = GenerationMetrics.field_names()
    with open(path, "w", newline="") as f:
        f.write(",".join(names) + "\n")
        for row in rows:
            f.write(",".join("" if row[n] is None else repr(row[n]) for n in names) + "\n")


def run_experiment(spec: ExperimentSpec, trace: bool = False, dump_graph: int = 0) -> int:
    """Run every (sweep point, replicate); return 0 iff all completed."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    means = []
    ok = True
    for point in spec.points():
        label = point_label(point)
        cfg_point = spec.base.replace(**point)
        completed = []
        for r in range(spec.replicates):
            cfg = cfg_point.replace(rng_seed=spec.base.rng_seed + r)
            name = f"{label}__seed{cfg.rng_seed}"
            entry = {"file": f"{name}.csv", "point": point, "seed": cfg.rng_seed, "config": cfg.to_dict()}
            log.info("running %s (%d generations)", name, cfg.n_generations)
            try:
                series = _run_one(cfg, out, name, trace, dump_graph)
                with open(out / entry["file"], "w", newline="") as f:
                    write_metrics_csv(series, f)
                completed.append(series)
                entry["status"] = "ok"
            except OSError as e:
                log.error("%s failed: %s", name, e)
                entry["status"] = "failed"
                entry["error"] = str(e)
                ok = False
            entries.append(entry)
        mean_file = f"{label}.mean.csv"
        if completed:
            try:
                _write_mean_csv(mean_series(completed), out / mean_file)
            except OSError as e:
                log.error("%s failed: %s", mean_file, e)
                ok = False
                mean_file = None
        else:
            mean_file = None
        means.append({"point": point, "file": mean_file, "replicates": len(completed),
                      "partial": len(completed) < spec.replicates})
    manifest = {
        "complete": ok,
        "replicates": spec.replicates,
        "sweep": [[k, v] for k, v in spec.sweep],
        "runs": entries,
        "means": means,
    }
    try:
        with open(out / MANIFEST, "w") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        log.error("could not write manifest: %s", e)
        return 1
    return 0 if ok else 1


def _run_one(cfg: RunConfig, out: Path, name: str, trace: bool, dump_graph: int) -> list[GenerationMetrics]:
    trace_f = open(out / f"{name}.trace", "w") if trace else None
    try:
        def on_generation(sim, metrics):
            if dump_graph and (sim.generation % dump_graph == 0):
                with open(out / f"{name}.g{sim.generation}.edges", "w") as f:
                    sim.graph.write_edgelist(f)
        return run(cfg, trace_out=trace_f, on_generation=on_generation if dump_graph else None)
    finally:
        if trace_f is not None:
            trace_f.close()


def rerun_from_manifest(manifest_path: Path, entry_index: int) -> list[GenerationMetrics]:
    """Re-run one recorded run from its resolved config."""
    with open(manifest_path) as f:
        manifest = json.load(f)
    return run(RunConfig.from_dict(manifest["runs"][entry_index]["config"]))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trustp2p",
        description="Simulate a trust-aware adaptive P2P overlay and write per-generation metrics as CSV.",
    )
    p.add_argument("--config", type=Path, help="key = value config file (default: all defaults)")
    p.add_argument("--seed", type=int, help="override rng_seed (first replicate)")
    p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    p.add_argument("--trace", action="store_true", help="write a per-run search event log")
    p.add_argument("--dump-graph", type=int, default=0, metavar="K",
                   help="write the overlay edge list every K generations")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        text = args.config.read_text() if args.config else ""
        spec = parse_config(text)
        if args.seed is not None:
            spec.base = spec.base.replace(rng_seed=args.seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2
    if args.dump_graph < 0:
        print("--dump-graph must be >= 0", file=sys.stderr)
        return 2
    if args.out is not None:
        spec.output_dir = args.out
    try:
        return run_experiment(spec, trace=args.trace, dump_graph=args.dump_graph)
    except OSError as e:
        print(f"output error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
