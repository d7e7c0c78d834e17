"""Static versus dynamic jointree experiments over generated network sets."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .benchgen import GenSpec, generate_network
from .inference import InferenceEngine, QueryStats
from .jointree import BasicJointree, build_family_graph, spanning_tree
from .network import BeliefNetwork
from .pruning import Query

CSV_COLUMNS = (
    "set_id",
    "nodes",
    "width",
    "avg_saving",
    "max_saving",
    "avg_max_sep_dynamic",
    "avg_max_sep_static",
    "reconfig_time_pct",
)
CLOCKS = ("wall", "steps")
REPETITIONS = 5


@dataclass
class RunRecord:
    network_id: str
    mode: str
    additions: int = 0
    multiplications: int = 0
    max_separator_size: float = 0.0
    reconfig_micros: float = 0.0
    inference_micros: float = 0.0
    reconfig_steps: int = 0
    queries: int = 0

    @property
    def ops(self) -> int:
        return self.additions + self.multiplications


@dataclass
class SetReport:
    set_id: int
    nodes: int
    width: int
    networks: int
    avg_saving: float
    max_saving: float
    avg_max_sep_dynamic: float
    avg_max_sep_static: float
    reconfig_time_pct: float
    savings: List[float] = field(default_factory=list)

    def row(self) -> Dict[str, str]:
        return {
            "set_id": str(self.set_id),
            "nodes": str(self.nodes),
            "width": str(self.width),
            "avg_saving": f"{self.avg_saving:.6f}",
            "max_saving": f"{self.max_saving:.6f}",
            "avg_max_sep_dynamic": f"{self.avg_max_sep_dynamic:.6f}",
            "avg_max_sep_static": f"{self.avg_max_sep_static:.6f}",
            "reconfig_time_pct": f"{self.reconfig_time_pct:.6f}",
        }


def _run(net: BeliefNetwork, bjt: BasicJointree, queries: Sequence[Query],
         mode: str, network_id: str) -> Tuple[RunRecord, List[Dict[int, object]]]:
    engine = InferenceEngine(net, bjt, reconfigure=(mode == "dynamic"), cache=True)
    rec = RunRecord(network_id, mode)
    max_seps = []
    answers = []
    for q in queries:
        answers.append(engine.answer_query(q))
        s: QueryStats = engine.last_stats
        max_seps.append(s.max_separator_size)
    t = engine.totals
    rec.additions = t.additions
    rec.multiplications = t.multiplications
    rec.reconfig_micros = t.reconfig_micros
    rec.inference_micros = t.inference_micros
    rec.reconfig_steps = t.reconfig_steps
    rec.queries = len(queries)
    rec.max_separator_size = float(np.mean(max_seps)) if max_seps else 0.0
    return rec, answers


def experiment1_queries(net: BeliefNetwork) -> List[Query]:
    """One prior query per leaf, in id order, without evidence."""
    return [Query({}, {leaf}) for leaf in net.leaves()]


def experiment2_queries(net: BeliefNetwork, seed: int) -> List[Query]:
    """Evidence churn: five rounds of fresh evidence nodes, each then resampled one by one."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    roots = frozenset(net.roots())
    non_roots = [i for i in range(net.n) if i not in roots]
    m = math.ceil(0.1 * len(non_roots))
    queries = []
    for _ in range(REPETITIONS):
        chosen = sorted(int(v) for v in rng.choice(non_roots, size=m, replace=False))
        evidence = {v: int(rng.integers(net.card(v))) for v in chosen}
        queries.append(Query(dict(evidence), roots))
        for v in chosen:
            evidence[v] = int(rng.integers(net.card(v)))
            queries.append(Query(dict(evidence), roots))
    return queries


def run_protocol(net: BeliefNetwork, queries: Sequence[Query], network_id: str = "net",
                 strategy: str = "minimize-lost-nodes", keep_answers: bool = False):
    """Replay one query stream in dynamic and static mode on a shared basic jointree."""
    bjt = spanning_tree(build_family_graph(net), strategy)
    dyn, dyn_answers = _run(net, bjt, queries, "dynamic", network_id)
    sta, sta_answers = _run(net, bjt, queries, "static", network_id)
    sta.reconfig_micros = 0.0
    sta.reconfig_steps = 0
    if keep_answers:
        return dyn, sta, dyn_answers, sta_answers
    return dyn, sta


def experiment1(net: BeliefNetwork, network_id: str = "net", strategy: str = "minimize-lost-nodes"):
    if not net.leaves():
        raise ValueError("network has no leaf")
    return run_protocol(net, experiment1_queries(net), network_id, strategy)


def experiment2(net: BeliefNetwork, seed: int, network_id: str = "net",
                strategy: str = "minimize-lost-nodes"):
    if not net.roots() or net.n - len(net.roots()) < 10:
        raise ValueError("experiment 2 needs a root and at least 10 non-root nodes")
    return run_protocol(net, experiment2_queries(net, seed), network_id, strategy)


@dataclass(frozen=True)
class SetConfig:
    nodes: int
    width: int
    count: int
    cardinality: int = 2


def parse_set_config(text: str) -> List[SetConfig]:
    """One set per line: ``nodes width count cardinality`` (``#`` comments)."""
    sets = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split("#", 1)[0].split()
        if not fields:
            continue
        if len(fields) not in (3, 4):
            raise ValueError(f"line {lineno}: expected 'nodes width count cardinality'")
        sets.append(SetConfig(*(int(f) for f in fields)))
    return sets


def saving_factor(dynamic: RunRecord, static: RunRecord) -> float:
    if dynamic.ops == 0:
        return 1.0 if static.ops == 0 else math.inf
    return static.ops / dynamic.ops


def summarize(set_id: int, cfg: SetConfig, pairs: Sequence[Tuple[RunRecord, RunRecord]],
              clock: str = "wall") -> SetReport:
    savings = [saving_factor(d, s) for d, s in pairs]
    if clock == "wall":
        reconf = sum(d.reconfig_micros for d, _ in pairs)
        infer = sum(d.inference_micros for d, _ in pairs)
    elif clock == "steps":
        reconf = sum(d.reconfig_steps for d, _ in pairs)
        infer = sum(d.ops for d, _ in pairs)
    else:
        raise ValueError(f"unknown clock {clock!r}")
    pct = 100.0 * reconf / infer if infer else 0.0
    return SetReport(
        set_id=set_id,
        nodes=cfg.nodes,
        width=cfg.width,
        networks=len(pairs),
        avg_saving=float(np.mean(savings)) if savings else 0.0,
        max_saving=float(np.max(savings)) if savings else 0.0,
        avg_max_sep_dynamic=float(np.mean([d.max_separator_size for d, _ in pairs])) if pairs else 0.0,
        avg_max_sep_static=float(np.mean([s.max_separator_size for _, s in pairs])) if pairs else 0.0,
        reconfig_time_pct=pct,
        savings=savings,
    )


def network_seed(seed: int, set_id: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, set_id, index]).generate_state(2, np.uint64)[0])


def run_suite(sets: Sequence[SetConfig], seed: int = 0, experiment: int = 1,
              clock: str = "wall", strategy: str = "minimize-lost-nodes",
              progress=None):
    """Generate every set, run one experiment on each network, aggregate.

    Returns ``(reports, records)`` where ``records`` lists every
    ``(dynamic, static)`` pair per set.
    """
    if experiment not in (1, 2):
        raise ValueError("experiment must be 1 or 2")
    if clock not in CLOCKS:
        raise ValueError(f"unknown clock {clock!r}")
    reports, records = [], []
    for set_id, cfg in enumerate(sets):
        pairs = []
        for k in range(cfg.count):
            nseed = network_seed(seed, set_id, k)
            net = generate_network(GenSpec(cfg.nodes, cfg.width, nseed, cardinality=cfg.cardinality))
            nid = f"s{set_id}n{k}"
            if experiment == 1:
                pair = experiment1(net, nid, strategy)
            else:
                pair = experiment2(net, nseed ^ 0x5EED, nid, strategy)
            pairs.append(pair)
            if progress:
                progress(set_id, k, pair)
        reports.append(summarize(set_id, cfg, pairs, clock))
        records.append(pairs)
    return reports, records


def reports_csv(reports: Sequence[SetReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()


def reports_json(reports: Sequence[SetReport], records, meta: Optional[dict] = None) -> str:
    doc = {
        "meta": meta or {},
        "sets": [
            {k: v for k, v in asdict(r).items()} | {
                "runs": [
                    {"dynamic": asdict(d), "static": asdict(s)} for d, s in pairs
                ]
            }
            for r, pairs in zip(reports, records)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
