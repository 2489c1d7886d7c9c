# app/ml/competence.py
"""Likelihood scores and the two competence notions driving the curriculum.

All losses are base-2 cross-entropies. A trainer reporting natural-log losses
must divide them by ``math.log(2)`` before handing them over.
"""
import json
import logging
import math
from typing import Dict, Iterable, Mapping, Optional, Union

from app.models.competence import DIRECTIONS, BenchmarkLoss, CompetenceState
from app.models.language import BipartiteLangGraph
from app.models.schedule import CompetenceVariant

logger = logging.getLogger(__name__)


def _check_loss(loss: float) -> float:
    if isinstance(loss, bool) or not isinstance(loss, (int, float)) or not math.isfinite(loss):
        raise ValueError("invalid loss")
    return float(loss)


def _pow2(exponent: float) -> float:
    # doubles hold 2^x only for roughly -1074 < x < 1024
    try:
        value = math.pow(2.0, exponent)
    except OverflowError:
        raise ValueError(f"invalid loss: 2^{exponent:g} overflows") from None
    if value == 0.0:
        raise ValueError(f"invalid loss: 2^{exponent:g} underflows to zero")
    return value


def likelihood_score(loss: float) -> float:
    loss = _check_loss(loss)
    if loss < 0:
        raise ValueError("invalid loss")
    return _pow2(-loss)


def self_competence(current_loss: float, benchmark: Union[BenchmarkLoss, float]) -> float:
    """2^(L* - L); equals 1 at parity with the bitext benchmark and may exceed 1.

    Loss gaps beyond the double range (about 1074 bits below or 1024 bits above
    the benchmark) raise instead of returning 0 or overflowing.
    """
    reference = benchmark.loss if isinstance(benchmark, BenchmarkLoss) else benchmark
    return _pow2(_check_loss(reference) - _check_loss(current_loss))


def _hrl_inputs(graph: BipartiteLangGraph, lrl: str, c_hrls: Mapping[str, float]) -> Dict[str, float]:
    if not graph.hrl_codes:
        raise ValueError("empty HRL set")
    edges = graph.edges_into(lrl)
    missing = [hrl for hrl in edges if hrl not in c_hrls]
    if missing:
        raise ValueError(f"no competence for HRL: {missing[0]}")
    return edges


def hrl_eval_max(graph: BipartiteLangGraph, lrl: str, c_hrls: Mapping[str, float]) -> float:
    edges = _hrl_inputs(graph, lrl, c_hrls)
    # ties on the edge weight go to the lexicographically smallest code
    best = min(edges, key=lambda hrl: (-edges[hrl], hrl))
    return c_hrls[best]


def hrl_eval_avg(graph: BipartiteLangGraph, lrl: str, c_hrls: Mapping[str, float]) -> float:
    edges = _hrl_inputs(graph, lrl, c_hrls)
    total = math.fsum(edges.values())
    if total <= 0.0:
        raise ValueError(f"isolated LRL: {lrl}")
    return math.fsum(weight * c_hrls[hrl] for hrl, weight in edges.items()) / total


def hrl_evaluated(graph: BipartiteLangGraph, lrl: str, c_hrls: Mapping[str, float],
                  variant: CompetenceVariant = CompetenceVariant.AVG) -> float:
    if CompetenceVariant(variant) is CompetenceVariant.MAX:
        return hrl_eval_max(graph, lrl, c_hrls)
    return hrl_eval_avg(graph, lrl, c_hrls)


def evaluate_competence(graph: BipartiteLangGraph, losses: Mapping[str, float],
                        benchmarks: Mapping[str, BenchmarkLoss],
                        variant: CompetenceVariant = CompetenceVariant.AVG,
                        lrls: Optional[Iterable[str]] = None) -> CompetenceState:
    """Compute c for every reported language and c-hat for ``lrls``."""
    c = {}
    for code in sorted(losses):
        if code not in benchmarks:
            raise ValueError(f"no benchmark: {code}")
        c[code] = self_competence(losses[code], benchmarks[code])

    c_hrls = {code: c[code] for code in graph.hrl_codes if code in c}
    targets = graph.lrl_codes if lrls is None else sorted(lrls)
    c_hat = {lrl: hrl_evaluated(graph, lrl, c_hrls, variant) for lrl in targets}
    return CompetenceState(losses=dict(losses), self_competence=c, hrl_competence=c_hat)


def benchmarks_from_dict(data: Dict, direction: str = 'xxx-eng') -> Dict[str, BenchmarkLoss]:
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction: {direction}")
    records = data.get('records')
    if not isinstance(records, list) or not records:
        raise ValueError("benchmark fixture has no records")
    benchmarks = {}
    for record in records:
        if record.get('direction') != direction:
            continue
        language = record['language']
        if language in benchmarks:
            raise ValueError(f"duplicate benchmark: {language} {direction}")
        benchmarks[language] = BenchmarkLoss(language=language, loss=float(record['loss']),
                                             direction=direction)
    if not benchmarks:
        raise ValueError(f"benchmark fixture has no {direction} records")
    return benchmarks


def load_benchmark_fixture(path: str, direction: str = 'xxx-eng') -> Dict[str, BenchmarkLoss]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"cannot read benchmark fixture {path}: {e}") from e
    benchmarks = benchmarks_from_dict(data, direction)
    logger.debug(f"Loaded {len(benchmarks)} {direction} benchmark losses from {path}")
    return benchmarks
