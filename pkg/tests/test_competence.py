import math
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np
import pytest

from app.ml.competence import (benchmarks_from_dict, evaluate_competence, hrl_eval_avg, hrl_eval_max,
                               hrl_evaluated, likelihood_score, self_competence)
from app.models.competence import BenchmarkLoss
from app.models.language import BipartiteLangGraph, LanguageId, Side
from app.models.schedule import CompetenceVariant

REL_TOL = 1e-12


def graph_of(edges):
    """Graph with HRLs/LRLs in first-seen order of an {(hrl, lrl): weight} map"""
    hrls = list(dict.fromkeys(hrl for hrl, _ in edges))
    lrls = list(dict.fromkeys(lrl for _, lrl in edges))
    return BipartiteLangGraph(
        hrls=tuple(LanguageId(code, Side.HRL) for code in hrls),
        lrls=tuple(LanguageId(code, Side.LRL) for code in lrls),
        edges=dict(edges)
    )


def pow2(exponent: Decimal) -> float:
    with localcontext() as ctx:
        ctx.prec = 50
        return float(Decimal(2) ** exponent)


def random_graph(rng, n_hrls):
    hrls = [f"h{i}" for i in range(n_hrls)]
    weights = rng.uniform(0.0, 1.0, size=n_hrls)
    weights[rng.random(n_hrls) < 0.2] = 0.0
    if not weights.any():
        weights[0] = 0.5
    return graph_of({(hrl, 'lrl'): float(w) for hrl, w in zip(hrls, weights)}), hrls


class TestLikelihoodScore:
    def test_zero_loss(self):
        assert likelihood_score(0) == 1.0

    def test_one_bit(self):
        assert likelihood_score(1) == 0.5

    def test_aze_benchmark(self):
        assert likelihood_score(7.87) == pytest.approx(4.274e-3, rel=1e-3)

    @pytest.mark.parametrize('loss', [math.nan, math.inf, -math.inf, None, 'x', -0.5, -2000.0])
    def test_invalid_loss(self, loss):
        with pytest.raises(ValueError, match='invalid loss'):
            likelihood_score(loss)

    def test_matches_high_precision_reference(self):
        rng = np.random.default_rng(1)
        for loss in rng.uniform(0.0, 20.0, size=1000):
            expected = pow2(-Decimal(float(loss)))
            assert math.isclose(likelihood_score(float(loss)), expected, rel_tol=REL_TOL)


class TestSelfCompetence:
    def test_parity(self):
        assert self_competence(5.0, 5.0) == 1.0

    def test_one_bit_worse(self):
        assert self_competence(6.0, 5.0) == 0.5

    def test_can_exceed_one(self):
        assert self_competence(4.0, BenchmarkLoss('aze', 5.0)) == 2.0

    def test_matches_high_precision_reference(self):
        rng = np.random.default_rng(2)
        for current, reference in rng.uniform(0.0, 15.0, size=(1000, 2)):
            expected = pow2(Decimal(float(reference)) - Decimal(float(current)))
            assert math.isclose(self_competence(float(current), float(reference)), expected, rel_tol=REL_TOL)

    @pytest.mark.parametrize('current, reference', [(2000.0, 5.0), (5.0, 2000.0)])
    def test_gap_outside_double_range(self, current, reference):
        with pytest.raises(ValueError, match='invalid loss'):
            self_competence(current, reference)

    def test_large_representable_gap_stays_positive(self):
        assert self_competence(1005.0, 5.0) == 2.0 ** -1000

    def test_negative_benchmark_rejected(self):
        with pytest.raises(ValueError):
            BenchmarkLoss('aze', -0.1)


class TestHrlEvaluated:
    aze_edges = {('tur', 'aze'): 0.50, ('rus', 'aze'): 0.09, ('por', 'aze'): 0.22, ('ces', 'aze'): 0.24}

    def test_max_follows_most_similar_hrl(self):
        graph = graph_of(self.aze_edges)
        c = {'tur': 0.9, 'rus': 0.99, 'por': 0.3, 'ces': 0.3}
        assert hrl_eval_max(graph, 'aze', c) == 0.9

    def test_max_single_hrl(self):
        assert hrl_eval_max(graph_of({('h', 'l'): 0.13}), 'l', {'h': 0.7}) == 0.7

    def test_max_tie_goes_to_smaller_code(self):
        graph = graph_of({('zz', 'l'): 0.4, ('aa', 'l'): 0.4, ('mm', 'l'): 0.1})
        assert hrl_eval_max(graph, 'l', {'zz': 0.1, 'aa': 0.6, 'mm': 0.9}) == 0.6

    def test_avg_of_constant(self):
        graph = graph_of(self.aze_edges)
        assert hrl_eval_avg(graph, 'aze', {code: 0.37 for code in ('tur', 'rus', 'por', 'ces')}) == \
            pytest.approx(0.37, rel=REL_TOL)

    def test_avg_symmetric_weights(self):
        graph = graph_of({('a', 'l'): 0.5, ('b', 'l'): 0.5})
        assert hrl_eval_avg(graph, 'l', {'a': 0.2, 'b': 0.8}) == pytest.approx(0.5, rel=REL_TOL)

    def test_avg_aze_example(self):
        graph = graph_of(self.aze_edges)
        c = {'tur': 1.0, 'rus': 0.5, 'por': 0.5, 'ces': 0.5}
        assert hrl_eval_avg(graph, 'aze', c) == pytest.approx(0.73810, abs=1e-5)

    def test_avg_isolated_lrl(self):
        graph = graph_of({('a', 'l'): 0.0, ('b', 'l'): 0.0})
        with pytest.raises(ValueError, match='isolated LRL: l'):
            hrl_eval_avg(graph, 'l', {'a': 0.5, 'b': 0.5})

    def test_max_with_zero_edges_still_defined(self):
        graph = graph_of({('b', 'l'): 0.0, ('a', 'l'): 0.0})
        assert hrl_eval_max(graph, 'l', {'a': 0.25, 'b': 0.75}) == 0.25

    def test_missing_hrl_competence(self):
        with pytest.raises(ValueError, match='no competence for HRL'):
            hrl_eval_avg(graph_of(self.aze_edges), 'aze', {'tur': 1.0})

    def test_avg_lies_between_extremes(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            graph, hrls = random_graph(rng, int(rng.integers(1, 7)))
            c = {hrl: float(value) for hrl, value in zip(hrls, rng.uniform(0.01, 2.0, size=len(hrls)))}
            avg = hrl_eval_avg(graph, 'lrl', c)
            assert min(c.values()) - 1e-12 <= avg <= max(c.values()) + 1e-12

    def test_random_inputs_match_reference(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            graph, hrls = random_graph(rng, int(rng.integers(1, 7)))
            c = {hrl: float(value) for hrl, value in zip(hrls, rng.uniform(0.01, 2.0, size=len(hrls)))}
            edges = graph.edges_into('lrl')

            numerator = sum(Fraction(edges[h]) * Fraction(c[h]) for h in hrls)
            expected_avg = float(numerator / sum(Fraction(edges[h]) for h in hrls))
            expected_max = c[sorted(hrls, key=lambda h: (-edges[h], h))[0]]

            assert math.isclose(hrl_eval_avg(graph, 'lrl', c), expected_avg, rel_tol=REL_TOL)
            assert hrl_eval_max(graph, 'lrl', c) == expected_max
            assert hrl_evaluated(graph, 'lrl', c, CompetenceVariant.MAX) == expected_max


class TestEvaluateCompetence:
    def test_fixture_state(self, related_graph, related_benchmarks):
        losses = {code: related_benchmarks[code].loss + 1.0 for code in related_graph.languages}
        state = evaluate_competence(related_graph, losses, related_benchmarks, CompetenceVariant.AVG)
        assert state.self_competence == pytest.approx({code: 0.5 for code in losses}, rel=REL_TOL)
        assert set(state.hrl_competence) == set(related_graph.lrl_codes)
        assert state.hrl_competence['aze'] == pytest.approx(0.5, rel=REL_TOL)

    def test_candidates_only(self, related_graph, related_benchmarks):
        losses = {code: related_benchmarks[code].loss for code in related_graph.languages}
        state = evaluate_competence(related_graph, losses, related_benchmarks, lrls=['slk'])
        assert list(state.hrl_competence) == ['slk']

    def test_missing_benchmark(self, related_graph, related_benchmarks):
        benchmarks = {code: value for code, value in related_benchmarks.items() if code != 'bel'}
        losses = {code: 5.0 for code in related_graph.languages}
        with pytest.raises(ValueError, match='no benchmark: bel'):
            evaluate_competence(related_graph, losses, benchmarks)


class TestBenchmarkFixture:
    def test_related_values(self, related_benchmarks):
        assert related_benchmarks['aze'].loss == 7.87
        assert related_benchmarks['ces'].loss == 4.495
        assert len(related_benchmarks) == 8

    def test_direction_is_selected(self):
        data = {'records': [
            {'language': 'aze', 'direction': 'xxx-eng', 'loss': 7.87},
            {'language': 'aze', 'direction': 'eng-xxx', 'loss': 9.703}
        ]}
        assert benchmarks_from_dict(data, 'eng-xxx')['aze'].loss == 9.703

    def test_unknown_direction(self):
        with pytest.raises(ValueError, match='unknown direction'):
            benchmarks_from_dict({'records': []}, 'eng-eng')
