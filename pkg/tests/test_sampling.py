import math
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np
import pytest

from app.ml.sampling import (INF, build_weights, competence_weights, make_rng, proportional_weights,
                             sample_language, temperature_weights, uniform_weights)
from app.models.sampling import CorpusSizes, SamplingWeights
from app.models.schedule import Weighting

REL_TOL = 1e-12

RELATED_SIZES = {'aze': 5940, 'bel': 4510, 'glg': 10000, 'slk': 61500,
                 'tur': 182000, 'rus': 208000, 'por': 185000, 'ces': 103000}


def random_sizes(rng, n=None):
    n = n or int(rng.integers(1, 9))
    return {f"l{i}": int(size) for i, size in enumerate(rng.integers(1, 500000, size=n))}


def assert_weights_close(actual: SamplingWeights, expected, rel=REL_TOL):
    assert set(actual.weights) == set(expected)
    for code, value in expected.items():
        assert math.isclose(actual[code], float(value), rel_tol=rel, abs_tol=1e-300), code


class TestUniform:
    @pytest.mark.parametrize('n, expected', [(4, 0.25), (1, 1.0), (8, 0.125)])
    def test_each_weight(self, n, expected):
        weights = uniform_weights([f"l{i}" for i in range(n)])
        assert all(value == expected for value in weights.weights.values())

    def test_empty_support(self):
        with pytest.raises(ValueError, match='empty support'):
            uniform_weights([])


class TestProportional:
    def test_simple(self):
        assert proportional_weights({'a': 1, 'b': 3}, ['a', 'b']).weights == {'a': 0.25, 'b': 0.75}

    def test_equal_sizes_are_uniform(self):
        weights = proportional_weights({'a': 7, 'b': 7, 'c': 7}, ['a', 'b', 'c'])
        assert_weights_close(weights, uniform_weights(['a', 'b', 'c']).weights)

    def test_related_fixture_sizes(self):
        weights = proportional_weights(RELATED_SIZES, RELATED_SIZES)
        assert weights['rus'] == pytest.approx(208000 / 759950, rel=REL_TOL)
        assert weights['rus'] == pytest.approx(0.27370, abs=1e-5)

    def test_missing_size(self):
        with pytest.raises(ValueError, match='missing corpus size: c'):
            proportional_weights({'a': 1, 'b': 3}, ['a', 'b', 'c'])

    def test_restricted_to_support(self):
        weights = proportional_weights(CorpusSizes(RELATED_SIZES), ['tur', 'aze'])
        assert weights.support == frozenset({'tur', 'aze'})

    def test_random_inputs_match_reference(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            sizes = random_sizes(rng)
            total = sum(sizes.values())
            assert_weights_close(proportional_weights(sizes, sizes),
                                 {code: Fraction(size, total) for code, size in sizes.items()})


class TestTemperature:
    def test_tau_two(self):
        weights = temperature_weights({'a': 1, 'b': 3}, ['a', 'b'], 2)
        assert weights['a'] == pytest.approx(0.36603, abs=1e-5)
        assert weights['b'] == pytest.approx(0.63397, abs=1e-5)

    @pytest.mark.parametrize('tau', [0, -1.0, None])
    def test_non_positive_tau(self, tau):
        with pytest.raises(ValueError, match='temperature must be positive'):
            temperature_weights({'a': 1}, ['a'], tau)

    def test_inf_string(self):
        assert temperature_weights({'a': 1, 'b': 3}, ['a', 'b'], 'inf').weights == {'a': 0.5, 'b': 0.5}

    def test_identities_over_random_sizes(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            sizes = random_sizes(rng)
            proportional = proportional_weights(sizes, sizes)
            uniform = uniform_weights(sizes)
            assert_weights_close(temperature_weights(sizes, sizes, 1), proportional.weights)
            assert_weights_close(temperature_weights(sizes, sizes, INF), uniform.weights)

    def test_scale_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            sizes = random_sizes(rng)
            factor = int(rng.integers(2, 50))
            tau = float(rng.uniform(0.5, 10.0))
            scaled = {code: size * factor for code, size in sizes.items()}
            assert_weights_close(temperature_weights(scaled, scaled, tau),
                                 temperature_weights(sizes, sizes, tau).weights, rel=1e-12)

    def test_higher_tau_flattens(self):
        low = temperature_weights(RELATED_SIZES, RELATED_SIZES, 2)
        high = temperature_weights(RELATED_SIZES, RELATED_SIZES, 10)
        assert high['bel'] > low['bel']
        assert high['rus'] < low['rus']

    def test_random_inputs_match_reference(self):
        rng = np.random.default_rng(14)
        for _ in range(1000):
            sizes = random_sizes(rng)
            tau = float(rng.uniform(0.2, 10.0))
            with localcontext() as ctx:
                ctx.prec = 50
                total = sum(Decimal(size) for size in sizes.values())
                exponent = Decimal(1) / Decimal(tau)
                raw = {code: (Decimal(size) / total) ** exponent for code, size in sizes.items()}
                norm = sum(raw.values())
                expected = {code: value / norm for code, value in raw.items()}
            assert_weights_close(temperature_weights(sizes, sizes, tau), expected, rel=1e-12)


class TestCompetenceWeights:
    def test_equal_competence_is_uniform(self):
        assert_weights_close(competence_weights({'a': 0.4, 'b': 0.4}, ['a', 'b']), {'a': 0.5, 'b': 0.5})

    def test_reciprocal(self):
        weights = competence_weights({'a': 0.5, 'b': 1.0}, ['a', 'b'])
        assert weights['a'] == pytest.approx(2 / 3, rel=REL_TOL)
        assert weights['b'] == pytest.approx(1 / 3, rel=REL_TOL)

    def test_singleton(self):
        assert competence_weights({'a': 1.0}, ['a']).weights == {'a': 1.0}

    @pytest.mark.parametrize('value', [0.0, -0.5])
    def test_non_positive(self, value):
        with pytest.raises(ValueError, match='non-positive competence'):
            competence_weights({'a': value, 'b': 1.0}, ['a', 'b'])

    def test_random_inputs_match_reference(self):
        rng = np.random.default_rng(15)
        for _ in range(1000):
            n = int(rng.integers(1, 9))
            c = {f"l{i}": float(value) for i, value in enumerate(rng.uniform(1e-3, 3.0, size=n))}
            raw = {code: 1 / Fraction(value) for code, value in c.items()}
            total = sum(raw.values())
            assert_weights_close(competence_weights(c, c), {code: value / total for code, value in raw.items()})

    def test_less_competent_gets_more(self):
        weights = competence_weights({'slk': 0.05, 'ces': 0.9}, ['slk', 'ces'])
        assert weights['slk'] > weights['ces']


class TestBuildWeights:
    def test_dispatch(self):
        sizes = {'a': 1, 'b': 3}
        assert build_weights(Weighting.UNIFORM, ['a', 'b']).weights == {'a': 0.5, 'b': 0.5}
        assert build_weights('proportional', ['a', 'b'], sizes=sizes).weights == {'a': 0.25, 'b': 0.75}
        assert build_weights(Weighting.TEMPERATURE, ['a', 'b'], sizes=sizes, tau=1).weights == \
            {'a': 0.25, 'b': 0.75}
        assert build_weights(Weighting.COMPETENCE, ['a', 'b'], competence={'a': 1.0, 'b': 1.0}).weights == \
            {'a': 0.5, 'b': 0.5}

    def test_static_weighting_needs_sizes(self):
        with pytest.raises(ValueError, match='needs corpus sizes'):
            build_weights(Weighting.PROPORTIONAL, ['a'])


class TestSamplingWeights:
    def test_must_sum_to_one(self):
        with pytest.raises(ValueError):
            SamplingWeights({'a': 0.5, 'b': 0.4})

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            SamplingWeights({'a': 1.5, 'b': -0.5})

    def test_sorted_export(self):
        assert list(SamplingWeights({'b': 0.5, 'a': 0.5}).to_dict()) == ['a', 'b']


class TestSampleLanguage:
    def test_point_mass(self):
        rng = make_rng(0)
        assert {sample_language(SamplingWeights({'a': 1.0}), rng) for _ in range(100)} == {'a'}

    def test_zero_weight_never_drawn(self):
        rng = make_rng(1)
        weights = SamplingWeights({'a': 0.0, 'b': 1.0, 'c': 0.0})
        assert {sample_language(weights, rng) for _ in range(1000)} == {'b'}

    def test_empirical_frequency(self):
        rng = make_rng(42)
        weights = SamplingWeights({'a': 0.5, 'b': 0.5})
        draws = [sample_language(weights, rng) for _ in range(100000)]
        assert draws.count('a') / len(draws) == pytest.approx(0.5, abs=0.01)

    def test_same_seed_same_sequence(self):
        weights = SamplingWeights({'a': 0.2, 'b': 0.3, 'c': 0.5})
        first, second = make_rng(7), make_rng(7)
        assert [sample_language(weights, first) for _ in range(500)] == \
            [sample_language(weights, second) for _ in range(500)]
