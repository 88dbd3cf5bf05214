import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from factorlens.errors import InvalidConfig, UnknownFactor
from factorlens.metrics import (
    FactorImportance,
    SensitivityCache,
    aggregate_importance,
    compute_importances,
    factor_contribution,
    factor_sensitivity,
    factor_stability,
    stability_scores,
    top_k_factors,
)
from factorlens.rolling import (
    Cycle,
    CycleFit,
    CycleResult,
    StockModelSeries,
    partition_cycles,
    rolling_fit,
)
from factorlens.solver import ElasticNetConfig, FitResult
from factorlens.synthetic import SyntheticConfig, generate_synthetic
from oracles import stability_flips_bruteforce


def fabricate_series(weights, bias, predictor_rows, factor_names, actual=None):
    """Hand-built one-cycle StockModelSeries for plug-in metric checks."""
    weights = np.asarray(weights, dtype=float)
    rows = np.asarray(predictor_rows, dtype=float)
    predicted = rows @ weights + bias
    actual = np.zeros(rows.shape[0]) if actual is None else np.asarray(actual)
    cycle = Cycle(1, 1, 3, 2, 4, 5, 4 + rows.shape[0])
    fit = FitResult(
        weights=weights, bias=bias, residuals=np.zeros(3), lambda_used=0.1,
        alpha=1.0, objective=0.0, sweeps=1, converged=True, kkt_residual=0.0,
        objective_history=np.zeros(2),
    )
    result = CycleResult(
        cycle_fit=CycleFit(cycle=cycle, factor_names=tuple(factor_names),
                           fit=fit, column_stats=tuple()),
        predicted=predicted,
        actual=actual,
        predictor_rows=rows,
        xi=float(np.mean((predicted - actual) ** 2)),
        error_rate=0.0,
    )
    part = partition_cycles(4, rows.shape[0], (5, 4 + rows.shape[0]))
    return StockModelSeries(
        stock_id="XX", partition=part, factor_names=tuple(factor_names),
        cycles=(result,),
    )


def planted_dataset(seed=0, noise=0.0, n_days=90, n_factors=6):
    cfg = SyntheticConfig(
        n_stocks=2, n_sectors=1, n_days=n_days, n_factors=n_factors, sparsity=2,
        noise_sigma=noise, seed=seed, weight_magnitude=0.02,
    )
    return generate_synthetic(cfg)


class TestFactorContribution:
    def test_plug_in_sum(self):
        rows = np.array([[0.2], [0.1], [-0.1]])
        series = fabricate_series([0.5], 0.0, rows, ("size",))
        imp = factor_contribution(series, 1, "size")
        assert imp.contribution == pytest.approx(0.1, rel=1e-12)
        assert imp.mean_value == pytest.approx(rows.mean(), rel=1e-12)
        assert imp.weight == 0.5

    def test_zero_weight_zero_contribution(self):
        rows = np.array([[0.4, 0.2], [-0.3, 0.9], [0.8, -0.5]])
        series = fabricate_series([0.0, 0.7], 0.01, rows, ("size", "age"))
        assert factor_contribution(series, 1, "size").contribution == 0.0

    def test_unknown_factor(self):
        series = fabricate_series([0.5], 0.0, np.zeros((3, 1)), ("size",))
        with pytest.raises(UnknownFactor):
            factor_contribution(series, 1, "nope")

    def test_decomposition_identity_on_real_fits(self):
        ds, _ = planted_dataset(seed=1, noise=0.01)
        part = partition_cycles(30, 10, (31, 70))
        series = rolling_fit(ds, ds.stock_ids(), part, ElasticNetConfig(variant="lasso"))
        for s in series.values():
            for res in s.cycles:
                imps = [
                    factor_contribution(s, res.cycle.index, n)
                    for n in s.factor_names
                ]
                total = sum(i.contribution for i in imps)
                D = res.cycle.trade_end - res.cycle.trade_start + 1
                assert total + D * res.cycle_fit.fit.bias == pytest.approx(
                    float(res.predicted.sum()), abs=1e-9
                )

    def test_compute_importances_matches_single_queries(self):
        ds, _ = planted_dataset(seed=2)
        part = partition_cycles(30, 10, (31, 50))
        series = rolling_fit(ds, ds.stock_ids(), part, ElasticNetConfig())
        s = series[ds.stock_ids()[0]]
        table = compute_importances(s)
        for imp in table:
            single = factor_contribution(s, imp.cycle, imp.factor)
            assert single.contribution == pytest.approx(imp.contribution, abs=1e-15)
            assert single.weight == imp.weight


class TestFactorSensitivity:
    def test_zero_weight_factor_scores_zero(self):
        ds, _ = planted_dataset(seed=3, noise=0.005)
        part = partition_cycles(40, 10, (41, 60))
        cfg = ElasticNetConfig(variant="lasso")
        series = rolling_fit(ds, ds.stock_ids(), part, cfg)
        s = series[ds.stock_ids()[0]]
        res = s.result(1)
        inactive = [
            n for j, n in enumerate(s.factor_names)
            if res.cycle_fit.fit.weights[j] == 0.0
        ]
        assert inactive, "expected some inactive factors under the lasso penalty"
        score = factor_sensitivity(ds, s, cfg, 1, inactive[0])
        assert 0.0 <= score.sensitivity <= 1e-9

    def test_planted_factor_scores_higher_than_noise(self):
        ds, planted = planted_dataset(seed=4, noise=0.002)
        part = partition_cycles(40, 10, (41, 60))
        cfg = ElasticNetConfig(variant="lasso")
        sid = ds.stock_ids()[0]
        series = rolling_fit(ds, [sid], part, cfg)[sid]
        truth = planted.stocks[sid]
        strongest = max(truth.support, key=lambda n: abs(truth.base_weights[n]))
        noise_factors = [n for n in series.factor_names if n not in truth.support]
        s_strong = factor_sensitivity(ds, series, cfg, 1, strongest).sensitivity
        s_noise = max(
            factor_sensitivity(ds, series, cfg, 1, n).sensitivity
            for n in noise_factors
        )
        assert s_strong > s_noise
        assert s_strong > 0.0

    def test_sensitivity_never_negative(self):
        ds, _ = planted_dataset(seed=5, noise=0.01)
        part = partition_cycles(30, 10, (31, 50))
        cfg = ElasticNetConfig(variant="lasso")
        sid = ds.stock_ids()[1]
        series = rolling_fit(ds, [sid], part, cfg)[sid]
        for name in series.factor_names:
            for cyc in (1, 2):
                assert factor_sensitivity(ds, series, cfg, cyc, name).sensitivity >= 0.0

    def test_cache_idempotent(self):
        ds, _ = planted_dataset(seed=6)
        part = partition_cycles(30, 10, (31, 50))
        cfg = ElasticNetConfig(variant="lasso")
        sid = ds.stock_ids()[0]
        series = rolling_fit(ds, [sid], part, cfg)[sid]
        cache = SensitivityCache()
        a = cache.get_or_compute(ds, series, cfg, 1, series.factor_names[0])
        b = cache.get_or_compute(ds, series, cfg, 1, series.factor_names[0])
        assert a is b


class TestFactorStability:
    @pytest.mark.parametrize(
        "contribs,expected",
        [
            ((1.0, 2.0, 3.0), 0),
            ((1.0, -1.0, 1.0), 2),
            ((1.0, 0.0, -1.0), 1),  # zero carries the previous sign
            ((0.0, 0.0), 0),
            ((-1.0,), 0),
        ],
    )
    def test_examples(self, contribs, expected):
        assert factor_stability(contribs) == expected

    @given(st.lists(st.floats(-1.0, 1.0), max_size=30))
    def test_matches_bruteforce(self, contribs):
        assert factor_stability(contribs) == stability_flips_bruteforce(contribs)

    @given(st.integers(0, 10**6), st.integers(1, 12))
    def test_flip_bound(self, seed, n_cycles):
        rng = np.random.default_rng(seed)
        contribs = rng.standard_normal(n_cycles)
        assert 0 <= factor_stability(contribs) <= n_cycles - 1

    def test_stability_scores_grouping(self):
        imps = [
            FactorImportance("A", 1, "size", 0, 0, 1.0),
            FactorImportance("A", 2, "size", 0, 0, -1.0),
            FactorImportance("A", 1, "age", 0, 0, 0.5),
            FactorImportance("A", 2, "age", 0, 0, 0.7),
        ]
        scores = {s.factor: s.flips for s in stability_scores(imps)}
        assert scores == {"size": 1, "age": 0}


class TestAggregateImportance:
    def test_singleton_is_split_metric(self):
        imps = [FactorImportance("A", 1, "size", 0.3, 0.1, -0.2)]
        (agg,) = aggregate_importance(imps, 1, "contribution")
        assert agg.positive_mass == 0.0
        assert agg.negative_mass == -0.2

    def test_two_stock_example(self):
        imps = [
            FactorImportance("A", 1, "size", 0, 0, 0.1),
            FactorImportance("B", 1, "size", 0, 0, -0.2),
        ]
        (agg,) = aggregate_importance(imps, 1)
        assert agg.positive_mass == pytest.approx(0.1)
        assert agg.negative_mass == pytest.approx(-0.2)
        assert agg.positive_mass >= 0.0 >= agg.negative_mass

    @given(st.integers(0, 10**6))
    def test_matches_bruteforce_double_loop(self, seed):
        rng = np.random.default_rng(seed)
        stocks = ["A", "B", "C"]
        factors = ["f1", "f2", "f3", "f4"]
        imps = [
            FactorImportance(s, 1, f, rng.standard_normal(),
                             rng.standard_normal(), rng.standard_normal())
            for s in stocks
            for f in factors
        ]
        for kind in ("weight", "value", "contribution"):
            aggs = {a.factor: a for a in aggregate_importance(imps, 1, kind)}
            for f in factors:
                pos = neg = 0.0
                for imp in imps:
                    if imp.factor != f:
                        continue
                    v = {"weight": imp.weight, "value": imp.mean_value,
                         "contribution": imp.contribution}[kind]
                    if v > 0:
                        pos += v
                    else:
                        neg += v
                assert aggs[f].positive_mass == pytest.approx(pos, abs=1e-12)
                assert aggs[f].negative_mass == pytest.approx(neg, abs=1e-12)

    @given(st.integers(0, 10**6))
    def test_disjoint_union_linearity(self, seed):
        rng = np.random.default_rng(seed)
        group_a = [
            FactorImportance("A", 1, "f", 0, 0, float(rng.standard_normal()))
            for _ in range(3)
        ]
        group_b = [
            FactorImportance("B", 1, "f", 0, 0, float(rng.standard_normal()))
            for _ in range(2)
        ]
        (joint,) = aggregate_importance(group_a + group_b, 1)
        (only_a,) = aggregate_importance(group_a, 1)
        (only_b,) = aggregate_importance(group_b, 1)
        assert joint.positive_mass == pytest.approx(
            only_a.positive_mass + only_b.positive_mass, abs=1e-12
        )
        assert joint.negative_mass == pytest.approx(
            only_a.negative_mass + only_b.negative_mass, abs=1e-12
        )

    def test_bad_metric_kind(self):
        with pytest.raises(InvalidConfig):
            aggregate_importance([FactorImportance("A", 1, "f", 0, 0, 1.0)], 1, "magic")


class TestTopKFactors:
    def test_three_positive_under_k(self):
        imps = [
            FactorImportance("A", 1, f, 0, 0, c)
            for f, c in [("f1", 0.3), ("f2", 0.1), ("f3", 0.2), ("f4", -0.5)]
        ]
        top = top_k_factors(imps, k=5, polarity="positive")
        assert [i.factor for i in top.factors] == ["f1", "f3", "f2"]
        assert top.remainder == 0.0

    def test_ties_break_by_registry_order(self):
        imps = [
            FactorImportance("A", 1, f, 0, 0, 0.25)
            for f in ("beta", "age", "size")
        ]
        order = ("size", "age", "beta")
        top = top_k_factors(imps, k=2, polarity="positive", factor_order=order)
        assert [i.factor for i in top.factors] == ["size", "age"]
        assert top.remainder == pytest.approx(0.25)

    def test_negative_polarity_and_remainder(self):
        imps = [
            FactorImportance("A", 1, f"f{i}", 0, 0, -0.1 * (i + 1))
            for i in range(7)
        ]
        top = top_k_factors(imps, k=5, polarity="negative")
        assert len(top.factors) == 5
        assert top.factors[0].contribution == pytest.approx(-0.7)
        assert top.remainder == pytest.approx(0.1 + 0.2, abs=1e-12)

    @given(st.integers(0, 10**6))
    def test_matches_sort_oracle(self, seed):
        rng = np.random.default_rng(seed)
        imps = [
            FactorImportance("A", 1, f"f{i:02d}", 0, 0, float(rng.standard_normal()))
            for i in range(10)
        ]
        top = top_k_factors(imps, k=4, polarity="positive")
        oracle = sorted(
            (i for i in imps if i.contribution > 0),
            key=lambda i: -abs(i.contribution),
        )
        assert [i.factor for i in top.factors] == [i.factor for i in oracle[:4]]
        assert top.remainder == pytest.approx(
            sum(abs(i.contribution) for i in oracle[4:]), abs=1e-12
        )
