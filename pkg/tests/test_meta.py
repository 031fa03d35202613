import numpy as np
import pytest

import sogran.meta as meta
from sogran.meta import (
    GrowthLawParams,
    MetaConfig,
    RunTrace,
    TraceRecord,
    next_neuron_count,
    run_sonfis,
    run_sorst,
)
from sogran.rough import StrengthFactor
from sogran.tables import InformationTable, SplitSpec, SyntheticConfig, generate_synthetic, split


def protocol_tables(noise=0.0, seed=7):
    table = generate_synthetic(SyntheticConfig(object_count=169, noise_sigma=noise, seed=seed))
    return split(table, SplitSpec(150, 19))


def single_driver_tables(seed=5):
    """Decision is a clean function of the first condition's clump."""
    rng = np.random.default_rng(seed)
    n = 169
    clump = rng.integers(0, 3, n)
    a1 = clump * 50.0 + rng.uniform(-0.5, 0.5, n)
    a2 = rng.uniform(0.0, 10.0, n)
    d = 10.0 * (clump + 1) + rng.uniform(-0.1, 0.1, n)
    table = InformationTable(("a1", "a2"), "d", np.column_stack([a1, a2]), d)
    return split(table, SplitSpec(150, 19))


FAST = dict(som_epochs=8, nfis_epochs=5)


class TestGrowthLaw:
    def test_identity_configuration(self):
        params = GrowthLawParams(alpha=1.0, beta=0.0, gamma=0.0)
        assert next_neuron_count(params, 15, 0.7, (2, 64)) == 15

    def test_direct_arithmetic(self):
        params = GrowthLawParams(alpha=1.0, beta=10.0, gamma=1.0)
        assert next_neuron_count(params, 9, 0.5, (2, 64)) == 15

    def test_upper_clamp(self):
        params = GrowthLawParams(alpha=2.0, beta=100.0, gamma=10.0)
        assert next_neuron_count(params, 40, 3.0, (2, 50)) == 50

    def test_lower_clamp(self):
        params = GrowthLawParams(alpha=0.0, beta=0.0, gamma=0.0)
        assert next_neuron_count(params, 10, 0.0, (4, 64)) == 4

    def test_half_rounds_up(self):
        params = GrowthLawParams(alpha=1.0, beta=0.0, gamma=0.5)
        assert next_neuron_count(params, 7, 0.0, (2, 64)) == 8

    def test_nonfinite_params_rejected(self):
        with pytest.raises(ValueError):
            GrowthLawParams(alpha=float("nan"))


class TestRunTrace:
    def test_best_iteration_attains_minimum(self):
        records = tuple(
            TraceRecord(i + 1, 10, 8, 3, e) for i, e in enumerate([4.0, 1.5, 2.0, 1.5])
        )
        trace = RunTrace("sonfis", records)
        assert trace.best_iteration == 2
        assert trace.best_error == 1.5
        assert min(r.error for r in trace.records) == trace.best_error

    def test_csv_shape_for_each_algorithm(self):
        sonfis = RunTrace("sonfis", (TraceRecord(1, 10, 8, 3, 2.0),))
        assert sonfis.to_csv_text().splitlines()[0] == \
            "iteration,neurons,reduced_objects,rule_count,rmse"
        sorst = RunTrace("sorst", (TraceRecord(1, 10, 8, 3, 2.0, 0.1),))
        header = sorst.to_csv_text().splitlines()[0]
        assert "strength_factor" in header and header.endswith("em")


class TestRunSonfis:
    def test_reference_configuration_trace_shape(self):
        train, test = protocol_tables()
        cfg = MetaConfig(mode="random", close_open_iterations=10, max_rules=4,
                         neuron_range=(4, 64), seed=11, **FAST)
        result = run_sonfis(train, test, cfg)
        assert len(result.trace.records) <= 10
        assert all(r.rule_count <= 4 for r in result.trace.records)
        assert result.trace.algorithm == "sonfis"
        assert len(result.best_records) == 19

    def test_zero_error_level_runs_every_iteration(self):
        train, test = protocol_tables()
        cfg = MetaConfig(close_open_iterations=5, seed=1, error_level=0.0, **FAST)
        result = run_sonfis(train, test, cfg)
        assert len(result.trace.records) == 5

    def test_positive_error_level_stops_early(self):
        train, test = protocol_tables()
        cfg = MetaConfig(close_open_iterations=8, seed=1, error_level=1e6, **FAST)
        result = run_sonfis(train, test, cfg)
        assert len(result.trace.records) == 1

    def test_tuple_unpacking_gives_base_and_trace(self):
        train, test = protocol_tables()
        cfg = MetaConfig(close_open_iterations=2, seed=3, **FAST)
        base, trace = run_sonfis(train, test, cfg)
        assert base.rule_count >= 1
        assert isinstance(trace, RunTrace)

    def test_reruns_are_identical(self):
        train, test = protocol_tables()
        cfg = MetaConfig(close_open_iterations=4, seed=13, **FAST)
        a = run_sonfis(train, test, cfg)
        b = run_sonfis(train, test, cfg)
        assert a.trace.to_csv_text() == b.trace.to_csv_text()
        assert np.array_equal(a.best_base.coeffs, b.best_base.coeffs)

    def test_adaptive_identity_growth_holds_neurons_constant(self):
        train, test = protocol_tables()
        cfg = MetaConfig(mode="adaptive", close_open_iterations=4, neuron_range=(6, 64),
                         seed=2, **FAST)
        growth = GrowthLawParams(alpha=1.0, beta=0.0, gamma=0.0)
        result = run_sonfis(train, test, cfg, growth)
        assert [r.neurons for r in result.trace.records] == [6, 6, 6, 6]

    def test_adaptive_growth_reacts_to_error(self):
        train, test = protocol_tables()
        cfg = MetaConfig(mode="adaptive", close_open_iterations=3, neuron_range=(4, 64),
                         seed=2, **FAST)
        growth = GrowthLawParams(alpha=1.0, beta=10.0, gamma=1.0)
        result = run_sonfis(train, test, cfg, growth)
        records = result.trace.records
        expected = next_neuron_count(growth, records[0].neurons, records[0].error, (4, 64))
        assert records[1].neurons == expected

    def test_more_iterations_never_hurt_the_best_error(self):
        train, test = protocol_tables()
        short = MetaConfig(close_open_iterations=3, seed=21, **FAST)
        long = MetaConfig(close_open_iterations=8, seed=21, **FAST)
        best_short = run_sonfis(train, test, short).trace.best_error
        best_long = run_sonfis(train, test, long).trace.best_error
        assert best_long <= best_short

    def test_noise_free_linear_data_is_fit_tightly(self):
        rng = np.random.default_rng(31)
        x = rng.uniform(0.0, 10.0, (169, 4))
        y = x @ np.array([2.0, -1.0, 0.5, 3.0]) + 7.0
        table = InformationTable(("a", "b", "c", "e"), "y", x, y)
        train, test = split(table, SplitSpec(150, 19))
        cfg = MetaConfig(close_open_iterations=10, max_rules=4, seed=11, **FAST)
        result = run_sonfis(train, test, cfg)
        decision_range = float(y.max() - y.min())
        assert result.trace.best_error <= 0.05 * decision_range

    def test_test_table_is_never_touched(self):
        train, test = protocol_tables()
        before = test.checksum()
        run_sonfis(train, test, MetaConfig(close_open_iterations=3, seed=5, **FAST))
        assert test.checksum() == before

    def test_empty_test_table_rejected(self):
        train, test = protocol_tables()
        empty = test.take([])
        with pytest.raises(ValueError, match="non-empty"):
            run_sonfis(train, empty, MetaConfig(seed=0))


class TestRunSorst:
    def test_seven_selection_trace(self):
        train, test = single_driver_tables()
        cfg = MetaConfig(selections=7, neuron_range=(4, 64), discretization_levels=3,
                         seed=11, som_epochs=8)
        result = run_sorst(train, test, cfg, StrengthFactor(0.1))
        assert len(result.trace.records) == 7
        assert result.trace.algorithm == "sorst"
        assert all(r.strength_factor is not None for r in result.trace.records)

    def test_reruns_are_identical(self):
        train, test = single_driver_tables()
        cfg = MetaConfig(selections=4, seed=3, som_epochs=8)
        a = run_sorst(train, test, cfg, StrengthFactor(0.1))
        b = run_sorst(train, test, cfg, StrengthFactor(0.1))
        assert a.trace.to_csv_text() == b.trace.to_csv_text()
        assert [r.to_json_obj() for r in a.best_rules] == [r.to_json_obj() for r in b.best_rules]

    def test_single_driver_dataset_reaches_zero_error(self):
        train, test = single_driver_tables()
        cfg = MetaConfig(selections=7, discretization_levels=3, seed=11, som_epochs=8)
        result = run_sorst(train, test, cfg, StrengthFactor(0.1))
        assert result.trace.best_error == 0.0
        # exhaustive recheck of the winning rules against the winning granulation
        for rule in result.best_rules:
            assert rule.certainty == 1.0

    def test_impossible_threshold_yields_empty_rules_and_unit_error(self):
        train, test = protocol_tables(noise=0.5)
        cfg = MetaConfig(selections=2, seed=9, som_epochs=8)
        result = run_sorst(train, test, cfg, StrengthFactor(1.0, step=1e-9))
        assert all(r.rule_count == 0 for r in result.trace.records)
        assert all(r.error == 1.0 for r in result.trace.records)

    def test_strength_factor_adapts_between_selections(self):
        train, test = protocol_tables(noise=0.3)
        cfg = MetaConfig(selections=5, seed=4, som_epochs=8)
        result = run_sorst(train, test, cfg, StrengthFactor(0.1, step=0.05))
        factors = [r.strength_factor for r in result.trace.records]
        assert factors[0] == 0.1
        assert len(set(factors)) > 1  # the trend moved it at least once

    def test_update_policy_is_replaceable(self):
        train, test = single_driver_tables()
        cfg = MetaConfig(selections=3, seed=2, som_epochs=8)
        frozen = lambda current, em_now, em_prev, step: current  # noqa: E731
        result = run_sorst(train, test, cfg, StrengthFactor(0.2), strength_update=frozen)
        assert all(r.strength_factor == 0.2 for r in result.trace.records)

    def test_discretization_never_fitted_on_test_rows(self, monkeypatch):
        train, test = single_driver_tables()
        fitted_tables = []
        original = meta.discretize_attributes

        def spy(table, levels, seed=0):
            fitted_tables.append(table)
            return original(table, levels, seed)

        monkeypatch.setattr(meta, "discretize_attributes", spy)
        before = test.checksum()
        cfg = MetaConfig(selections=3, seed=6, som_epochs=8)
        run_sorst(train, test, cfg, StrengthFactor(0.1))
        assert test.checksum() == before
        assert len(fitted_tables) == 3
        test_rows = {tuple(r) for r in test.conditions}
        for fitted in fitted_tables:
            assert fitted.n_objects <= train.n_objects  # reduced granules only
            assert not ({tuple(r) for r in fitted.conditions} & test_rows)

    def test_test_table_checksum_stable(self):
        train, test = single_driver_tables()
        before = test.checksum()
        run_sorst(train, test, MetaConfig(selections=2, seed=8, som_epochs=8),
                  StrengthFactor(0.2))
        assert test.checksum() == before


class TestMetaConfig:
    def test_neuron_range_validation(self):
        with pytest.raises(ValueError, match="neuron_range"):
            MetaConfig(neuron_range=(1, 64))
        with pytest.raises(ValueError, match="neuron_range"):
            MetaConfig(neuron_range=(10, 5))

    def test_mode_validation(self):
        with pytest.raises(ValueError, match="mode"):
            MetaConfig(mode="simulated-annealing")

    def test_mode_is_case_insensitive(self):
        assert MetaConfig(mode="Adaptive").mode == "adaptive"
