import csv
import math

import numpy as np
import pytest

import nullbeam as nb
from conftest import complex_normal, small_scenario


class TestDbConversions:
    def test_round_trip_over_working_range(self):
        for v in np.linspace(-300.0, 300.0, 601):
            assert nb.linear_to_db(nb.db_to_linear(v)) == pytest.approx(v, abs=1e-12)

    def test_watts_to_dbm_convention(self):
        assert nb.watts_to_dbm(1e-3) == 0.0
        assert nb.watts_to_dbm(1.0) == pytest.approx(30.0, abs=1e-12)

    def test_zero_power_floors(self):
        assert nb.watts_to_dbm(0.0) == -300.0


class TestSuppressionAndHeadroom:
    def test_published_suppression_arithmetic(self):
        assert nb.suppression_between(-8.06, -25.30) == pytest.approx(17.24, abs=1e-12)
        assert nb.suppression_between(-13.14, -13.78) == pytest.approx(0.64, abs=1e-12)

    def test_equal_levels_give_zero(self):
        assert nb.suppression_between(-41.0, -41.0) == 0.0

    def test_adc_headroom_rule(self):
        assert nb.adc_headroom_bits(6.02) == pytest.approx(1.0, abs=1e-12)
        assert nb.adc_headroom_bits(31.0) == pytest.approx(5.15, abs=5e-3)
        assert nb.adc_headroom_bits(0.0) == 0.0

    def test_published_power_ratio(self):
        # dB algebra for the ratio of two published dBm levels
        assert -13.14 - (-25.30) == pytest.approx(12.16, abs=1e-12)


def _null_fixture():
    """Two-emitter scenario with hand-made exact-null weights."""
    sc = nb.Scenario(
        emitter_positions=[[1.0, 1.0, 2.0], [3.0, 1.0, 2.0]],
        bd_position=[2.0, 2.0, 1.0],
        reader_positions=[[2.0, 4.0, 1.0]],
    )
    ch = nb.ChannelSet(
        h_c=np.array([0.3 + 0.1j, 0.2 - 0.4j]),
        h_dl=np.array([[0.5 + 0.0j, -0.5 + 0.0j]]),
        h_r=np.array([0.1 + 0.2j]),
    )
    weights = nb.BeamWeights(x=np.array([1.0 + 0j, 1.0 + 0j]))
    assert ch.h_dl @ weights.x == 0
    return sc, ch, weights


class TestEvaluate:
    def test_exact_null_caps_and_floors(self):
        sc, ch, weights = _null_fixture()
        report = nb.evaluate(sc, ch, weights)
        assert report.p_r_dbm == (-300.0,)
        assert report.sir_proxy_db == 300.0
        assert report.delta_db == 300.0

    def test_delta_matches_dbm_difference(self):
        rng = np.random.default_rng(0)
        sc = small_scenario(num_emitters=5)
        ch = nb.los_channel(sc)
        weights = nb.BeamWeights(x=0.9 * complex_normal(rng, 5))
        report = nb.evaluate(sc, ch, weights)
        assert report.delta_db == pytest.approx(
            report.p_bd_dbm - report.p_r_dbm[0], abs=1e-9
        )
        assert report.suppression_db is None

    def test_global_phase_leaves_report_unchanged(self):
        rng = np.random.default_rng(1)
        sc = small_scenario(num_emitters=5)
        ch = nb.los_channel(sc)
        x = 0.9 * complex_normal(rng, 5)
        a = nb.evaluate(sc, ch, nb.BeamWeights(x=x))
        b = nb.evaluate(sc, ch, nb.BeamWeights(x=x * np.exp(0.9j)))
        assert a.p_bd_dbm == pytest.approx(b.p_bd_dbm, abs=1e-10)
        assert a.p_r_dbm[0] == pytest.approx(b.p_r_dbm[0], abs=1e-10)
        assert a.delta_db == pytest.approx(b.delta_db, abs=1e-10)

    def test_suppression_against_baseline(self):
        sc = small_scenario(num_emitters=6)
        ch = nb.los_channel(sc)
        mrt = nb.po_mrt(ch.h_c)
        base = nb.evaluate(sc, ch, mrt).p_r_dbm[0]
        azf, _ = nb.weights_for_strategy("azf", ch.h_c, ch.h_dl)
        report = nb.evaluate(sc, ch, azf, baseline_p_r_dbm=base)
        assert report.suppression_db is not None
        assert report.suppression_db > 60.0

    def test_dimension_mismatch_rejected(self):
        sc, ch, _ = _null_fixture()
        with pytest.raises(ValueError, match="emitters"):
            nb.evaluate(sc, ch, nb.BeamWeights(x=[1.0, 1.0, 1.0]))


class TestSynthesizeSignal:
    def test_zero_symbol_removes_backscatter(self):
        sc, ch, weights = _null_fixture()
        out = nb.synthesize_signal(sc, ch, weights, bd_symbol=0.0)
        assert np.all(out.backscatter_term == 0)

    def test_exact_null_noise_free_leaves_backscatter_only(self):
        sc, ch, weights = _null_fixture()
        out = nb.synthesize_signal(sc, ch, weights, bd_symbol=1.0, noise_power=0.0)
        assert np.all(out.dli_term == 0)
        assert np.all(out.noise_term == 0)
        assert np.array_equal(out.y_r, out.backscatter_term)

    def test_decomposition_identity_is_exact(self):
        sc = small_scenario(num_emitters=4, num_readers=2, seed=2)
        ch = nb.los_channel(sc)
        weights = nb.po_mrt(ch.h_c)
        out = nb.synthesize_signal(sc, ch, weights, bd_symbol=-1.0,
                                   noise_power=1e-12, seed=5)
        assert np.array_equal(out.y_r,
                              out.dli_term + out.backscatter_term + out.noise_term)

    def test_dli_power_matches_channel_norm(self):
        sc = small_scenario(num_emitters=5, num_readers=2, seed=3)
        ch = nb.los_channel(sc)
        weights = nb.po_mrt(ch.h_c)
        out = nb.synthesize_signal(sc, ch, weights)
        scale = sc.per_emitter_power_w * sc.symbol_power
        lhs = float((np.abs(out.dli_term) ** 2).sum()) / scale
        rhs = float(np.linalg.norm(ch.h_dl @ weights.x) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_same_seed_is_deterministic(self):
        sc = small_scenario(num_emitters=3, seed=4)
        ch = nb.los_channel(sc)
        w = nb.po_mrt(ch.h_c)
        a = nb.synthesize_signal(sc, ch, w, noise_power=1e-9, seed=8)
        b = nb.synthesize_signal(sc, ch, w, noise_power=1e-9, seed=8)
        assert np.array_equal(a.y_r, b.y_r)

    def test_preconditions_enforced(self):
        sc, ch, weights = _null_fixture()
        with pytest.raises(ValueError, match="b"):
            nb.synthesize_signal(sc, ch, weights, bd_symbol=1.5)
        with pytest.raises(ValueError, match="noise_power"):
            nb.synthesize_signal(sc, ch, weights, noise_power=-1.0)
        bare = nb.ChannelSet(h_c=ch.h_c, h_dl=ch.h_dl)
        with pytest.raises(ValueError, match="h_r"):
            nb.synthesize_signal(sc, bare, weights)


class TestMetricsCsv:
    def test_single_row_with_header(self, tmp_path):
        sc = small_scenario(num_emitters=4)
        ch = nb.los_channel(sc)
        report = nb.evaluate(sc, ch, nb.po_mrt(ch.h_c), baseline_p_r_dbm=-10.0)
        path = tmp_path / "metrics.csv"
        nb.metrics.write_metrics_csv(report, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == nb.metrics.METRICS_CSV_HEADER
        assert len(rows) == 2
        assert float(rows[1][0]) == report.p_bd_dbm
        assert float(rows[1][4]) == report.suppression_db

    def test_missing_suppression_left_empty(self, tmp_path):
        sc = small_scenario(num_emitters=4)
        ch = nb.los_channel(sc)
        report = nb.evaluate(sc, ch, nb.po_mrt(ch.h_c))
        path = tmp_path / "metrics.csv"
        nb.metrics.write_metrics_csv(report, path)
        assert path.read_text().splitlines()[1].endswith(",")
