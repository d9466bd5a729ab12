import numpy as np
import pytest

from cvqkd_rates import (
    ChannelParams,
    DomainError,
    EmptyRegion,
    NoPositiveRate,
    ProtocolConfig,
    SweepCurve,
    Variant,
    gg02_key_rate,
    key_rate_at,
    key_rate_vs_cp,
    key_rate_vs_loss,
    max_secure_v_p_b,
    max_tolerable_noise,
    physicality_parabola,
    protocol_key_rate,
    scan_region,
    transmittance_from_loss_db,
    worst_case_key_rate,
)
from cvqkd_rates._pool import map_ordered, worker_count

# Security/physicality crossing for V_M=10, eta_x=0.1, eps_x=0.05,
# located by an independent high-resolution bisection.
REF_CROSSING = 1.0053020450402255


def interval_length(intervals):
    return sum(hi - lo for lo, hi in intervals)


class TestScanRegion:
    def test_reference_region_structure(self, ref_config, ref_channel):
        parabola = physicality_parabola(ref_config, ref_channel)
        region = scan_region(ref_config, ref_channel, (parabola.v0, 1.01), 31)
        axis = region.v_p_b_axis
        assert np.all(np.diff(axis) > 0.0)
        assert axis[0] == pytest.approx(parabola.v0, abs=1e-12)

        for record in region.records:
            assert interval_length(record.secure_intervals) <= (record.c_hi - record.c_lo) + 1e-9
            for lo, hi in record.secure_intervals:
                assert lo >= record.c_lo - 1e-9 and hi <= record.c_hi + 1e-9

        crossing = region.max_secure_v_p_b
        assert crossing is not None
        assert parabola.v0 < crossing < 1.01
        assert crossing == pytest.approx(REF_CROSSING, abs=5e-6)

        for record in region.records:
            physical = record.c_hi - record.c_lo
            secure = interval_length(record.secure_intervals)
            if record.v_p_b < crossing - 1e-4:
                assert secure == pytest.approx(physical, abs=1e-6)
            if record.v_p_b > crossing + 1e-3:
                assert secure < physical - 1e-6

    def test_worst_case_columns_match_engine(self, ref_config, ref_channel):
        parabola = physicality_parabola(ref_config, ref_channel)
        region = scan_region(ref_config, ref_channel, (parabola.v0, 1.005), 5)
        for record in region.records:
            worst = worst_case_key_rate(ref_config, ref_channel, record.v_p_b)
            assert record.worst_case_key_rate == worst.key_rate
            assert record.worst_case_c_p == worst.c_p_evaluated

    def test_noiseless_vertex_slice_is_single_point(self):
        config = ProtocolConfig(10.0)
        channel = ChannelParams(eta_x=0.1, eps_x=0.0)
        region = scan_region(config, channel, (1.0, 1.0002), 3)
        first = region.records[0]
        assert first.c_lo == first.c_hi
        assert first.secure_intervals == ((first.c_lo, first.c_hi),)

    def test_range_below_vertex_raises(self, ref_config, ref_channel):
        with pytest.raises(EmptyRegion):
            scan_region(ref_config, ref_channel, (0.9, 0.99), 5)

    def test_resolution_validation(self, ref_config, ref_channel):
        with pytest.raises(DomainError):
            scan_region(ref_config, ref_channel, (1.0, 1.01), 1)

    def test_short_range_has_no_crossing(self, ref_config, ref_channel):
        parabola = physicality_parabola(ref_config, ref_channel)
        region = scan_region(ref_config, ref_channel, (parabola.v0, parabola.v0 + 1e-3), 3)
        assert region.max_secure_v_p_b is None


class TestMaxSecureVpb:
    def test_rate_changes_sign_at_crossing(self, ref_config, ref_channel):
        crossing = max_secure_v_p_b(ref_config, ref_channel)
        assert crossing == pytest.approx(REF_CROSSING, abs=5e-6)
        below = worst_case_key_rate(ref_config, ref_channel, crossing - 1e-4).key_rate
        above = worst_case_key_rate(ref_config, ref_channel, crossing + 1e-4).key_rate
        assert below > 0.0 > above

    def test_crossing_decreases_with_noise(self, ref_config):
        crossings = [
            max_secure_v_p_b(ref_config, ChannelParams(eta_x=0.1, eps_x=eps))
            for eps in (0.02, 0.05, 0.08)
        ]
        assert crossings[0] > crossings[1] > crossings[2]


class TestKeyRateVsCp:
    def test_minimum_consistent_with_worst_case(self, ref_config, ref_channel):
        curve = key_rate_vs_cp(ref_config, ref_channel, 1.004, 2001)
        worst = worst_case_key_rate(ref_config, ref_channel, 1.004)
        assert float(curve.ordinate.min()) >= worst.key_rate - 1e-12
        assert float(curve.ordinate.min()) - worst.key_rate < 1e-6

    def test_two_zero_crossings(self, ref_config, ref_channel):
        curve = key_rate_vs_cp(ref_config, ref_channel, 1.00535, 2001)
        signs = np.sign(curve.ordinate)
        assert int(np.sum(signs[:-1] * signs[1:] < 0)) >= 2

    def test_degenerate_interval_gives_single_point(self):
        config = ProtocolConfig(10.0)
        channel = ChannelParams(eta_x=0.1, eps_x=0.0)
        curve = key_rate_vs_cp(config, channel, 1.0, 101)
        assert curve.abscissa.size == 1

    def test_matches_point_evaluation(self, ref_config, ref_channel):
        from cvqkd_rates import PQuadObservation

        curve = key_rate_vs_cp(ref_config, ref_channel, 1.002, 11)
        for c, k in zip(curve.abscissa[1:-1], curve.ordinate[1:-1]):
            point = key_rate_at(ref_config, ref_channel, PQuadObservation(1.002, float(c)))
            assert k == pytest.approx(point.key_rate, abs=1e-10)


class TestSweepCurve:
    def test_requires_increasing_abscissa(self):
        with pytest.raises(DomainError):
            SweepCurve(np.array([1.0, 1.0]), np.array([0.0, 0.0]), "x")

    def test_arrays_read_only(self):
        curve = SweepCurve(np.array([1.0, 2.0]), np.array([0.0, 0.0]), "x")
        with pytest.raises(ValueError):
            curve.ordinate[0] = 1.0


class TestKeyRateVsLoss:
    def test_noiseless_baseline_matches_closed_form(self):
        loss_db = -10.0 * np.log10(0.5)
        curves = key_rate_vs_loss(
            ProtocolConfig(1e4),
            0.0,
            (loss_db, loss_db, 1.0),
            [Variant.GG02],
        )
        assert curves[0].ordinate[0] == pytest.approx(0.5, rel=0.01)

    def test_variant_ordering(self):
        curves = key_rate_vs_loss(ProtocolConfig(100.0), 0.05, (0.0, 30.0, 5.0))
        gg02, estimated, pessimistic = (curve.ordinate for curve in curves)
        assert np.all(gg02 >= estimated - 1e-12)
        assert np.all(estimated >= pessimistic - 1e-12)

    def test_monotone_in_loss_while_secure(self):
        # Non-increasing as long as the rate stays positive; once the
        # protocol is insecure the (negative) bound may shrink in magnitude.
        curves = key_rate_vs_loss(ProtocolConfig(100.0), 0.05, (0.0, 24.0, 3.0))
        for curve in curves:
            secure = curve.ordinate > 0.0
            cutoff = int(np.argmin(secure)) if not secure.all() else len(secure) - 1
            assert np.all(np.diff(curve.ordinate[: cutoff + 1]) <= 1e-12)

    def test_axis_from_step(self):
        curves = key_rate_vs_loss(ProtocolConfig(10.0), 0.0, (0.0, 2.0, 0.5), [Variant.GG02])
        np.testing.assert_allclose(curves[0].abscissa, [0.0, 0.5, 1.0, 1.5, 2.0])

    def test_deterministic_across_worker_counts(self, monkeypatch):
        def run():
            return key_rate_vs_loss(ProtocolConfig(100.0), 0.05, (0.0, 10.0, 2.0))

        monkeypatch.setenv("CVQKD_RATES_THREADS", "1")
        serial = run()
        monkeypatch.setenv("CVQKD_RATES_THREADS", "4")
        threaded = run()
        for a, b in zip(serial, threaded):
            assert np.array_equal(a.ordinate, b.ordinate)
            assert np.array_equal(a.abscissa, b.abscissa)


class TestWorkerPool:
    def test_zero_means_auto(self, monkeypatch):
        monkeypatch.setenv("CVQKD_RATES_THREADS", "0")
        assert worker_count() >= 1

    def test_explicit_cap(self, monkeypatch):
        monkeypatch.setenv("CVQKD_RATES_THREADS", "3")
        assert worker_count() == 3

    def test_invalid_value_rejected(self, monkeypatch):
        monkeypatch.setenv("CVQKD_RATES_THREADS", "many")
        with pytest.raises(DomainError):
            worker_count()

    def test_map_ordered_preserves_order(self, monkeypatch):
        monkeypatch.setenv("CVQKD_RATES_THREADS", "4")
        assert map_ordered(lambda x: x * x, range(10)) == [x * x for x in range(10)]


class TestMaxTolerableNoise:
    def test_rate_vanishes_at_threshold(self):
        config = ProtocolConfig(100.0)
        for variant in (Variant.UD_PESSIMISTIC, Variant.GG02):
            eps_max = max_tolerable_noise(config, 3.0, variant)
            eta = transmittance_from_loss_db(3.0)
            rate = protocol_key_rate(
                ProtocolConfig(100.0, variant), ChannelParams.symmetric(eta, eps_max)
            ).key_rate
            assert abs(rate) < 1e-6

    def test_optimistic_close_to_pessimistic_at_low_loss(self):
        config = ProtocolConfig(100.0)
        pess = max_tolerable_noise(config, 1.0, Variant.UD_PESSIMISTIC)
        opt = max_tolerable_noise(config, 1.0, Variant.UD_OPTIMISTIC_CP_MAX)
        assert opt >= pess - 1e-9
        assert abs(opt - pess) / pess < 0.05

    def test_monotone_in_loss_for_every_variant(self):
        config = ProtocolConfig(100.0)
        for variant in Variant:
            values = [
                max_tolerable_noise(config, loss, variant) for loss in (1.0, 3.0, 7.0)
            ]
            assert values[0] >= values[1] >= values[2], variant

    def test_no_positive_rate_raised(self):
        config = ProtocolConfig(100.0, Variant.UD_PESSIMISTIC)
        with pytest.raises(NoPositiveRate):
            max_tolerable_noise(config, 15.0, beta=0.45)

    def test_gg02_exceeds_single_quadrature(self):
        config = ProtocolConfig(100.0)
        gg02 = max_tolerable_noise(config, 2.0, Variant.GG02)
        est = max_tolerable_noise(config, 2.0, Variant.UD_P_ESTIMATED)
        pess = max_tolerable_noise(config, 2.0, Variant.UD_PESSIMISTIC)
        assert gg02 >= est >= pess


class TestSymmetricSweepConsistency:
    def test_protocol_key_rate_defaults_to_symmetric_variance(self):
        channel = ChannelParams.symmetric(0.3, 0.1)
        config = ProtocolConfig(20.0, Variant.UD_PESSIMISTIC)
        implicit = protocol_key_rate(config, channel)
        explicit = worst_case_key_rate(config, channel, 1.0 + 0.3 * 0.1)
        assert implicit.key_rate == explicit.key_rate

    def test_gg02_uses_both_quadratures(self):
        config = ProtocolConfig(20.0, Variant.GG02)
        sym = gg02_key_rate(config, ChannelParams.symmetric(0.3, 0.1))
        asym = gg02_key_rate(config, ChannelParams(eta_x=0.3, eps_x=0.1, eta_p=0.3, eps_p=0.4))
        assert sym.key_rate != asym.key_rate
