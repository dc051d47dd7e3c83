import pytest

from polarbd.latency import (
    LatencyParams,
    average_latency,
    cycles_to_seconds,
    t_scl,
    worst_case_latency,
)

# Published reference rows for K=57, C1=44, C2=5, L1=2, Lmax=8, 1 GHz.
REFERENCE_WORST = {1: 14720, 2: 8330, 3: 5555, 4: 4710, 5: 3620}
REFERENCE_US = {1: 14.7, 2: 8.3, 3: 5.6, 4: 4.7, 5: 3.6}


def params(n_sclmax, **kw):
    defaults = dict(
        n1=256, n2=512, k1=57, k2=57, c1=44, c2=5, l1=2, lmax=8,
        n_sclmax=n_sclmax, t_sort=5,
    )
    defaults.update(kw)
    return LatencyParams(**defaults)


class TestTscl:
    def test_reference_values(self):
        assert t_scl(256, 57) == 583
        assert t_scl(512, 57) == 1095
        assert t_scl(256, 8) == 534


class TestWorstCase:
    def test_single_decoder(self):
        assert worst_case_latency(params(1)) == 14709

    def test_five_decoders(self):
        assert worst_case_latency(params(5)) == 3617

    @pytest.mark.parametrize("n_sclmax", [1, 2, 3, 4, 5])
    def test_within_reference_tolerance(self, n_sclmax):
        got = worst_case_latency(params(n_sclmax))
        assert abs(got - REFERENCE_WORST[n_sclmax]) <= 15

    def test_empty_workload_is_sort_only(self):
        assert worst_case_latency(params(3, c1=0, c2=0)) == 5

    def test_monotone_in_decoder_count(self):
        vals = [worst_case_latency(params(n)) for n in range(1, 9)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_effective_phase1_decoders(self):
        assert params(3).n_scl1 == 12
        assert params(3, l1=3).n_scl1 == 6  # floor(8/3) = 2 per decoder

    def test_rejects_zero_decoders(self):
        with pytest.raises(ValueError):
            params(0)


class TestAverage:
    def test_no_early_stop_meets_worst_case(self):
        # With E = 1 and enough decoders the average is exactly the worst case.
        for n_sclmax in (5, 6, 10):
            p = params(n_sclmax, e1=1.0, e2=1.0)
            assert average_latency(p) == worst_case_latency(p)

    @pytest.mark.parametrize("n_sclmax", [1, 2, 3, 4, 5])
    def test_never_exceeds_worst_case(self, n_sclmax):
        for e1, e2 in ((1.0, 1.0), (0.7, 0.9), (0.55, 0.62), (0.1, 1.0)):
            p = params(n_sclmax, e1=e1, e2=e2)
            assert average_latency(p) <= worst_case_latency(p)

    def test_reference_average_row(self):
        # The published 3696-cycle average row is hit by stop fractions
        # near 0.70; accept the value within the tolerance of measured Es.
        p = params(4, e1=0.70, e2=0.70)
        assert average_latency(p) == pytest.approx(3696, abs=60)

    def test_case_split_boundary(self):
        below = params(4, e1=0.5, e2=0.5)
        at = params(5, e1=0.5, e2=0.5)
        assert average_latency(below) > average_latency(at)

    def test_rejects_bad_fraction(self):
        with pytest.raises(ValueError):
            params(2, e1=0.0)
        with pytest.raises(ValueError):
            params(2, e2=1.5)


class TestCyclesToSeconds:
    def test_reference_microseconds(self):
        for n_sclmax, cycles in REFERENCE_WORST.items():
            us = cycles_to_seconds(cycles, 1e9) * 1e6
            assert round(us, 1) == pytest.approx(REFERENCE_US[n_sclmax], abs=0.051)

    def test_computed_cycles_match_reference_microseconds(self):
        for n_sclmax in range(1, 6):
            us = cycles_to_seconds(worst_case_latency(params(n_sclmax)), 1e9) * 1e6
            assert round(us, 1) == pytest.approx(REFERENCE_US[n_sclmax], abs=0.051)

    def test_zero(self):
        assert cycles_to_seconds(0, 123.0) == 0.0

    def test_rejects_bad_frequency(self):
        with pytest.raises(ValueError):
            cycles_to_seconds(100, 0.0)
