"""Acceptance suite: one test per criterion, each printing a verdict line.

The Monte Carlo criteria run 10^4 transmissions per SNR point and take
tens of minutes on one core; the module-scoped fixtures below share those
sweeps between criteria.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from polarbd.channel import modulate_bpsk, transmit_and_demodulate
from polarbd.cli import main as cli_main
from polarbd.code import construct_code, encode, polar_transform
from polarbd.decoder import decode_batch
from polarbd.latency import LatencyParams, cycles_to_seconds, worst_case_latency
from polarbd.sim import SimParams, run_experiment

from oracles import all_valid_inputs, forced_path_metric, sc_reference

TRIALS = 10_000
K57_SNRS = [0.9, 1.6, 2.3, 3.0]


def _verdict(num, name, ok, detail=""):
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} {detail}")
    return ok


@pytest.fixture(scope="module")
def k57_sent():
    return run_experiment(SimParams(k=57, ue_sent="on"), K57_SNRS, TRIALS, seed=2718)


@pytest.fixture(scope="module")
def k57_unsent():
    return run_experiment(SimParams(k=57, ue_sent="off"), K57_SNRS, TRIALS, seed=2719)


@pytest.fixture(scope="module")
def k32_sent():
    return run_experiment(SimParams(k=32, ue_sent="on"), [4.2], TRIALS, seed=2720)


@pytest.fixture(scope="module")
def k32_unsent():
    return run_experiment(
        SimParams(k=32, ue_sent="off"), [2.0, 3.1, 4.2], TRIALS, seed=2721
    )


def test_1_encoder_involution():
    t0 = time.perf_counter()
    for v in range(256):
        u = np.array([(v >> j) & 1 for j in range(8)], dtype=np.int8)
        assert np.array_equal(polar_transform(polar_transform(u)), u)
    rng = np.random.default_rng(101)
    for N in (256, 512):
        u = rng.integers(0, 2, size=(1000, N), dtype=np.int8)
        assert np.array_equal(polar_transform(polar_transform(u)), u)
    elapsed = time.perf_counter() - t0
    assert _verdict(1, "encoder involution", elapsed < 1.0, f"({elapsed:.2f} s)")


def test_2_sc_scl_reduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    for N, K in ((64, 16), (256, 57)):
        code = construct_code(N, K, id_len=16)
        payloads = rng.integers(0, 2, size=(1000, K))
        ids = rng.integers(0, 2, size=(1000, 16))
        symbols = modulate_bpsk(encode(code, payloads, ids))
        llrs = transmit_and_demodulate(symbols, 1.0, rng)
        results = decode_batch(code, llrs, 1)
        for row, res in zip(llrs, results):
            ref = sc_reference(code.frozen_mask, row)
            assert np.array_equal(res.payload, ref[code.info_positions])
            assert np.array_equal(res.decoded_id, ref[code.id_positions])
    elapsed = time.perf_counter() - t0
    assert _verdict(2, "SC/SCL reduction", elapsed < 10.0, f"({elapsed:.2f} s)")


def test_3_ml_oracle_equivalence():
    t0 = time.perf_counter()
    code = construct_code(16, K=4, id_len=2)
    inputs = all_valid_inputs(code)
    rng = np.random.default_rng(303)
    payloads = rng.integers(0, 2, size=(200, 4))
    ids = rng.integers(0, 2, size=(200, 2))
    symbols = modulate_bpsk(encode(code, payloads, ids))
    llrs = transmit_and_demodulate(symbols, 1.3, rng)
    results = decode_batch(code, llrs, 64)
    worst = 0.0
    for row, res in zip(llrs, results):
        best = min(forced_path_metric(u, row) for u in inputs)
        rel = abs(res.pm_best - best) / max(best, 1e-30)
        worst = max(worst, rel)
        assert rel <= 1e-9
    elapsed = time.perf_counter() - t0
    ok = elapsed < 30.0
    assert _verdict(3, "ML-oracle equivalence", ok,
                    f"(max rel err {worst:.2e}, {elapsed:.2f} s)")


def test_4_latency_table():
    reference = {1: (14720, 14.7), 2: (8330, 8.3), 3: (5555, 5.6),
                 4: (4710, 4.7), 5: (3620, 3.6)}
    detail = []
    for n_sclmax, (ref_cycles, ref_us) in reference.items():
        p = LatencyParams(k1=57, k2=57, n_sclmax=n_sclmax, t_sort=5)
        cycles = worst_case_latency(p)
        assert abs(cycles - ref_cycles) <= 15
        us = cycles_to_seconds(cycles, 1e9) * 1e6
        assert abs(us - ref_us) <= 0.0505
        table_us = cycles_to_seconds(ref_cycles, 1e9) * 1e6
        assert abs(table_us - ref_us) <= 0.0505
        detail.append(f"{n_sclmax}:{cycles:g}")
    assert _verdict(4, "latency table", True, "(" + " ".join(detail) if detail else "")


def _non_increasing_trend(values, counts):
    # statistical tolerance: one-sided binomial noise plus a small-count floor
    for prev, cur, n in zip(values, values[1:], counts[1:]):
        slack = 2 * math.sqrt(max(prev * (1 - prev), 0.0) / n) + 3.0 / n
        if cur > prev + slack:
            return False
    return True


def test_5_mdr_below_bler(k57_sent):
    rows = k57_sent
    assert len(rows) >= 4
    blers = [m.bler for m in rows]
    assert blers[0] >= 0.35, f"low-SNR BLER {blers[0]:.3f} misses ~0.5"
    assert blers[-1] <= 0.015, f"high-SNR BLER {blers[-1]:.4f} misses ~1e-2"
    detail = []
    ok = True
    for m in rows:
        se = math.sqrt(max(m.bler * (1 - m.bler), 1e-12) / m.sent_trials)
        ok = ok and (m.mdr <= m.bler + 2 * se)
        detail.append(f"{m.snr_db}dB:{m.mdr:.4f}<={m.bler:.4f}+{2 * se:.4f}")
        assert m.mdr <= m.bler + 2 * se, detail[-1]
    assert _non_increasing_trend([m.mdr for m in rows], [m.sent_trials for m in rows])
    assert _verdict(5, "MDR <= BLER", ok, "(" + "; ".join(detail) + ")")


def test_6_type1_far(k57_unsent):
    detail = []
    for m in k57_unsent:
        detail.append(f"{m.snr_db}dB:{m.far_type1:.2e}")
        assert m.far_type1 <= 1e-3, detail[-1]
    assert _non_increasing_trend(
        [m.far_type1 for m in k57_unsent], [m.unsent_trials for m in k57_unsent]
    )
    assert _verdict(6, "type-1 FAR", True, "(" + "; ".join(detail) + ")")


def test_7a_estimated_bits_k57(k57_sent):
    top = k57_sent[-1]
    assert top.bler <= 1e-2, f"BLER {top.bler:.4f} at top point exceeds 1e-2"
    frac = top.est_frac("n1", "sent")
    ok = abs(frac - 0.61) <= 0.05
    assert _verdict(7, "early-stopping average, K=57", ok,
                    f"(N=256 sent {frac:.3f} vs 0.61 +- 0.05)")


def test_7b_estimated_bits_k32(k32_sent):
    top = k32_sent[-1]
    assert top.bler <= 1e-2, f"BLER {top.bler:.4f} at top point exceeds 1e-2"
    frac = top.est_frac("n1", "sent")
    ok = abs(frac - 0.67) <= 0.05
    assert _verdict(7, "early-stopping average, K=32", ok,
                    f"(N=256 sent {frac:.3f} vs 0.67 +- 0.05)")


def test_7c_unsent_stability(k57_unsent, k32_unsent):
    detail = []
    ok = True
    for label, rows in (("K=57", k57_unsent), ("K=32", k32_unsent)):
        for tag in ("n1", "n2"):
            vals = [m.est_frac(tag, "unsent") for m in rows]
            spread = max(vals) - min(vals)
            detail.append(f"{label}/{tag}:{spread:.3f}")
            ok = ok and spread <= 0.05
            assert spread <= 0.05, detail[-1]
    assert _verdict(7, "ue-unsent stability", ok, "(" + "; ".join(detail) + ")")


def test_8_determinism(tmp_path):
    args = ["simulate", "--n1", "32", "--n2", "64", "--k", "8", "--id-len", "8",
            "--c1", "8", "--c2", "3", "--l1", "2", "--lmax", "4",
            "--snr-start", "2", "--snr-stop", "4", "--snr-step", "2",
            "--trials", "200", "--seed", "42"]
    single = tmp_path / "single.csv"
    multi = tmp_path / "multi.csv"
    assert cli_main(args + ["--jobs", "1", "--out", str(single)]) == 0
    assert cli_main(args + ["--jobs", "2", "--out", str(multi)]) == 0
    same = Path(single).read_bytes() == Path(multi).read_bytes()
    assert _verdict(8, "determinism across workers", same)
