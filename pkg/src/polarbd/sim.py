"""Monte Carlo harness: scenario generation, trials, metrics, CSV.

Each trial builds C1 candidate transmissions (half at each code length,
same payload size), sends them over the BPSK/AWGN channel, and runs the
two-phase blind detection pipeline. Outcomes are classified as:

* success: the true carrier detected with the correct payload;
* missed detection: UE ID sent but no success;
* type-1 false alarm: UE ID not sent but something detected;
* type-2 false alarm: UE ID sent but a different candidate (or a wrong
  payload) detected.

The block error rate is the system-level rate for the carrier codeword:
a trial counts as a block error when the carrier is not selected for the
second phase, or its second-phase decode stops early or returns any
wrong payload or ID bit. The missed detection rate can exceed it only
through ID collisions between candidates.

Every trial owns a counter-based RNG substream keyed by (seed, SNR index,
trial index), and all accumulators are integers, so results are identical
for any execution order, chunking, or worker count. Decoding is batched
across the trials of a chunk purely for speed; per-trial results are
unchanged by batching.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .blind import (
    BlindDetectionConfig,
    PhaseOneRecord,
    TrialStats,
    pick_detection,
    run_blind_detection,
    select_candidates,
)
from .channel import modulate_bpsk, snr_to_sigma, transmit_and_demodulate
from .code import construct_code, encode
from .decoder import decode_batch

_CHUNK_TRIALS = 128


@dataclass
class SimParams:
    """Static configuration of one experiment."""

    n1: int = 256
    n2: int = 512
    k: int = 57
    id_len: int = 16
    id_mode: int = 1
    design_snr_db: float = 0.0
    c1: int = 44
    c2: int = 5
    l1: int = 2
    lmax: int = 8
    early_stop: bool = True
    ue_sent: str = "mixed"  # "on" | "off" | "mixed" (alternating by trial)
    llr_dtype: str = "float32"  # decoder arithmetic width for simulation runs
    phase1_metric: str = "last_llr"

    def __post_init__(self):
        if self.c1 % 2 != 0:
            raise ValueError(f"C1 must be even, got {self.c1}")
        if self.ue_sent not in ("on", "off", "mixed"):
            raise ValueError(f"ue_sent must be on/off/mixed, got {self.ue_sent!r}")
        if self.llr_dtype not in ("float32", "float64"):
            raise ValueError(f"llr_dtype must be float32/float64, got {self.llr_dtype!r}")

    def build_codes(self):
        return (
            construct_code(self.n1, self.k, self.id_len, self.id_mode, self.design_snr_db),
            construct_code(self.n2, self.k, self.id_len, self.id_mode, self.design_snr_db),
        )

    def trial_sent(self, trial_index):
        if self.ue_sent == "mixed":
            return trial_index % 2 == 0
        return self.ue_sent == "on"


@dataclass
class CandidateSpec:
    code: object
    payload: np.ndarray
    id_bits: np.ndarray
    carries_ue_id: bool


@dataclass
class TransmissionScenario:
    candidates: list
    ue_sent: bool
    rng: object

    @property
    def carrier_index(self):
        for i, c in enumerate(self.candidates):
            if c.carries_ue_id:
                return i
        return None


def trial_rng(seed, snr_index, trial_index):
    """Counter-based substream for one trial."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([seed, snr_index, trial_index]))
    )


def derive_ue_id(seed, id_len):
    """Deterministic UE ID for an experiment seed."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x1D])))
    return rng.integers(0, 2, size=id_len).astype(np.int8)


def generate_scenario(codes, c1, ue_id, ue_sent, rng):
    """Draw one trial's candidate set.

    The first C1/2 candidates use the short code, the rest the long one.
    Payloads are uniform; non-carrier IDs are uniform over the ID space
    excluding the UE ID; when ``ue_sent`` the carrier is uniform over the
    C1 locations. Draw order (payloads, IDs, carrier) is part of the
    reproducibility contract.
    """
    if c1 % 2 != 0:
        raise ValueError(f"C1 must be even, got {c1}")
    code1, code2 = codes
    if code1.id_len != code2.id_len:
        raise ValueError("both codes must use the same ID length")
    id_len = code1.id_len
    ue_id = np.asarray(ue_id, dtype=np.int8)
    ue_int = int("".join(str(int(b)) for b in ue_id), 2)

    payloads = rng.integers(0, 2, size=(c1, code1.K)).astype(np.int8)
    raw = rng.integers(0, (1 << id_len) - 1, size=c1)
    raw = np.where(raw >= ue_int, raw + 1, raw)
    carrier = int(rng.integers(0, c1)) if ue_sent else -1

    candidates = []
    for i in range(c1):
        code = code1 if i < c1 // 2 else code2
        if i == carrier:
            id_bits = ue_id.copy()
        else:
            v = int(raw[i])
            id_bits = np.array(
                [(v >> j) & 1 for j in range(id_len - 1, -1, -1)], dtype=np.int8
            )
        candidates.append(
            CandidateSpec(code=code, payload=payloads[i], id_bits=id_bits,
                          carries_ue_id=(i == carrier))
        )
    return TransmissionScenario(candidates=candidates, ue_sent=ue_sent, rng=rng)


def transmit_scenario(scenario, ebn0_db):
    """Modulate every candidate and push it through the AWGN channel.

    Noise is drawn from the scenario's stream in two group calls (short
    code block first), which fixes the draw order regardless of caller.
    Returns the list of (code, llr vector) pairs for the pipeline.
    """
    cands = scenario.candidates
    half = len(cands) // 2
    out = []
    for lo, hi in ((0, half), (half, len(cands))):
        code = cands[lo].code
        sigma = snr_to_sigma(ebn0_db, code.rate)
        tx = encode(
            code,
            np.stack([c.payload for c in cands[lo:hi]]),
            np.stack([c.id_bits for c in cands[lo:hi]]),
        )
        llrs = transmit_and_demodulate(modulate_bpsk(tx), sigma, scenario.rng)
        out.extend((code, llrs[j]) for j in range(hi - lo))
    return out


@dataclass
class TrialOutcome:
    ue_sent: bool
    success: bool
    missed: bool
    type1: bool
    type2: bool
    block_error: bool  # standalone decode of the carrier; False when unsent
    detection_index: int | None
    carrier_index: int | None
    # (is_long_code, carrier_on_same_length, estimated leaf count, N)
    est_records: list = field(default_factory=list)


def _classify(scenario, detection, carrier_payload):
    ue_sent = scenario.ue_sent
    carrier = scenario.carrier_index
    success = missed = type1 = type2 = False
    if ue_sent:
        success = (
            detection is not None
            and detection.candidate_index == carrier
            and np.array_equal(detection.payload, carrier_payload)
        )
        missed = not success
        type2 = detection is not None and not success
    else:
        type1 = detection is not None
    return success, missed, type1, type2


def _est_records(scenario, stats):
    # estimated-leaf counters keyed by (code length, trial carried the UE ID)
    recs = []
    for idx, res in stats.phase2_results:
        code = scenario.candidates[idx].code
        leaves = round(res.estimated_fraction * code.N)
        recs.append((code.N, scenario.ue_sent, leaves))
    return recs


def _carrier_block_error(scenario, stats):
    """System-level block error: the carrier's second-phase decode failed.

    A carrier that never reaches the second phase is a lost block; one
    that does must come back complete with every payload and ID bit right.
    """
    carrier = scenario.carrier_index
    if carrier is None:
        return False
    if carrier not in stats.selected:
        return True
    spec = scenario.candidates[carrier]
    res = dict(stats.phase2_results)[carrier]
    return res.stopped_early or not (
        np.array_equal(res.payload, spec.payload)
        and np.array_equal(res.decoded_id, spec.id_bits)
    )


def run_trial(scenario, config, ebn0_db):
    """Transmit, blind-detect, and classify one scenario."""
    candidates = transmit_scenario(scenario, ebn0_db)
    detection, stats = run_blind_detection(candidates, config)

    carrier = scenario.carrier_index
    carrier_payload = (
        scenario.candidates[carrier].payload if carrier is not None else None
    )
    block_error = _carrier_block_error(scenario, stats)
    success, missed, type1, type2 = _classify(scenario, detection, carrier_payload)
    return TrialOutcome(
        ue_sent=scenario.ue_sent,
        success=success,
        missed=missed,
        type1=type1,
        type2=type2,
        block_error=block_error,
        detection_index=None if detection is None else detection.candidate_index,
        carrier_index=carrier,
        est_records=_est_records(scenario, stats),
    )


# ---------------------------------------------------------------------------
# Metrics accumulation


@dataclass
class Metrics:
    """Integer counters for one SNR point; rates are derived on demand."""

    snr_db: float
    n1: int
    n2: int
    trials: int = 0
    sent_trials: int = 0
    unsent_trials: int = 0
    successes: int = 0
    missed_detections: int = 0
    type1_false_alarms: int = 0
    type2_false_alarms: int = 0
    block_errors: int = 0
    est_leaves_n1_sent: int = 0
    est_count_n1_sent: int = 0
    est_leaves_n1_unsent: int = 0
    est_count_n1_unsent: int = 0
    est_leaves_n2_sent: int = 0
    est_count_n2_sent: int = 0
    est_leaves_n2_unsent: int = 0
    est_count_n2_unsent: int = 0

    def update(self, outcome):
        self.trials += 1
        if outcome.ue_sent:
            self.sent_trials += 1
        else:
            self.unsent_trials += 1
        self.successes += outcome.success
        self.missed_detections += outcome.missed
        self.type1_false_alarms += outcome.type1
        self.type2_false_alarms += outcome.type2
        self.block_errors += outcome.block_error
        for code_n, sent_here, leaves in outcome.est_records:
            tag = "n1" if code_n == self.n1 else "n2"
            cls = "sent" if sent_here else "unsent"
            setattr(self, f"est_leaves_{tag}_{cls}",
                    getattr(self, f"est_leaves_{tag}_{cls}") + leaves)
            setattr(self, f"est_count_{tag}_{cls}",
                    getattr(self, f"est_count_{tag}_{cls}") + 1)

    def merge(self, other):
        for f in fields(self):
            if f.name in ("snr_db", "n1", "n2"):
                continue
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    @staticmethod
    def _rate(num, den):
        return num / den if den else math.nan

    @property
    def bler(self):
        return self._rate(self.block_errors, self.sent_trials)

    @property
    def mdr(self):
        return self._rate(self.missed_detections, self.sent_trials)

    @property
    def far_type1(self):
        return self._rate(self.type1_false_alarms, self.unsent_trials)

    @property
    def far_type2(self):
        return self._rate(self.type2_false_alarms, self.sent_trials)

    def est_frac(self, tag, cls):
        n = self.n1 if tag == "n1" else self.n2
        return self._rate(
            getattr(self, f"est_leaves_{tag}_{cls}"),
            getattr(self, f"est_count_{tag}_{cls}") * n,
        )


# ---------------------------------------------------------------------------
# Chunked experiment runner


def _record_phase1(results, config):
    return [
        PhaseOneRecord(
            i,
            config.reliability_of(res),
            bool(np.array_equal(res.decoded_id, config.ue_id)),
        )
        for i, res in enumerate(results)
    ]


def _run_chunk(params, codes, ue_id, snr_index, ebn0_db, trial_lo, trial_hi, seed):
    """Run a contiguous block of trials with decodes batched across trials.

    Produces exactly the same per-trial outcomes as :func:`run_trial`.
    """
    config = BlindDetectionConfig(
        ue_id=ue_id, c1=params.c1, c2=params.c2, l1=params.l1,
        lmax=params.lmax, early_stop_enabled=params.early_stop,
        llr_dtype=params.llr_dtype, phase1_metric=params.phase1_metric,
    )
    dtype = np.dtype(params.llr_dtype)
    code1, code2 = codes
    half = params.c1 // 2
    trials = list(range(trial_lo, trial_hi))

    scenarios, llr_rows = [], []
    for t in trials:
        rng = trial_rng(seed, snr_index, t)
        scen = generate_scenario(codes, params.c1, ue_id, params.trial_sent(t), rng)
        scenarios.append(scen)
        llr_rows.append(transmit_scenario(scen, ebn0_db))

    T = len(trials)
    metrics = Metrics(snr_db=ebn0_db, n1=params.n1, n2=params.n2)
    if T == 0:
        return metrics

    # Phase 1 for every candidate of every trial, one batch per length.
    p1 = [[None] * params.c1 for _ in range(T)]
    for code, sel in ((code1, range(0, half)), (code2, range(half, params.c1))):
        rows = np.concatenate([[llr_rows[t][i][1] for i in sel] for t in range(T)])
        out = decode_batch(code, rows, params.l1, dtype=dtype)
        for t in range(T):
            for j, i in enumerate(sel):
                p1[t][i] = out[t * len(sel) + j]

    # Selection per trial, then phase 2 batched per length.
    records = [_record_phase1(p1[t], config) for t in range(T)]
    selected = [select_candidates(records[t], params.c2) for t in range(T)]
    early = ue_id if params.early_stop else None
    members = {code1.N: [], code2.N: []}
    for t in range(T):
        for idx in selected[t]:
            code, llrs = llr_rows[t][idx]
            members[code.N].append((t, idx, llrs))
    p2 = {t: [] for t in range(T)}
    for code in (code1, code2):
        group = members[code.N]
        if not group:
            continue
        rows = np.stack([llrs for _, _, llrs in group])
        out = decode_batch(code, rows, params.lmax, early, dtype=dtype)
        for (t, idx, _), res in zip(group, out):
            p2[t].append((idx, res))

    for t in range(T):
        # phase-2 results arrive grouped by length; restore selection order
        ordered = sorted(p2[t], key=lambda pair: selected[t].index(pair[0]))
        detection = pick_detection(ordered, ue_id)
        stats = TrialStats(records[t], selected[t], ordered, detection)
        scen = scenarios[t]
        carrier = scen.carrier_index
        payload = scen.candidates[carrier].payload if carrier is not None else None
        success, missed, type1, type2 = _classify(scen, detection, payload)
        metrics.update(TrialOutcome(
            ue_sent=scen.ue_sent,
            success=success,
            missed=missed,
            type1=type1,
            type2=type2,
            block_error=_carrier_block_error(scen, stats),
            detection_index=None if detection is None else detection.candidate_index,
            carrier_index=carrier,
            est_records=_est_records(scen, stats),
        ))
    return metrics


def run_experiment(params, snr_points, trials_per_point, seed, jobs=1, ue_id=None):
    """Sweep SNR points, accumulating one :class:`Metrics` per point.

    ``jobs`` > 1 distributes fixed-size trial chunks over worker
    processes; the chunk layout and merge order are independent of the
    worker count, so results (and CSV bytes) never depend on it.
    """
    if trials_per_point < 1:
        raise ValueError(f"trials_per_point must be >= 1, got {trials_per_point}")
    codes = params.build_codes()
    if ue_id is None:
        ue_id = derive_ue_id(seed, params.id_len)
    ue_id = np.asarray(ue_id, dtype=np.int8)

    chunk_args = []
    for si, snr in enumerate(snr_points):
        for lo in range(0, trials_per_point, _CHUNK_TRIALS):
            hi = min(lo + _CHUNK_TRIALS, trials_per_point)
            chunk_args.append((params, codes, ue_id, si, float(snr), lo, hi, seed))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            partials = list(pool.map(_run_chunk_star, chunk_args, chunksize=1))
    else:
        partials = [_run_chunk(*args) for args in chunk_args]

    out = []
    per_point = (trials_per_point + _CHUNK_TRIALS - 1) // _CHUNK_TRIALS
    for si, snr in enumerate(snr_points):
        total = Metrics(snr_db=float(snr), n1=params.n1, n2=params.n2)
        for part in partials[si * per_point:(si + 1) * per_point]:
            total.merge(part)
        out.append(total)
    return out


def _run_chunk_star(args):
    return _run_chunk(*args)


# ---------------------------------------------------------------------------
# CSV emission

CSV_COLUMNS = [
    "snr_db", "trials", "bler", "mdr", "far_type1", "far_type2",
    "avg_est_frac_n1_sent", "avg_est_frac_n1_unsent",
    "avg_est_frac_n2_sent", "avg_est_frac_n2_unsent",
]


def _fmt(x):
    return format(x, ".6g")


def emit_csv(metrics_rows, destination):
    """Write one CSV row per SNR point to a path or file-like object.

    Rates are decimals with six significant digits; undefined rates (zero
    denominator) are written as nan.
    """
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    fh = open(destination, "w", newline="") if own else destination
    try:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for m in metrics_rows:
            w.writerow([
                _fmt(m.snr_db), m.trials, _fmt(m.bler), _fmt(m.mdr),
                _fmt(m.far_type1), _fmt(m.far_type2),
                _fmt(m.est_frac("n1", "sent")), _fmt(m.est_frac("n1", "unsent")),
                _fmt(m.est_frac("n2", "sent")), _fmt(m.est_frac("n2", "unsent")),
            ])
    finally:
        if own:
            fh.close()
