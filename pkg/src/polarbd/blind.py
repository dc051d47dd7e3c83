"""Two-phase blind detection pipeline.

All candidates are first decoded with a small list size and no early
stopping; their reliabilities are sorted to pick a short list for a
second decode at the full list size, where early stopping against the
expected ID can abort hopeless candidates. A candidate is detected only
if its second-phase decode matches the expected ID exactly.

Reliability semantics: higher always means more trustworthy. Matching
candidates over quota keep the highest reliabilities; remaining slots are
filled with the lowest reliabilities, since unreliable decodes are the
ones a wanted transmission could be hiding behind.
"""

from dataclasses import dataclass, field

import numpy as np

from .decoder import decode_batch


@dataclass
class BlindDetectionConfig:
    """Parameters of the two-phase search.

    ``ue_id`` is the expected ID bit-vector. Early stopping applies to the
    second phase only; the first phase always decodes to completion.
    """

    ue_id: np.ndarray
    c1: int = 44
    c2: int = 5
    l1: int = 2
    lmax: int = 8
    early_stop_enabled: bool = True
    llr_dtype: str = "float64"
    phase1_metric: str = "last_llr"  # or "neg_pm": minus the best path metric

    def __post_init__(self):
        self.ue_id = np.asarray(self.ue_id, dtype=np.int8).ravel()
        if not 1 <= self.l1 < self.lmax:
            raise ValueError(f"need 1 <= L1 < Lmax, got L1={self.l1}, Lmax={self.lmax}")
        if not 1 <= self.c2 <= self.c1:
            raise ValueError(f"need 1 <= C2 <= C1, got C1={self.c1}, C2={self.c2}")
        if self.phase1_metric not in ("last_llr", "neg_pm"):
            raise ValueError(f"unknown phase1_metric {self.phase1_metric!r}")

    def reliability_of(self, result):
        """Phase-1 sorting metric of one decode result (higher = safer)."""
        if self.phase1_metric == "last_llr":
            return result.final_leaf_llr
        return result.reliability


@dataclass
class PhaseOneRecord:
    candidate_index: int
    reliability: float
    id_match: bool


@dataclass
class Detection:
    """A detected transmission; ``decoded_id`` always equals the UE ID."""

    candidate_index: int
    payload: np.ndarray
    decoded_id: np.ndarray


@dataclass
class TrialStats:
    """Everything observable about one pipeline run."""

    phase1_records: list
    selected: list
    phase2_results: list = field(default_factory=list)  # (candidate_index, DecodeResult)
    detection: Detection | None = None

    @property
    def stop_count(self):
        return sum(r.stopped_early for _, r in self.phase2_results)


def _decode_grouped(candidates, list_size, early_stop, dtype=np.float64):
    """Decode (code, llrs) pairs batched per shared code object."""
    groups = {}
    for pos, (code, llrs) in enumerate(candidates):
        groups.setdefault(id(code), (code, []))[1].append((pos, llrs))
    results = [None] * len(candidates)
    for code, members in groups.values():
        rows = np.array([llrs for _, llrs in members])
        decoded = decode_batch(code, rows, list_size, early_stop, dtype=dtype)
        for (pos, _), res in zip(members, decoded):
            results[pos] = res
    return results


def phase1(candidates, config):
    """First decoding pass over all candidates, early stopping disabled.

    ``candidates`` is a list of (PolarCode, llr vector) of length C1.
    Returns one :class:`PhaseOneRecord` per candidate, carrying the
    reliability and whether the decoded ID equals the UE ID.
    """
    if len(candidates) != config.c1:
        raise ValueError(f"expected {config.c1} candidates, got {len(candidates)}")
    results = _decode_grouped(candidates, config.l1, None, np.dtype(config.llr_dtype))
    return [
        PhaseOneRecord(
            candidate_index=i,
            reliability=config.reliability_of(res),
            id_match=bool(np.array_equal(res.decoded_id, config.ue_id)),
        )
        for i, res in enumerate(results)
    ]


def select_candidates(records, c2):
    """Pick at most ``c2`` candidates for the second phase.

    All ID-matching records are taken (trimmed to the ``c2`` highest
    reliabilities when over quota); leftover slots go to the non-matching
    records with the lowest reliabilities. Ties break toward the lower
    candidate index. Output lists matches first (descending reliability),
    then fills (ascending reliability).
    """
    matches = sorted(
        (r for r in records if r.id_match),
        key=lambda r: (-r.reliability, r.candidate_index),
    )
    fills = sorted(
        (r for r in records if not r.id_match),
        key=lambda r: (r.reliability, r.candidate_index),
    )
    chosen = matches[:c2]
    chosen += fills[: c2 - len(chosen)]
    return [r.candidate_index for r in chosen]


def phase2(selected, config):
    """Second decoding pass at full list size over the selected candidates.

    ``selected`` is a list of (candidate_index, PolarCode, llr vector).
    Early stopping against the UE ID is applied when enabled; with it
    disabled the ID is only checked at the end, so results for candidates
    not carrying the UE ID do not depend on it. Returns the detection (the
    matching candidate with the smallest path metric, or None) and the
    per-candidate decode results.
    """
    early = config.ue_id if config.early_stop_enabled else None
    results = _decode_grouped(
        [(code, llrs) for _, code, llrs in selected], config.lmax, early,
        np.dtype(config.llr_dtype),
    )
    paired = [(idx, res) for (idx, _, _), res in zip(selected, results)]
    return pick_detection(paired, config.ue_id), paired


def pick_detection(paired, ue_id):
    """Detection rule: the ID-matching decode with the smallest metric.

    ``paired`` holds (candidate_index, DecodeResult). Stopped decodes never
    match. Metric ties break toward the lower candidate index.
    """
    best = None
    for idx, res in paired:
        if res.stopped_early or not np.array_equal(res.decoded_id, ue_id):
            continue
        if best is None or res.pm_best < best[1].pm_best or (
            res.pm_best == best[1].pm_best and idx < best[0]
        ):
            best = (idx, res)
    if best is None:
        return None
    return Detection(
        candidate_index=best[0], payload=best[1].payload, decoded_id=best[1].decoded_id
    )


def run_blind_detection(candidates, config):
    """Full pipeline: phase 1, candidate selection, phase 2.

    ``candidates`` is the list of (PolarCode, llr vector) for all C1
    locations. Returns (Detection or None, TrialStats).
    """
    records = phase1(candidates, config)
    selected = select_candidates(records, config.c2)
    detection, phase2_results = phase2(
        [(i, candidates[i][0], candidates[i][1]) for i in selected], config
    )
    return detection, TrialStats(
        phase1_records=records,
        selected=selected,
        phase2_results=phase2_results,
        detection=detection,
    )
