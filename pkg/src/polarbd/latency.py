"""Closed-form latency of the blind detection system in clock cycles.

Worst case: every selected candidate is decoded in full at the largest
code length. Average case: the second phase splits evenly between the two
code lengths and each decode is shortened by an early-stopping fraction.
Cycle counts may be half-integral when the two phase-one latencies have
an odd sum.
"""

from dataclasses import dataclass
from math import ceil


def t_scl(N, K):
    """List-decode latency in cycles for one codeword: 2N + K + 16 - 2.

    K is the payload length; the 16 accounts for the ID bits estimated
    alongside it.
    """
    return 2 * N + K + 16 - 2


@dataclass
class LatencyParams:
    """All inputs of the latency formulas.

    ``t_sort`` defaults to C2: the sorter emits the C2 minimum metrics in
    as many cycles. ``e1``/``e2`` are the average fractions of estimated
    bits under early stopping for the short and long code. ``p`` (the
    number of processing elements per decoder lane) does not enter the
    formulas and is carried as metadata only.
    """

    n1: int = 256
    n2: int = 512
    k1: int = 57
    k2: int = 57
    c1: int = 44
    c2: int = 5
    l1: int = 2
    lmax: int = 8
    n_sclmax: int = 1
    t_sort: int | None = None
    e1: float = 1.0
    e2: float = 1.0
    f_hz: float = 1e9
    p: int = 64

    def __post_init__(self):
        if self.t_sort is None:
            self.t_sort = self.c2
        if self.n_sclmax < 1:
            raise ValueError(f"need at least one decoder, got {self.n_sclmax}")
        if not 1 <= self.l1 <= self.lmax:
            raise ValueError(f"need 1 <= L1 <= Lmax, got L1={self.l1}, Lmax={self.lmax}")
        for name, e in (("e1", self.e1), ("e2", self.e2)):
            if not 0.0 < e <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {e}")

    @property
    def n_scl1(self):
        """Effective first-phase decoder count from list-lane sharing."""
        return self.n_sclmax * (self.lmax // self.l1)


def _phase1_cycles(p):
    t1 = t_scl(p.n1, p.k1)
    t2 = t_scl(p.n2, p.k2)
    return ceil(p.c1 / p.n_scl1) * (t1 / 2 + t2 / 2), t1, t2


def worst_case_latency(p):
    """Worst-case cycles: full phase-1 sweep, sort, full phase-2 decodes."""
    phase1, t1, t2 = _phase1_cycles(p)
    return phase1 + p.t_sort + ceil(p.c2 / p.n_sclmax) * max(t1, t2)


def average_latency(p):
    """Average cycles with the phase-2 work split evenly across lengths.

    With fewer decoders than selected candidates the two length groups
    are served in ceil-divided rounds, each shortened by its early-stop
    fraction; with enough decoders a single round costs the slower of the
    two shortened decodes.
    """
    phase1, t1, t2 = _phase1_cycles(p)
    if p.n_sclmax < p.c2:
        first = ceil(p.c2 / 2)
        tail = (
            ceil(first / p.n_sclmax) * t1 * p.e1
            + ceil((p.c2 - first) / p.n_sclmax) * t2 * p.e2
        )
    else:
        tail = max(t1 * p.e1, t2 * p.e2)
    return phase1 + p.t_sort + tail


def cycles_to_seconds(cycles, f_hz):
    """Convert a cycle count to seconds at clock frequency ``f_hz``."""
    if f_hz <= 0:
        raise ValueError(f"clock frequency must be > 0, got {f_hz}")
    return cycles / f_hz
