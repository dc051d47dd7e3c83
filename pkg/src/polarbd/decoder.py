"""Unified SC/SCL decoding over the binary-tree schedule.

The decoder walks the tree depth first (left branches first), computing
min-sum left messages and exact right messages, splitting paths at payload
and ID leaves, and pruning back to the list size by path metric. With
list size 1 and no early stopping this reduces bit-exactly to plain SC.

Early stopping deactivates, after each survivor selection at an ID leaf,
every path whose estimate disagrees with the expected ID bit; decoding
stops once no path remains active. Deactivated paths keep their list
lanes and keep competing in survivor selection (deactivating them there
instead would hand the freed lanes to forced-ID hypotheses and inflate
the false alarm rate); they are only barred from being the result.

All decode state is held in contiguous arrays with a leading
(batch, list) shape so that many codewords of the same code can be
decoded in one call; per-codeword results are independent of the batch
composition. Sign convention throughout: sgn(0) = +1.
"""

from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------------------
# Elementary node operations


def f_op(a, b):
    """Min-sum left-branch LLR: sgn(a)*sgn(b)*min(|a|, |b|), sgn(0) = +1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mag = np.minimum(np.abs(a), np.abs(b))
    neg = (a < 0) ^ (b < 0)
    return np.where(neg, -mag, mag)


def g_op(a, b, beta_left):
    """Right-branch LLR: b + a when beta_left = 0, b - a when beta_left = 1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.where(np.asarray(beta_left) == 0, b + a, b - a)


def beta_combine(beta_left, beta_right):
    """Combine child bit estimates: first half XOR, second half pass-through."""
    beta_left = np.asarray(beta_left)
    beta_right = np.asarray(beta_right)
    if beta_left.shape[-1] != beta_right.shape[-1]:
        raise ValueError("beta halves must have equal length")
    return np.concatenate([beta_left ^ beta_right, beta_right], axis=-1)


def leaf_decision(alpha, is_frozen):
    """Hard decision at a leaf: frozen -> 0, else 0 iff alpha >= 0."""
    bit = np.asarray(alpha) < 0
    return np.where(is_frozen, 0, bit.astype(np.int8))


def pm_update(pm, alpha, u_hat):
    """Path metric update: add |alpha| iff u_hat disagrees with sgn(alpha).

    The sign-implied bit is (1 - sgn(alpha)) / 2 with sgn(0) = +1, so an
    estimate of 1 at alpha = 0 incurs a zero penalty.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    mismatch = np.asarray(u_hat) != (alpha < 0)
    return pm + np.where(mismatch, np.abs(alpha), 0.0)


def prune_paths(pms, list_size):
    """Indices of the surviving candidates, lowest path metric first.

    ``pms`` holds candidate metrics along the last axis, ordered as
    2*parent + bit so that the stable sort breaks ties by lower parent
    index first, then by estimate bit 0 before 1. If fewer than
    ``list_size`` candidates exist, all survive.
    """
    pms = np.asarray(pms)
    keep = min(list_size, pms.shape[-1])
    return np.argsort(pms, axis=-1, kind="stable")[..., :keep]


def early_stop_filter(active, estimates, expected_bit):
    """Deactivate surviving paths whose ID-bit estimate mismatches.

    Returns the filtered activity mask and a stop flag (per batch element)
    that is True when no path remains active. Applied after survivor
    selection, never before.
    """
    active = np.asarray(active) & (np.asarray(estimates) == expected_bit)
    return active, ~active.any(axis=-1)


# ---------------------------------------------------------------------------
# Decode results


@dataclass
class DecodeResult:
    """Outcome of one decoder run.

    ``reliability`` is |LLR of the last decoded leaf| of the best path for
    list size 1 and minus the best path metric otherwise, so that larger
    always means more trustworthy. ``final_leaf_llr`` carries the last-leaf
    LLR magnitude of the best path at every list size (nan when decoding
    stopped before the last leaf). ``id_match`` is meaningful only when an
    expected ID was supplied; a stopped decode never matches.
    ``estimated_fraction`` is the number of estimated leaves over N.
    """

    payload: np.ndarray
    decoded_id: np.ndarray
    pm_best: float
    reliability: float
    final_leaf_llr: float
    id_match: bool
    estimated_fraction: float
    stopped_early: bool


# ---------------------------------------------------------------------------
# Batched list decoder

_INF = np.inf


def _leaf_schedule(n):
    """Per-leaf stage operations: one optional g entry then f descents.

    Leaf 0 descends with f from stage n-1 to 0; leaf i > 0 enters a right
    child with g at stage ctz(i), then descends with f below it.
    """
    sched = []
    for i in range(1 << n):
        if i == 0:
            ops = [(s, "f") for s in range(n - 1, -1, -1)]
        else:
            t = (i & -i).bit_length() - 1
            ops = [(t, "g")] + [(s, "f") for s in range(t - 1, -1, -1)]
        sched.append(ops)
    return sched


class ListDecoder:
    """Single-use SCL decoder over a batch of received LLR vectors.

    One instance owns all its path state (no shared mutable state between
    instances), decodes each batch row independently, and is discarded
    after :meth:`run`.
    """

    def __init__(self, code, llrs, list_size, early_stop=None, dtype=np.float64):
        llrs = np.atleast_2d(np.asarray(llrs, dtype=dtype))
        if llrs.shape[-1] != code.N:
            raise ValueError(f"LLR length {llrs.shape[-1]} != N = {code.N}")
        if list_size < 1:
            raise ValueError(f"list size must be >= 1, got {list_size}")
        if early_stop is not None:
            early_stop = np.asarray(early_stop).ravel()
            if len(early_stop) != code.id_len:
                raise ValueError(
                    f"expected ID length {len(early_stop)} != id_len = {code.id_len}"
                )
        self.code = code
        self.L = int(list_size)
        self.expected_id = early_stop
        self.dtype = dtype
        B, N, L, n = llrs.shape[0], code.N, self.L, code.n
        self.B, self.N, self.n = B, N, n

        # Stage s of the path-dependent LLR/bit memories lives at
        # [2^s - 1 : 2^(s+1) - 1]; the channel stage is shared per row.
        self.channel = llrs[:, None, :]
        self.alphas = np.zeros((B, L, N - 1), dtype=dtype)
        self.betas = np.zeros((B, L, N - 1), dtype=np.int8)
        self.pm = np.full((B, L), _INF, dtype=dtype)
        self.pm[:, 0] = 0.0
        # A lane is "real" once it holds a path (the list grows from one);
        # "active" additionally means not deactivated by early stopping.
        self.real = np.zeros((B, L), dtype=bool)
        self.real[:, 0] = True
        self.active = self.real.copy()

        self.alive = np.ones(B, dtype=bool)
        self.res_stopped = np.zeros(B, dtype=bool)
        self.res_frac = np.ones(B, dtype=np.float64)
        self.res_pm = np.zeros(B, dtype=np.float64)
        self.res_rel = np.zeros(B, dtype=np.float64)
        self.res_last = np.full(B, np.nan, dtype=np.float64)
        self.res_uhat = np.zeros((B, N), dtype=np.int8)
        self.last_llr = None

        self._off = [(1 << s) - 1 for s in range(n)]
        self._sched = _leaf_schedule(n)
        self._id_rank = {int(p): r for r, p in enumerate(code.id_positions)}
        self._lane = np.arange(L)
        self._bidx = np.arange(B)[:, None]
        # Survivor lineage per split leaf: (leaf, parent lanes or None for
        # the identity permutation, chosen bits). Paths are reconstructed
        # from it on demand instead of carrying full bit vectors around.
        self._lineage = []

    # -- stage computations ------------------------------------------------

    def _stage_src(self, s):
        if s == self.n:
            return self.channel
        o = self._off[s]
        return self.alphas[:, :, o:o + (1 << s)]

    def _compute_stage(self, s, op):
        src = self._stage_src(s + 1)
        h = 1 << s
        a, b = src[..., :h], src[..., h:]
        o = self._off[s]
        dest = self.alphas[:, :, o:o + h]
        inplace = src.shape[1] == self.L  # channel stage broadcasts over lanes
        if op == "f":
            out = dest if inplace else np.empty_like(a)
            np.abs(a, out=out)
            mag_b = np.abs(b)
            np.minimum(out, mag_b, out=out)
            np.negative(out, out=out, where=(a < 0) ^ (b < 0))
        else:
            bl = self.betas[:, :, o:o + h]
            sign = 1 - 2 * bl.astype(self.dtype)
            np.multiply(a, sign, out=dest)
            np.add(dest, b, out=dest)
            return
        if not inplace:
            dest[...] = out

    def _propagate_betas(self, i, bits):
        b = bits[:, :, None].astype(np.int8)
        s, ii = 0, i
        while ii & 1:
            o = self._off[s]
            left = self.betas[:, :, o:o + (1 << s)]
            b = np.concatenate([left ^ b, b], axis=-1)
            s += 1
            ii >>= 1
        if s < self.n:
            o = self._off[s]
            self.betas[:, :, o:o + (1 << s)] = b

    # -- path bookkeeping ----------------------------------------------------

    def _fork(self, i, alpha0):
        pen = np.abs(alpha0)
        neg = alpha0 < 0
        cand = np.empty((self.B, 2 * self.L), dtype=self.dtype)
        cand[:, 0::2] = self.pm + np.where(neg, pen, 0.0)
        cand[:, 1::2] = self.pm + np.where(neg, 0.0, pen)
        unused = ~self.real
        cand[:, 0::2][unused] = _INF
        cand[:, 1::2][unused] = _INF
        keep = prune_paths(cand, self.L)
        parent = (keep >> 1).astype(np.int16)
        bits = (keep & 1).astype(np.int8)
        bidx = self._bidx
        self.pm = cand[bidx, keep]
        identity = np.array_equal(parent, np.broadcast_to(self._lane, parent.shape))
        if identity:
            if i == self.N - 1:
                self.last_llr = pen
            self._lineage.append((i, None, bits))
        else:
            # Permute only the memory stages a later leaf still reads:
            # alpha stage s (s >= 1) is consumed by the pending right-child
            # computation iff bit s-1 of i is 0; the stored left beta at
            # stage s is consumed by a pending combine iff bit s of i is 1.
            for s in range(1, self.n):
                if not (i >> (s - 1)) & 1:
                    o = self._off[s]
                    sl = self.alphas[:, :, o:o + (1 << s)]
                    sl[...] = sl[bidx, parent]
            for s in range(self.n):
                if (i >> s) & 1:
                    o = self._off[s]
                    sl = self.betas[:, :, o:o + (1 << s)]
                    sl[...] = sl[bidx, parent]
            self.real = self.real[bidx, parent]
            self.active = self.active[bidx, parent]
            if i == self.N - 1:
                self.last_llr = pen[bidx, parent]
            self._lineage.append((i, parent, bits))
        return bits

    def _backtrack(self, rows, cols):
        """Bit vector of one lane per row, rebuilt from the lineage."""
        out = np.zeros((len(rows), self.N), dtype=np.int8)
        cur = np.asarray(cols, dtype=np.int64).copy()
        for leaf, parent, bits in reversed(self._lineage):
            out[:, leaf] = bits[rows, cur]
            if parent is not None:
                cur = parent[rows, cur].astype(np.int64)
        return out

    def _backtrack_lanes(self, rows):
        """Bit vectors of every lane for the given rows."""
        R, L = len(rows), self.L
        out = np.zeros((R, L, self.N), dtype=np.int8)
        cur = np.tile(np.arange(L, dtype=np.int64), (R, 1))
        ridx = np.asarray(rows)[:, None]
        for leaf, parent, bits in reversed(self._lineage):
            out[:, :, leaf] = bits[ridx, cur]
            if parent is not None:
                cur = parent[ridx, cur].astype(np.int64)
        return out

    def _record_stop(self, stopped, i):
        idx = np.flatnonzero(stopped)
        cols = np.argmin(self.pm[idx], axis=1)
        self.res_stopped[idx] = True
        self.res_frac[idx] = (i + 1) / self.N
        self.res_pm[idx] = self.pm[idx, cols]
        self.res_rel[idx] = -self.pm[idx, cols]
        self.res_uhat[idx] = self._backtrack(idx, cols)
        self.alive[idx] = False

    # -- main loop -------------------------------------------------------------

    def run(self):
        code, N = self.code, self.N
        frozen = code.frozen_mask
        for i in range(N):
            for s, op in self._sched[i]:
                self._compute_stage(s, op)
            alpha0 = self.alphas[:, :, 0]
            if frozen[i]:
                self.pm = self.pm + np.where(alpha0 < 0, np.abs(alpha0), 0.0)
                bits = np.zeros((self.B, self.L), dtype=np.int8)
                if i == N - 1:
                    self.last_llr = np.abs(alpha0)
            else:
                bits = self._fork(i, alpha0)
                if self.expected_id is not None:
                    if i in self._id_rank:
                        expected = int(self.expected_id[self._id_rank[i]])
                        self.active, _ = early_stop_filter(self.active, bits, expected)
                    # an active path can also vanish by losing the survivor
                    # selection to deactivated ones, so check at every split
                    newly = self.alive & ~self.active.any(axis=1)
                    if newly.any():
                        self._record_stop(newly, i)
                        if not self.alive.any():
                            return self._finish()
            self._propagate_betas(i, bits)
        return self._finish()

    # -- result extraction ------------------------------------------------------

    def _finish(self):
        code = self.code
        live = np.flatnonzero(self.alive)
        if len(live):
            pm = self.pm[live]
            act = self.active[live]
            lanes = self._backtrack_lanes(live)
            if self.expected_id is not None:
                ids = lanes[:, :, code.id_positions]
                match = act & (ids == self.expected_id[None, None, :]).all(axis=2)
            else:
                match = act
            masked = np.where(match, pm, _INF)
            cols = np.argmin(masked, axis=1)
            none = ~match.any(axis=1)
            if none.any():
                fallback = np.argmin(np.where(act, pm, _INF), axis=1)
                cols = np.where(none, fallback, cols)
            rr = np.arange(len(live))
            self.res_pm[live] = pm[rr, cols]
            self.res_uhat[live] = lanes[rr, cols]
            if self.last_llr is not None:
                self.res_last[live] = self.last_llr[live, cols]
            if self.L == 1 and self.last_llr is not None:
                self.res_rel[live] = self.last_llr[live, cols]
            else:
                self.res_rel[live] = -self.res_pm[live]

        results = []
        for b in range(self.B):
            decoded_id = self.res_uhat[b, code.id_positions].copy()
            if self.res_stopped[b] or self.expected_id is None:
                id_match = False
            else:
                id_match = bool(np.array_equal(decoded_id, self.expected_id))
            results.append(DecodeResult(
                payload=self.res_uhat[b, code.info_positions].copy(),
                decoded_id=decoded_id,
                pm_best=float(self.res_pm[b]),
                reliability=float(self.res_rel[b]),
                final_leaf_llr=float(self.res_last[b]),
                id_match=id_match,
                estimated_fraction=float(self.res_frac[b]),
                stopped_early=bool(self.res_stopped[b]),
            ))
        return results


def decode_batch(code, llrs, list_size, early_stop=None, dtype=np.float64):
    """Decode a (B, N) batch of LLR vectors of the same code.

    Returns one :class:`DecodeResult` per row. Results are identical to
    decoding each row on its own.
    """
    return ListDecoder(code, llrs, list_size, early_stop, dtype).run()


def decode(code, llrs, list_size=1, early_stop=None):
    """Decode one received LLR vector with list size ``list_size``.

    When ``early_stop`` (the expected ID bit-vector) is given, paths
    disagreeing with it are deactivated at each ID leaf and the best path
    is chosen among those matching the expected ID; otherwise the global
    minimum-metric path wins.
    """
    llrs = np.asarray(llrs)
    if llrs.ndim != 1:
        raise ValueError("decode expects a single LLR vector; use decode_batch")
    return decode_batch(code, llrs[None, :], list_size, early_stop)[0]
