"""Polar code construction and encoding.

A code is described by its length N = 2^n, the number of payload bits K,
and a set of ID bit positions used by the blind detection scheme. The
remaining positions are frozen to 0. Bit-channel reliabilities come from
the Bhattacharyya parameter recursion evaluated at a design SNR, which is
deterministic and cheap; any fixed reliability order works for the
detection scheme itself.
"""

from dataclasses import dataclass, field

import numpy as np

ID_LEN_DEFAULT = 16


def _check_power_of_two(N):
    if N < 2 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 2, got {N}")


def reliability_order(N, design_snr_db=0.0):
    """Rank bit-channels of a length-N polar code, most reliable first.

    Uses the Bhattacharyya recursion Z- = 2Z - Z^2 (degraded branch),
    Z+ = Z^2 (upgraded branch), starting from Z0 = exp(-10^(snr/10)).
    Branches are applied per index bit from most to least significant,
    matching the natural-order (non bit-reversed) transform, where the
    top-level split decided by the MSB acts on the raw channel first.

    Parameters
    ----------
    N : int
        Code length, power of two, >= 2.
    design_snr_db : float
        Design SNR in dB for the initial Bhattacharyya parameter.

    Returns
    -------
    ndarray of int
        Permutation of 0..N-1 ordered by ascending Z (ties broken by
        lower index). Deterministic for equal inputs.
    """
    _check_power_of_two(N)
    z = np.array([np.exp(-(10.0 ** (design_snr_db / 10.0)))], dtype=np.float64)
    while len(z) < N:
        nxt = np.empty(2 * len(z), dtype=np.float64)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return np.argsort(z, kind="stable")


@dataclass(eq=False)
class PolarCode:
    """Immutable description of one polar code with ID bit placement.

    ``info_positions``, ``id_positions`` and ``frozen_positions`` partition
    0..N-1 and are stored sorted ascending. Payload and ID bits are
    scattered into their position sets in ascending index order, which is
    also the order in which an SC-based decoder encounters them.
    """

    N: int
    K: int
    id_len: int
    id_mode: int
    design_snr_db: float
    reliability: np.ndarray
    info_positions: np.ndarray
    id_positions: np.ndarray
    frozen_positions: np.ndarray
    n: int = field(init=False)
    frozen_mask: np.ndarray = field(init=False)

    def __post_init__(self):
        self.n = int(np.log2(self.N))
        mask = np.ones(self.N, dtype=bool)
        mask[self.info_positions] = False
        mask[self.id_positions] = False
        self.frozen_mask = mask
        counts = len(self.info_positions) + len(self.id_positions) + len(self.frozen_positions)
        union = set(self.info_positions) | set(self.id_positions) | set(self.frozen_positions)
        if counts != self.N or len(union) != self.N:
            raise ValueError("info/id/frozen positions must partition 0..N-1")

    @property
    def rate(self):
        return self.K / self.N


def construct_code(N, K, id_len=ID_LEN_DEFAULT, id_mode=1, design_snr_db=0.0):
    """Build a :class:`PolarCode` with ID bits placed per the given mode.

    Mode 1: payload takes the K most reliable positions, the ID the next
    id_len. Mode 2: the ID takes the id_len most reliable, the payload the
    next K. Mode 3: of the K + id_len most reliable positions, the ID
    takes the id_len that are decoded first (smallest natural index).

    Raises
    ------
    ValueError
        If K + id_len > N, K < 1, id_len < 0, or id_mode not in {1, 2, 3}.
    """
    _check_power_of_two(N)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if id_len < 0:
        raise ValueError(f"id_len must be >= 0, got {id_len}")
    if K + id_len > N:
        raise ValueError(f"K + id_len = {K + id_len} exceeds N = {N}")
    if id_mode not in (1, 2, 3):
        raise ValueError(f"id_mode must be 1, 2 or 3, got {id_mode}")

    order = reliability_order(N, design_snr_db)
    if id_mode == 1:
        info = order[:K]
        ident = order[K:K + id_len]
    elif id_mode == 2:
        ident = order[:id_len]
        info = order[id_len:id_len + K]
    else:
        top = np.sort(order[:K + id_len])
        ident = top[:id_len]
        info = top[id_len:]
    info = np.sort(info)
    ident = np.sort(ident)
    used = np.zeros(N, dtype=bool)
    used[info] = True
    used[ident] = True
    frozen = np.flatnonzero(~used)
    return PolarCode(
        N=N,
        K=K,
        id_len=id_len,
        id_mode=id_mode,
        design_snr_db=design_snr_db,
        reliability=order,
        info_positions=info,
        id_positions=ident,
        frozen_positions=frozen,
    )


def polar_transform(u):
    """Apply the polar transform x = u G over GF(2) along the last axis.

    G is the n-fold Kronecker power of [[1, 0], [1, 1]] in natural order.
    The transform is an involution: applying it twice returns the input.
    Accepts any leading batch dimensions.
    """
    u = np.asarray(u)
    N = u.shape[-1]
    _check_power_of_two(N)
    batch = u.shape[:-1]
    x = np.ascontiguousarray(u, dtype=np.int8).copy()
    half = 1
    while half < N:
        v = x.reshape(batch + (N // (2 * half), 2, half))
        v[..., 0, :] ^= v[..., 1, :]
        half *= 2
    return x


def encode(code, payload, id_bits):
    """Encode a payload and ID vector into a length-N codeword.

    Scatters payload into ``info_positions`` and ID into ``id_positions``
    (both in ascending index order), zeros elsewhere, then applies the
    polar transform. Supports leading batch dimensions on both inputs.
    """
    payload = np.asarray(payload)
    id_bits = np.asarray(id_bits)
    if payload.shape[-1] != code.K:
        raise ValueError(f"payload length {payload.shape[-1]} != K = {code.K}")
    if id_bits.shape[-1] != code.id_len:
        raise ValueError(f"id length {id_bits.shape[-1]} != id_len = {code.id_len}")
    batch = np.broadcast_shapes(payload.shape[:-1], id_bits.shape[:-1])
    u = np.zeros(batch + (code.N,), dtype=np.int8)
    u[..., code.info_positions] = payload
    u[..., code.id_positions] = id_bits
    return polar_transform(u)
