"""BPSK modulation, AWGN noise, and LLR demodulation.

SNR convention: Eb/N0 with rate = K/N, so ID bits count as overhead.
The noise standard deviation satisfies sigma^2 = 1 / (2 * rate * 10^(EbN0/10))
and received LLRs are 2*y / sigma^2.
"""

from dataclasses import dataclass

import numpy as np


def snr_to_sigma(ebn0_db, rate):
    """Noise standard deviation for a given Eb/N0 (dB) and code rate."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return float(np.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))))


@dataclass(frozen=True)
class ChannelParams:
    """One operating point of the BPSK/AWGN channel."""

    ebn0_db: float
    rate: float
    sigma: float

    @classmethod
    def from_ebn0(cls, ebn0_db, rate):
        return cls(ebn0_db=ebn0_db, rate=rate, sigma=snr_to_sigma(ebn0_db, rate))


def modulate_bpsk(codeword):
    """Map bits to symbols: 0 -> +1.0, 1 -> -1.0."""
    return 1.0 - 2.0 * np.asarray(codeword, dtype=np.float64)


def transmit_and_demodulate(symbols, sigma, rng):
    """Add white Gaussian noise and return the received LLR vector.

    y = symbols + n with n ~ Normal(0, sigma^2) drawn from ``rng``; the
    returned LLRs are 2*y / sigma^2. Deterministic given the rng state.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    symbols = np.asarray(symbols, dtype=np.float64)
    y = symbols + rng.normal(0.0, sigma, size=symbols.shape)
    return 2.0 * y / (sigma * sigma)
