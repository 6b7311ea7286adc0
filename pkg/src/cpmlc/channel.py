"""BPSK over AWGN/BSC, LLR demapping and per-frame random streams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcinv, erfc

# LLR magnitudes are clamped here; far above any decision-relevant value
L_MAX = 40.0

RNG_ALGORITHM = "Philox4x64-10 (key=master_seed, counter[3]=frame_index)"


@dataclass(frozen=True)
class ChannelConfig:
    kind: str = "awgn"
    snr_db: float = 0.0
    p: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("awgn", "bsc"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "awgn" and not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if self.kind == "bsc" and not 0 < self.p < 0.5:
            raise ValueError("BSC flip probability must lie in (0, 0.5)")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")


def frame_rng(master_seed: int, frame_index: int) -> np.random.Generator:
    """Independent stream for one frame.

    The frame index occupies the top word of the Philox counter, so every
    stream owns 2^192 blocks and no two streams can overlap; the result does
    not depend on the order in which frames are generated.
    """
    bg = np.random.Philox(key=master_seed, counter=[0, 0, 0, frame_index])
    return np.random.Generator(bg)


def modulate(b) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(b, dtype=np.float64)


def snr_to_sigma(snr_db: float) -> float:
    """Noise std per real dimension for unit-energy BPSK at Es/N0 = snr_db."""
    return math.sqrt(1.0 / (2.0 * 10.0 ** (snr_db / 10.0)))


def sigma_to_snr(sigma: float) -> float:
    return 10.0 * math.log10(1.0 / (2.0 * sigma * sigma))


def transmit_awgn(x, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=np.float64)
    return x + sigma * rng.standard_normal(x.shape)


def llr_from_awgn(y, sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return np.clip(2.0 * np.asarray(y, dtype=np.float64) / (sigma * sigma), -L_MAX, L_MAX)


def transmit_bsc(b, p: float, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= p < 0.5:
        raise ValueError("flip probability must lie in [0, 0.5)")
    b = np.asarray(b, dtype=np.uint8)
    flips = rng.random(b.shape) < p
    return b ^ flips.astype(np.uint8)


def hard_decision(llr) -> np.ndarray:
    """0 for llr >= 0 (including an exact zero), 1 otherwise."""
    return (np.asarray(llr) < 0).astype(np.uint8)


def qfunc(x):
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def qfunc_inv(p):
    return math.sqrt(2.0) * erfcinv(2.0 * np.asarray(p, dtype=np.float64))


def uncoded_ber(snr_db) -> np.ndarray:
    """BPSK bit error probability Q(sqrt(2 Es/N0))."""
    snr = 10.0 ** (np.asarray(snr_db, dtype=np.float64) / 10.0)
    return qfunc(np.sqrt(2.0 * snr))


def uncoded_required_snr(ber: float) -> float:
    """Inverse of :func:`uncoded_ber`, in dB."""
    x = float(qfunc_inv(ber))
    return 10.0 * math.log10(x * x / 2.0)
