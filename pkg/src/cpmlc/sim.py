"""Monte Carlo BER measurement, threshold search, NCG and interleaver sweeps."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import multiprocessing as mp
import numpy as np

from . import __version__
from .channel import (
    L_MAX,
    RNG_ALGORITHM,
    ChannelConfig,
    frame_rng,
    llr_from_awgn,
    snr_to_sigma,
    uncoded_required_snr,
)
from .codes import KP4, OuterCodeModel, total_rate
from .schemes import (
    SchemeConfig,
    decode_frames,
    default_interleavers,
    DEFAULT_DAMPING,
    encode_frames,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StoppingRule:
    min_bit_errors: int = 100
    min_frames: int = 10_000
    max_frames: int = 10_000_000
    # stopping is checked only at block boundaries, which keeps the outcome
    # independent of the number of workers
    block_frames: int = 500

    def __post_init__(self):
        if not 0 <= self.min_frames <= self.max_frames:
            raise ValueError("need 0 <= min_frames <= max_frames")
        if self.block_frames < 1 or self.min_bit_errors < 0:
            raise ValueError("invalid stopping rule")


FIXED_FRAMES = StoppingRule(min_bit_errors=0, min_frames=300, max_frames=300, block_frames=300)


@dataclass
class SweepRecord:
    scheme: str
    snr_db: float
    frames: int
    bits: int
    bit_errors: int
    frame_errors: int
    bypassed_bits: int
    bypassed_bit_errors: int
    master_seed: int
    under_resolved: bool
    wall_seconds: float = field(default=0.0, compare=False)

    @property
    def pre_outer_ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def bypassed_ber(self) -> float:
        return self.bypassed_bit_errors / self.bypassed_bits if self.bypassed_bits else 0.0

    CSV_FIELDS = (
        "scheme",
        "snr_db",
        "frames",
        "bits",
        "bit_errors",
        "pre_outer_ber",
        "frame_errors",
        "bypassed_bits",
        "bypassed_bit_errors",
        "master_seed",
        "under_resolved",
    )

    def csv_row(self) -> dict:
        row = {f: getattr(self, f) for f in self.CSV_FIELDS}
        row["snr_db"] = f"{self.snr_db:.6f}"
        row["pre_outer_ber"] = f"{self.pre_outer_ber:.6e}"
        row["under_resolved"] = int(self.under_resolved)
        return row


# ---------------------------------------------------------------------------
# Frame simulation
# ---------------------------------------------------------------------------


def channel_llrs(channel: ChannelConfig, b: np.ndarray, draws: np.ndarray) -> np.ndarray:
    x = 1.0 - 2.0 * b
    if channel.kind == "awgn":
        sigma = snr_to_sigma(channel.snr_db)
        return llr_from_awgn(x + sigma * draws, sigma)
    # uniform draws; a flip turns the sign of the fixed-magnitude BSC LLR
    mag = min(math.log((1 - channel.p) / channel.p), L_MAX)
    flips = draws < channel.p
    return np.where(flips, -x, x) * mag


def simulate_block(cfg: SchemeConfig, channel: ChannelConfig, start: int, count: int) -> np.ndarray:
    """Simulate frames ``start .. start + count - 1``.

    Returns ``[frames, bit_errors, frame_errors, bypassed_bit_errors]``.
    Frame ``f`` draws its info bits and then its channel noise from its own
    stream, so the noise of a frame is shared across SNR values.
    """
    if count <= 0:
        return np.zeros(4, dtype=np.int64)
    nb, d, n = cfg.info_bits, cfg.d, cfg.n
    info = np.empty((count, nb), dtype=np.uint8)
    draws = np.empty((count, d, n))
    for t in range(count):
        rng = frame_rng(channel.master_seed, start + t)
        info[t] = rng.integers(0, 2, nb, dtype=np.uint8)
        if channel.kind == "awgn":
            draws[t] = rng.standard_normal((d, n))
        else:
            draws[t] = rng.random((d, n))
    frame = encode_frames(cfg, info)
    llrs = channel_llrs(channel, frame.b, draws)
    est = decode_frames(cfg, llrs)
    err = est != info
    byp = cfg.bypassed_slice
    return np.array(
        [count, err.sum(), err.any(axis=1).sum(), err[:, byp].sum()],
        dtype=np.int64,
    )


def _block_plan(rule: StoppingRule):
    start = 0
    while start < rule.max_frames:
        count = min(rule.block_frames, rule.max_frames - start)
        yield start, count
        start += count


def _done(tot: np.ndarray, rule: StoppingRule) -> bool:
    frames, errs = tot[0], tot[1]
    return (frames >= rule.min_frames and errs >= rule.min_bit_errors) or frames >= rule.max_frames


def _pool(workers: int):
    try:
        ctx = mp.get_context("fork")
    except ValueError:
        ctx = mp.get_context()
    return ProcessPoolExecutor(max_workers=workers, mp_context=ctx)


def run_point(
    cfg: SchemeConfig,
    channel: ChannelConfig,
    rule: StoppingRule = StoppingRule(),
    workers: int = 1,
    pool=None,
) -> SweepRecord:
    """Measure the pre-outer-FEC BER at one channel setting.

    Blocks are consumed in frame order and the stopping rule is evaluated
    after each block; blocks finished past the stopping point by parallel
    workers are discarded. The record is therefore identical for any
    ``workers``.
    """
    t0 = time.perf_counter()
    tot = np.zeros(4, dtype=np.int64)
    plan = _block_plan(rule)
    if workers <= 1 and pool is None:
        for start, count in plan:
            tot += simulate_block(cfg, channel, start, count)
            if _done(tot, rule):
                break
    else:
        own = pool is None
        ex = _pool(workers) if own else pool
        try:
            window = max(1, workers) * 2
            pending = []
            exhausted = False
            while True:
                while not exhausted and len(pending) < window:
                    nxt = next(plan, None)
                    if nxt is None:
                        exhausted = True
                        break
                    pending.append(ex.submit(simulate_block, cfg, channel, *nxt))
                if not pending:
                    break
                tot += pending.pop(0).result()
                if _done(tot, rule):
                    for fut in pending:
                        fut.cancel()
                    break
        finally:
            if own:
                ex.shutdown(wait=True, cancel_futures=True)
    frames, errs, ferrs, berrs = (int(v) for v in tot)
    byp = cfg.bypassed_slice
    return SweepRecord(
        scheme=cfg.label,
        snr_db=float(channel.snr_db),
        frames=frames,
        bits=frames * cfg.info_bits,
        bit_errors=errs,
        frame_errors=ferrs,
        bypassed_bits=frames * (byp.stop - byp.start),
        bypassed_bit_errors=berrs,
        master_seed=channel.master_seed,
        under_resolved=errs < rule.min_bit_errors,
        wall_seconds=time.perf_counter() - t0,
    )


def sweep(cfg, snr_grid: Sequence[float], seed: int = 0, rule=StoppingRule(), workers: int = 1):
    return [
        run_point(cfg, ChannelConfig("awgn", float(s), master_seed=seed), rule, workers) for s in snr_grid
    ]


# ---------------------------------------------------------------------------
# Threshold search
# ---------------------------------------------------------------------------


class UnbracketedError(ValueError):
    """The search bracket does not straddle the target BER."""


@dataclass
class ThresholdResult:
    snr_db: float
    target_ber: float
    records: list[SweepRecord]
    under_resolved: bool


def find_threshold(
    cfg: SchemeConfig,
    target_ber: float = KP4.threshold_ber,
    bracket: tuple[float, float] = (0.0, 10.0),
    tol: float = 0.01,
    rule: StoppingRule = StoppingRule(),
    seed: int = 0,
    workers: int = 1,
) -> ThresholdResult:
    """Bisection on SNR for the point where the measured BER crosses ``target_ber``.

    Assumes BER decreases with SNR inside the bracket. Once the bracket is
    narrower than ``tol`` the crossing is interpolated linearly in log-BER.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    records: list[SweepRecord] = []

    def probe(snr):
        rec = run_point(cfg, ChannelConfig("awgn", snr, master_seed=seed), rule, workers)
        records.append(rec)
        log.info("%s  snr=%.4f dB  ber=%.3e  (%d errors, %d frames)", cfg.label, snr, rec.pre_outer_ber, rec.bit_errors, rec.frames)
        return rec

    r_lo, r_hi = probe(lo), probe(hi)
    if not (r_lo.pre_outer_ber > target_ber >= r_hi.pre_outer_ber):
        raise UnbracketedError(
            f"BER {r_lo.pre_outer_ber:.3e} at {lo} dB and {r_hi.pre_outer_ber:.3e} at {hi} dB "
            f"do not straddle {target_ber:.3e}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        r = probe(mid)
        if r.pre_outer_ber > target_ber:
            lo, r_lo = mid, r
        else:
            hi, r_hi = mid, r
    if r_hi.pre_outer_ber > 0:
        a, b = math.log(r_lo.pre_outer_ber), math.log(r_hi.pre_outer_ber)
        frac = (a - math.log(target_ber)) / (a - b) if a != b else 0.5
        snr = lo + min(max(frac, 0.0), 1.0) * (hi - lo)
    else:
        snr = 0.5 * (lo + hi)
    return ThresholdResult(snr, target_ber, records, r_lo.under_resolved or r_hi.under_resolved)


def required_snr(cfg: SchemeConfig, target_ber: float = KP4.threshold_ber, bracket=(0.0, 10.0), tol=0.01, **kw) -> float:
    return find_threshold(cfg, target_ber, bracket, tol, **kw).snr_db


# ---------------------------------------------------------------------------
# Figures of merit
# ---------------------------------------------------------------------------


def ncg_from_required(cfg: SchemeConfig, required_snr_db: float, outer: OuterCodeModel = KP4) -> float:
    """Net coding gain in dB given the measured SNR at the outer-code threshold."""
    ref = uncoded_required_snr(outer.target_post_ber)
    return ref - required_snr_db + 10.0 * math.log10(total_rate(cfg, outer))


def ncg(cfg: SchemeConfig, outer: OuterCodeModel = KP4, **kw) -> float:
    return ncg_from_required(cfg, required_snr(cfg, outer.threshold_ber, **kw), outer)


def sdd_count(cfg: SchemeConfig):
    """Soft-decision decoder invocations per three lanes."""
    per_frame = {
        "concatenated": cfg.d,
        "cp-mlc": 1,
        "cp-mlc-id": cfg.iterations,
        "uncoded": 0,
    }[cfg.kind]
    v = Fraction(3 * per_frame, cfg.d)
    return int(v) if v.denominator == 1 else float(v)


def with_interleaver_size(cfg: SchemeConfig, size: int, iterations: int | None = None) -> SchemeConfig:
    it = iterations or cfg.iterations
    damping = cfg.damping if it == cfg.iterations else DEFAULT_DAMPING[it]
    return replace(
        cfg,
        iterations=it,
        damping=damping,
        interleavers=default_interleavers(cfg.d, size),
        name="",
    )


@dataclass
class InterleaverSweepRow:
    size: int
    iterations: int
    required_snr_db: float
    snr_loss_db: float
    under_resolved: bool


def interleaver_sweep(
    base: SchemeConfig,
    sizes: Sequence[int],
    iteration_counts: Sequence[int],
    target_ber: float = KP4.threshold_ber,
    bracket=(0.0, 10.0),
    tol: float = 0.01,
    **kw,
) -> list[InterleaverSweepRow]:
    """SNR loss of each interleaver size relative to ``S = n_c``."""
    if base.kind != "cp-mlc-id":
        raise ValueError("interleaver sweep applies to cp-mlc-id schemes")
    n = base.n
    for S in sizes:
        if n % S:
            raise ValueError(f"size {S} does not divide {n}")
    rows = []
    for it in iteration_counts:
        results = {}
        by_perm = {}
        for S in sorted(set(sizes) | {n}):
            cfg = with_interleaver_size(base, S, it)
            # sizes whose permutations coincide (digit swap saturates at the
            # full bit reversal) share one simulation
            key = b"".join(p.tobytes() for p in cfg.perms)
            if key not in by_perm:
                by_perm[key] = find_threshold(cfg, target_ber, bracket, tol, **kw)
            results[S] = by_perm[key]
        ref = results[n].snr_db
        for S in sizes:
            r = results[S]
            rows.append(InterleaverSweepRow(S, it, r.snr_db, r.snr_db - ref, r.under_resolved))
    return rows


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def write_records(records: Sequence[SweepRecord], path, metadata: dict | None = None) -> Path:
    """Comma-separated records plus a ``<path>.meta.json`` sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SweepRecord.CSV_FIELDS)
        w.writeheader()
        for r in records:
            w.writerow(r.csv_row())
    meta = run_metadata(metadata or {})
    meta["wall_seconds"] = [r.wall_seconds for r in records]
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, default=str))
    return path


def run_metadata(extra: dict) -> dict:
    import platform

    import numba

    return {
        "package_version": __version__,
        "numpy": np.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
        "rng": RNG_ALGORITHM,
        **extra,
    }


def scheme_summary(cfg: SchemeConfig) -> dict:
    return {
        "kind": cfg.kind,
        "d": cfg.d,
        "code": cfg.code.name if cfg.code is not None else None,
        "flipping_set": str(cfg.osd_spec),
        "iterations": cfg.iterations,
        "damping": list(cfg.damping),
        "interleavers": [str(s) for s in cfg.interleavers],
        "bypass_includes_channel_llr": cfg.bypass_includes_channel_llr,
    }


def record_dict(rec: SweepRecord) -> dict:
    out = asdict(rec)
    out["pre_outer_ber"] = rec.pre_outer_ber
    return out
