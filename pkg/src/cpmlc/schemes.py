"""Concatenated, CP-MLC and CP-MLC-ID coding schemes.

All encoders and decoders work on a single frame or on a batch: lane arrays
have shape ``(d, n)`` or ``(F, d, n)`` and info arrays ``(bits,)`` or
``(F, bits)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import L_MAX, hard_decision
from .codes import ComponentCode, encode, info_bits_per_frame
from .osd import FlippingSetSpec, osd_decode_batch

SCHEME_KINDS = ("concatenated", "cp-mlc", "cp-mlc-id", "uncoded")

DEFAULT_DAMPING = {
    3: (0.3, 1.0, 1.0),
    6: (0.2, 0.3, 0.5, 0.7, 0.9, 1.0),
}


# ---------------------------------------------------------------------------
# LLR algebra
# ---------------------------------------------------------------------------


def boxplus(a, b):
    """LLR of the XOR of two bits: 2 atanh(tanh(a/2) tanh(b/2)).

    Inputs and output are clamped to +-L_MAX and the magnitude never exceeds
    min(|a|, |b|), even after rounding.
    """
    a = np.clip(np.asarray(a, dtype=np.float64), -L_MAX, L_MAX)
    b = np.clip(np.asarray(b, dtype=np.float64), -L_MAX, L_MAX)
    with np.errstate(divide="ignore"):
        r = 2.0 * np.arctanh(np.tanh(0.5 * a) * np.tanh(0.5 * b))
    bound = np.minimum(np.abs(a), np.abs(b))
    r = np.copysign(np.minimum(np.abs(r), bound), r)
    if r.ndim == 0:
        return float(r)
    return r


def boxplus_reduce(l, axis: int = -1):
    """Left fold of :func:`boxplus` along ``axis``."""
    l = np.moveaxis(np.asarray(l, dtype=np.float64), axis, 0)
    if l.shape[0] == 0:
        raise ValueError("boxplus_reduce needs at least one LLR")
    acc = np.clip(l[0], -L_MAX, L_MAX)
    for x in l[1:]:
        acc = boxplus(acc, x)
    if np.ndim(acc) == 0:
        return float(acc)
    return acc


# ---------------------------------------------------------------------------
# Interleavers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterleaverSpec:
    kind: str = "identity"
    size: int = 1
    seed: int = 0
    # digit_swap only: XOR-conjugated variant, 0 = plain swap
    variant: int = 0

    def __post_init__(self):
        if self.kind not in ("identity", "digit_swap", "random_involution"):
            raise ValueError(f"unknown interleaver kind {self.kind!r}")
        if self.size < 1 or self.size & (self.size - 1):
            raise ValueError(f"interleaver size must be a power of two, got {self.size}")

    @classmethod
    def parse(cls, text: str) -> "InterleaverSpec":
        t = text.replace(" ", "").lower()
        if t in ("identity", "i"):
            return cls()
        m = re.fullmatch(r"(digit_swap|random_involution)\((\d+)(?:,(\d+))?\)", t)
        if not m:
            raise ValueError(f"cannot parse interleaver {text!r}")
        kind, size, extra = m.group(1), int(m.group(2)), m.group(3)
        extra = int(extra) if extra is not None else 0
        if kind == "digit_swap":
            return cls(kind, size, variant=extra)
        return cls(kind, size, seed=extra)

    def __str__(self) -> str:
        if self.kind == "identity":
            return "identity"
        if self.kind == "digit_swap":
            return f"digit_swap({self.size})" if not self.variant else f"digit_swap({self.size},{self.variant})"
        return f"random_involution({self.size},{self.seed})"


def _log2(x: int) -> int:
    return x.bit_length() - 1


def _digit_swap(n: int, S: int) -> np.ndarray:
    L, t = _log2(n), _log2(S)
    idx = np.arange(n)
    if S == 1:
        return idx
    if 2 * t > L:
        # the two digit fields overlap; use the full bit reversal
        out = np.zeros(n, dtype=np.int64)
        for b in range(L):
            out |= ((idx >> b) & 1) << (L - 1 - b)
        return out
    low_mask = S - 1
    top = idx >> (L - t)
    bot = idx & low_mask
    mid = idx & ~(low_mask | (low_mask << (L - t)))
    return (bot << (L - t)) | mid | top


def build_interleaver(spec: InterleaverSpec, n_c: int) -> np.ndarray:
    """Permutation ``pi`` with interleaved ``s = z[pi]``; always an involution."""
    if n_c < 1 or n_c & (n_c - 1):
        raise ValueError("codeword length must be a power of two")
    S = spec.size
    if spec.kind == "identity":
        return np.arange(n_c)
    if n_c % S:
        raise ValueError(f"interleaver size {S} does not divide {n_c}")
    base = _digit_swap(n_c, S)
    if spec.kind == "digit_swap":
        if spec.variant:
            c = (spec.variant * 0x9E3779B1) % n_c
            idx = np.arange(n_c)
            return base[idx ^ c] ^ c
        return base
    # conjugate by a random permutation that maps blocks of n/S onto blocks
    rng = np.random.default_rng(spec.seed)
    blk = n_c // S
    block_perm = rng.permutation(S)
    sigma = np.concatenate([block_perm[b] * blk + rng.permutation(blk) for b in range(S)])
    sigma_inv = np.argsort(sigma)
    return sigma_inv[base[sigma]]


def interleave(x, perm) -> np.ndarray:
    return np.asarray(x)[..., perm]


def deinterleave(x, perm) -> np.ndarray:
    return np.asarray(x)[..., np.argsort(perm)]


def default_interleavers(d: int, size: int) -> tuple[InterleaverSpec, ...]:
    """Identity on lane 1 and the bypass lane, digit swaps in between."""
    specs = [InterleaverSpec()]
    for v in range(d - 2):
        specs.append(InterleaverSpec("digit_swap", size, variant=v) if size > 1 else InterleaverSpec())
    specs.append(InterleaverSpec())
    return tuple(specs[:d])


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    kind: str
    d: int
    code: ComponentCode | None
    osd_spec: FlippingSetSpec = FlippingSetSpec()
    iterations: int = 1
    damping: tuple[float, ...] = (1.0,)
    interleavers: tuple[InterleaverSpec, ...] = ()
    bypass_includes_channel_llr: bool = False
    name: str = ""
    perms: tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.d < 1 or (self.kind in ("cp-mlc", "cp-mlc-id") and self.d < 2):
            raise ValueError("multilevel schemes need d >= 2")
        if self.kind != "uncoded" and self.code is None:
            raise ValueError("a component code is required")
        object.__setattr__(self, "damping", tuple(float(x) for x in self.damping))
        if self.kind == "cp-mlc-id":
            if self.iterations < 1:
                raise ValueError("iterations must be >= 1")
            if len(self.damping) != self.iterations:
                raise ValueError(f"need {self.iterations} damping factors, got {len(self.damping)}")
            if any(not 0 <= x <= 1 for x in self.damping):
                raise ValueError("damping factors must lie in [0, 1]")
        n = self.n
        ilv = tuple(self.interleavers) or tuple(InterleaverSpec() for _ in range(self.d))
        if len(ilv) != self.d:
            raise ValueError(f"need {self.d} interleaver specs, got {len(ilv)}")
        object.__setattr__(self, "interleavers", ilv)
        object.__setattr__(self, "perms", tuple(build_interleaver(s, n) for s in ilv))

    @property
    def n(self) -> int:
        return self.code.n if self.code is not None else 128

    @property
    def info_bits(self) -> int:
        return info_bits_per_frame(self.kind, self.d, self.code)

    @property
    def bypassed_slice(self) -> slice:
        """Position of the uncoded (bypassed) bits inside the info vector."""
        if self.kind == "cp-mlc":
            return slice(self.code.k, self.info_bits)
        if self.kind == "cp-mlc-id":
            return slice((self.d - 1) * self.code.k, self.info_bits)
        return slice(0, 0)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == "uncoded":
            return "uncoded"
        parts = [self.kind, f"d{self.d}", self.code.name, str(self.osd_spec)]
        if self.kind == "cp-mlc-id":
            parts.append(f"I{self.iterations}")
            sizes = {s.size for s in self.interleavers if s.kind != "identity"}
            parts.append(f"S{max(sizes) if sizes else 1}")
        return "/".join(parts)

    def lane_schedule(self) -> list[int]:
        """0-based lane visited at each iteration: (i - 1) mod (d - 1)."""
        return [i % (self.d - 1) for i in range(self.iterations)]


def concatenated(code: ComponentCode, osd_spec, d: int = 3, **kw) -> SchemeConfig:
    return SchemeConfig("concatenated", d, code, _spec(osd_spec), **kw)


def cp_mlc(code: ComponentCode, osd_spec, d: int = 2, **kw) -> SchemeConfig:
    return SchemeConfig("cp-mlc", d, code, _spec(osd_spec), **kw)


def cp_mlc_id(
    code: ComponentCode,
    osd_spec,
    iterations: int = 3,
    damping: Sequence[float] | None = None,
    d: int = 3,
    interleaver_size: int | None = None,
    interleavers: Sequence[InterleaverSpec] | None = None,
    **kw,
) -> SchemeConfig:
    """CP-MLC-ID with the default (identity, digit swap, ..., identity) interleavers."""
    if damping is None:
        try:
            damping = DEFAULT_DAMPING[iterations]
        except KeyError:
            raise ValueError(f"no default damping schedule for I={iterations}") from None
    if interleavers is None:
        interleavers = default_interleavers(d, interleaver_size or code.n)
    return SchemeConfig(
        "cp-mlc-id", d, code, _spec(osd_spec), iterations, tuple(damping), tuple(interleavers), **kw
    )


def uncoded(d: int = 8) -> SchemeConfig:
    return SchemeConfig("uncoded", d, None)


def _spec(s) -> FlippingSetSpec:
    return FlippingSetSpec.parse(s) if isinstance(s, str) else s


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


@dataclass
class Frame:
    info: np.ndarray
    z: np.ndarray  # lane codewords / uncoded lanes before interleaving
    s: np.ndarray  # after interleaving
    b: np.ndarray  # transmitted lanes


def _batch(x, ndim_single: int):
    x = np.asarray(x)
    if x.ndim == ndim_single:
        return x[None], True
    if x.ndim == ndim_single + 1:
        return x, False
    raise ValueError(f"expected {ndim_single} or {ndim_single + 1} dimensions, got {x.ndim}")


def _check_info(cfg: SchemeConfig, kind: str, info):
    if cfg.kind != kind:
        raise ValueError(f"scheme kind is {cfg.kind!r}, expected {kind!r}")
    info, single = _batch(np.asarray(info, dtype=np.uint8), 1)
    if info.shape[-1] != cfg.info_bits:
        raise ValueError(f"expected {cfg.info_bits} info bits, got {info.shape[-1]}")
    return info, single


def _unbatch(frame: Frame, single: bool) -> Frame:
    if single:
        return Frame(frame.info[0], frame.z[0], frame.s[0], frame.b[0])
    return frame


def concatenated_encode(cfg: SchemeConfig, info) -> Frame:
    info, single = _check_info(cfg, "concatenated", info)
    F, k = info.shape[0], cfg.code.k
    z = encode(cfg.code, info.reshape(F, cfg.d, k))
    return _unbatch(Frame(info, z, z, z), single)


def uncoded_encode(cfg: SchemeConfig, info) -> Frame:
    info, single = _check_info(cfg, "uncoded", info)
    z = info.reshape(info.shape[0], cfg.d, cfg.n)
    return _unbatch(Frame(info, z, z, z), single)


def cpmlc_encode(cfg: SchemeConfig, info) -> Frame:
    info, single = _check_info(cfg, "cp-mlc", info)
    F, k, n = info.shape[0], cfg.code.k, cfg.n
    z = np.empty((F, cfg.d, n), dtype=np.uint8)
    z[:, 0] = encode(cfg.code, info[:, :k])
    z[:, 1:] = info[:, k:].reshape(F, cfg.d - 1, n)
    b = z.copy()
    b[:, 0] = np.bitwise_xor.reduce(z, axis=1)
    return _unbatch(Frame(info, z, z, b), single)


def cpmlcid_encode(cfg: SchemeConfig, info) -> Frame:
    info, single = _check_info(cfg, "cp-mlc-id", info)
    F, k, n, d = info.shape[0], cfg.code.k, cfg.n, cfg.d
    z = np.empty((F, d, n), dtype=np.uint8)
    z[:, : d - 1] = encode(cfg.code, info[:, : (d - 1) * k].reshape(F, d - 1, k))
    z[:, d - 1] = info[:, (d - 1) * k :]
    s = np.stack([interleave(z[:, j], cfg.perms[j]) for j in range(d)], axis=1)
    b = s.copy()
    b[:, : d - 1] ^= s[:, d - 1 : d]
    return _unbatch(Frame(info, z, s, b), single)


def encode_frames(cfg: SchemeConfig, info) -> Frame:
    return {
        "concatenated": concatenated_encode,
        "cp-mlc": cpmlc_encode,
        "cp-mlc-id": cpmlcid_encode,
        "uncoded": uncoded_encode,
    }[cfg.kind](cfg, info)


# ---------------------------------------------------------------------------
# Decoders
# ---------------------------------------------------------------------------


def _check_llrs(cfg: SchemeConfig, kind: str, llrs):
    if cfg.kind != kind:
        raise ValueError(f"scheme kind is {cfg.kind!r}, expected {kind!r}")
    llrs, single = _batch(np.asarray(llrs, dtype=np.float64), 2)
    if llrs.shape[1:] != (cfg.d, cfg.n):
        raise ValueError(f"expected lanes of shape ({cfg.d}, {cfg.n}), got {llrs.shape[1:]}")
    return llrs, single


def uncoded_decode(cfg: SchemeConfig, llrs) -> np.ndarray:
    llrs, single = _check_llrs(cfg, "uncoded", llrs)
    out = hard_decision(llrs).reshape(llrs.shape[0], -1)
    return out[0] if single else out


def concatenated_decode(cfg: SchemeConfig, llrs) -> np.ndarray:
    """Each lane decoded on its own; one SDD per lane."""
    llrs, single = _check_llrs(cfg, "concatenated", llrs)
    F, d, n = llrs.shape
    cw, _ = osd_decode_batch(cfg.code, llrs.reshape(F * d, n), cfg.osd_spec)
    out = cw[:, : cfg.code.k].reshape(F, d * cfg.code.k)
    return out[0] if single else out


def cpmlc_decode(cfg: SchemeConfig, llrs) -> np.ndarray:
    """Decode the coded lane from the boxplus of all lanes, then the uncoded lanes."""
    llrs, single = _check_llrs(cfg, "cp-mlc", llrs)
    F, d, n = llrs.shape
    lam1 = boxplus_reduce(llrs, axis=1)
    z1, _ = osd_decode_batch(cfg.code, lam1, cfg.osd_spec)
    sign1 = 1.0 - 2.0 * z1
    parts = [z1[:, : cfg.code.k]]
    for j in range(1, d):
        others = [llrs[:, q] for q in range(d) if q != j]
        rest = others[0] if len(others) == 1 else boxplus_reduce(np.stack(others, axis=1), axis=1)
        gamma = llrs[:, j] + sign1 * rest
        parts.append(hard_decision(gamma))
    out = np.concatenate(parts, axis=1)
    return out[0] if single else out


@dataclass
class IterationTrace:
    iteration: int  # 1-based
    lane: int  # 1-based
    flips: np.ndarray  # per frame: OSD output vs hard decision of its input


@dataclass
class IterativeDecodeResult:
    info: np.ndarray
    trace: list[IterationTrace]
    gamma: np.ndarray  # bypass-lane LLR in the transmitted domain


def cpmlcid_decode(cfg: SchemeConfig, llrs, *, return_trace: bool = False):
    """Iterative decoder; extrinsics live in the transmitted (interleaved) domain."""
    llrs, single = _check_llrs(cfg, "cp-mlc-id", llrs)
    F, d, n = llrs.shape
    k = cfg.code.k
    ld = llrs[:, d - 1]
    ext = np.zeros((F, d - 1, n))
    zhat: list[np.ndarray | None] = [None] * (d - 1)
    trace: list[IterationTrace] = []

    for i, j in enumerate(cfg.lane_schedule()):
        tilde = ld.copy()
        for jp in range(d - 1):
            if jp != j:
                tilde += ext[:, jp]
        lam_in = boxplus(llrs[:, j], tilde)
        lam_z = deinterleave(lam_in, cfg.perms[j])
        zj, _ = osd_decode_batch(cfg.code, lam_z, cfg.osd_spec)
        sj = interleave(zj, cfg.perms[j])
        ext[:, j] = cfg.damping[i] * llrs[:, j] * (1.0 - 2.0 * sj)
        zhat[j] = zj
        if return_trace:
            flips = (zj != hard_decision(lam_z)).sum(axis=1)
            trace.append(IterationTrace(i + 1, j + 1, flips))

    for j in range(d - 1):
        if zhat[j] is None:
            # lane never visited (I < d - 1)
            tilde = ld + ext.sum(axis=1) - ext[:, j]
            zhat[j] = hard_decision(deinterleave(boxplus(llrs[:, j], tilde), cfg.perms[j]))

    gamma = ext.sum(axis=1)
    if cfg.bypass_includes_channel_llr:
        gamma = gamma + ld
    zd = deinterleave(hard_decision(gamma), cfg.perms[d - 1])
    info = np.concatenate([z[:, :k] for z in zhat] + [zd], axis=1)
    if single:
        info = info[0]
        gamma = gamma[0]
        trace = [IterationTrace(t.iteration, t.lane, t.flips[0]) for t in trace]
    if return_trace:
        return IterativeDecodeResult(info, trace, gamma)
    return info


def decode_frames(cfg: SchemeConfig, llrs) -> np.ndarray:
    return {
        "concatenated": concatenated_decode,
        "cp-mlc": cpmlc_decode,
        "cp-mlc-id": cpmlcid_decode,
        "uncoded": uncoded_decode,
    }[cfg.kind](cfg, llrs)


# ---------------------------------------------------------------------------
# Analysis helpers
# ---------------------------------------------------------------------------


def bsc_erasure_probabilities(p: float) -> tuple[float, float]:
    """Erasure probability of the uLLR given an extrinsic bit error (1) or not (0).

    Over a BSC with damping 1 the uLLR of lane j is erased when the channel
    copy of the bypass bit and the other lane's extrinsic estimate cancel.
    """
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    return (1 - p) ** 2 + p**2, 2 * p * (1 - p)


@dataclass(frozen=True)
class ScheduleEntry:
    iteration: int
    lane: int
    messages: tuple[str, ...]


def message_schedule(d: int, I: int) -> list[ScheduleEntry]:
    """Variable/check-node message order of the iterative decoder.

    Variable nodes are B_1..B_d and S_1..S_{d-1}; check nodes are the XOR
    constraints dXOR_j and the component-code constraints dH_j. Messages are
    ``phi(VN,CN)`` and ``psi(CN,VN)``; from the second iteration on, the
    bypass node first pushes its belief into the visited lane.
    """
    if d < 2 or I < 1:
        raise ValueError("need d >= 2 and I >= 1")
    out = []
    for i in range(1, I + 1):
        j = (i - 1) % (d - 1) + 1
        msgs = []
        if i > 1:
            msgs += [f"phi(B{d},dXOR{j})", f"psi(dXOR{j},S{j})"]
        msgs += [f"phi(S{j},dH{j})", f"psi(dH{j},S{j})", f"phi(S{j},dXOR{j})", f"psi(dXOR{j},B{d})"]
        out.append(ScheduleEntry(i, j, tuple(msgs)))
    return out
