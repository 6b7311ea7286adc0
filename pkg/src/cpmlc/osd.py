"""Ordered statistics decoding with order-0/1 and semi-order-2 flipping sets.

Flip patterns are expressed as MRB indices: index 0 is the most reliable
basis position and index ``k - 1`` the least reliable one.

Two decoders share the same semantics:

* :func:`osd_decode_batch` -- the numba kernel used by the schemes. It finds
  the least reliable basis greedily on the columns of H (each packed into one
  word) and scores candidates on the n - k parity positions only.
* :func:`osd_decode_reference` -- explicit Gauss-Jordan elimination on the
  generator followed by full re-encoding and Euclidean scoring.
"""

from __future__ import annotations

import re
from itertools import combinations
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numba
from llvmlite import ir
from numba import types
from numba.extending import intrinsic
import numpy as np

from .codes import ComponentCode
from .gf2m import BinaryMatrix, gf2_eliminate


@dataclass(frozen=True)
class FlippingSetSpec:
    include_order0: bool = True
    include_order1: bool = True
    semi_order_pairs: tuple[int, int] | None = None
    # every pair over the whole MRB; equivalent to semi_order_pairs = (k, k)
    full_order2: bool = False

    def __post_init__(self):
        if self.semi_order_pairs is not None:
            m1, m2 = self.semi_order_pairs
            if not 0 <= m2 <= m1:
                raise ValueError(f"semi-order parameters need 0 <= m2 <= m1, got {self.semi_order_pairs}")
            if self.full_order2:
                raise ValueError("full order-2 and semi-order-2 are mutually exclusive")

    @classmethod
    def parse(cls, text: str) -> "FlippingSetSpec":
        """Parse strings like ``"t0+t1+t2(40,29)"`` or ``"t0+t1+t2"``."""
        t0 = t1 = full = False
        pairs = None
        for part in text.replace(" ", "").lower().split("+"):
            if part == "t0":
                t0 = True
            elif part == "t1":
                t1 = True
            elif part == "t2":
                full = True
            elif m := re.fullmatch(r"t2\((\d+),(\d+)\)", part):
                pairs = (int(m.group(1)), int(m.group(2)))
            else:
                raise ValueError(f"cannot parse flipping-set term {part!r} in {text!r}")
        return cls(t0, t1, pairs, full)

    def __str__(self) -> str:
        parts = []
        if self.include_order0:
            parts.append("t0")
        if self.include_order1:
            parts.append("t1")
        if self.full_order2:
            parts.append("t2")
        if self.semi_order_pairs is not None:
            parts.append("t2(%d,%d)" % self.semi_order_pairs)
        return "+".join(parts)

    def size(self, k: int) -> int:
        """Closed-form candidate count."""
        total = int(self.include_order0) + (k if self.include_order1 else 0)
        if self.full_order2:
            total += comb(k, 2)
        if self.semi_order_pairs is not None:
            m1, m2 = self.semi_order_pairs
            total += comb(m1, 2) - comb(m1 - m2, 2)
        return total


@dataclass
class OsdResult:
    codeword: np.ndarray
    info: np.ndarray
    score: float
    candidates_evaluated: int


def build_flipping_set(spec: FlippingSetSpec, k_c: int) -> np.ndarray:
    """All flip patterns as an ``(N, width)`` array of MRB indices, -1 padded.

    Order is order-0, order-1, then the pairs, each lexicographic in MRB
    index. The semi-order set keeps pairs whose positions both fall among the
    ``m1`` least reliable MRB positions with at least one among the ``m2``
    least reliable.
    """
    return _flipping_set(spec, k_c).copy()


@lru_cache(maxsize=64)
def _flipping_set(spec: FlippingSetSpec, k_c: int) -> np.ndarray:
    if spec.semi_order_pairs is not None and spec.semi_order_pairs[0] > k_c:
        raise ValueError(f"semi-order m1={spec.semi_order_pairs[0]} exceeds k={k_c}")
    pats: list[tuple[int, ...]] = []
    if spec.include_order0:
        pats.append(())
    if spec.include_order1:
        pats.extend((a,) for a in range(k_c))
    if spec.full_order2:
        pats.extend((a, b) for a in range(k_c) for b in range(a + 1, k_c))
    if spec.semi_order_pairs is not None:
        m1, m2 = spec.semi_order_pairs
        lo1, lo2 = k_c - m1, k_c - m2
        pats.extend((a, b) for a in range(lo1, k_c) for b in range(a + 1, k_c) if b >= lo2)
    return patterns_array(pats)


def patterns_array(pats) -> np.ndarray:
    pats = [tuple(p) for p in pats]
    width = max([1] + [len(p) for p in pats])
    out = np.full((len(pats), width), -1, dtype=np.int64)
    for i, p in enumerate(pats):
        out[i, : len(p)] = p
    out.flags.writeable = False
    return out


def exhaustive_patterns(k_c: int) -> np.ndarray:
    """Every subset of the MRB, so the candidate list is the whole code."""
    pats = []
    for w in range(k_c + 1):
        pats.extend(combinations(range(k_c), w))
    return patterns_array(pats)


def _as_patterns(flips, k: int) -> np.ndarray:
    if isinstance(flips, FlippingSetSpec):
        return _flipping_set(flips, k)
    if isinstance(flips, str):
        return _flipping_set(FlippingSetSpec.parse(flips), k)
    p = np.asarray(flips, dtype=np.int64)
    if p.ndim != 2 or p.max(initial=-1) >= k:
        raise ValueError("flip patterns must be a 2-D array of MRB indices below k")
    return p


# ---------------------------------------------------------------------------
# Reference path
# ---------------------------------------------------------------------------


def rank_reliability(l) -> np.ndarray:
    """Positions sorted by |l| descending; equal magnitudes keep index order."""
    return np.argsort(-np.abs(np.asarray(l, dtype=np.float64)), kind="stable")


def most_reliable_basis(code: ComponentCode, order) -> tuple[BinaryMatrix, list[int]]:
    """Generator reduced to systematic form on the most reliable independent positions."""
    reduced, pivots = gf2_eliminate(code.G, order)
    if len(pivots) != code.k:
        raise RuntimeError("generator matrix is rank deficient")
    return reduced, pivots


def osd_decode_reference(code: ComponentCode, l, flips) -> OsdResult:
    l = np.asarray(l, dtype=np.float64)
    if l.shape != (code.n,):
        raise ValueError(f"expected {code.n} LLRs")
    patterns = _as_patterns(flips, code.k)
    Gp, mrb = most_reliable_basis(code, rank_reliability(l))
    Gd = Gp.to_dense().astype(np.int64)
    base = (l[mrb] < 0).astype(np.int64)
    x_rx = l  # any positive scaling of the metric gives the same argmin
    best = None
    for row in patterns:
        i = base.copy()
        for a in row:
            if a >= 0:
                i[a] ^= 1
        z = (i @ Gd) & 1
        dist = float(np.sum((x_rx - (1 - 2 * z)) ** 2))
        if best is None or dist < best[0]:
            best = (dist, z)
    z = best[1].astype(np.uint8)
    score = float(np.abs(l)[z != (l < 0)].sum())
    return OsdResult(z, z[: code.k].copy(), score, len(patterns))


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------


@intrinsic
def _ctlz(typingctx, x):
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctlz(args[0], ir.Constant(ir.IntType(1), 1))

    return sig, codegen


@numba.njit(cache=True, inline="always")
def _top_bit(x):
    # index of the highest set bit; x must be nonzero
    return 63 - np.int64(_ctlz(x))


@numba.njit(cache=True)
def _osd_kernel(hcols, k, llrs, patterns, out_cw, out_score):
    F, n = llrs.shape
    nr = n - k
    npat, pw = patterns.shape
    one = np.uint64(1)
    zero = np.uint64(0)
    basis = np.zeros(nr, np.uint64)
    combo = np.zeros(nr, np.uint64)
    has = np.zeros(nr, np.bool_)
    is_lrb = np.zeros(n, np.bool_)
    mrb = np.empty(k, np.int64)
    lrb = np.empty(nr, np.int64)
    P = np.zeros(k, np.uint64)
    nbytes = (nr + 7) // 8
    table = np.zeros((nbytes, 256), np.float64)
    mw = np.empty(k, np.float64)

    for f in range(F):
        llr = llrs[f]
        mag = np.abs(llr)
        order = np.argsort(-mag, kind="mergesort")
        for r in range(nr):
            has[r] = False
        for j in range(n):
            is_lrb[j] = False

        # LRB: greedy basis of the columns of H from the least reliable end.
        # Its complement is the greedy basis of G from the most reliable end.
        nl = 0
        for t in range(n - 1, -1, -1):
            if nl == nr:
                break
            col = order[t]
            v = hcols[col]
            cb = zero
            while v:
                B = _top_bit(v)
                if has[B]:
                    v ^= basis[B]
                    cb ^= combo[B]
                else:
                    basis[B] = v
                    combo[B] = cb ^ (one << np.uint64(nl))
                    has[B] = True
                    lrb[nl] = col
                    is_lrb[col] = True
                    nl += 1
                    break

        # P[a]: LRB bits that change when MRB bit a flips, i.e. H_L^-1 h_a
        nm = 0
        for t in range(n):
            col = order[t]
            if is_lrb[col]:
                continue
            v = hcols[col]
            cb = zero
            while v:
                B = _top_bit(v)
                v ^= basis[B]
                cb ^= combo[B]
            mrb[nm] = col
            P[nm] = cb
            nm += 1

        # discrepancy of the order-0 candidate against hard decisions on LRB
        e0 = zero
        for a in range(k):
            mw[a] = mag[mrb[a]]
            if llr[mrb[a]] < 0:
                e0 ^= P[a]
        for r in range(nl):
            if llr[lrb[r]] < 0:
                e0 ^= one << np.uint64(r)

        for q in range(nbytes):
            table[q, 0] = 0.0
            for bit in range(8):
                r = 8 * q + bit
                wr = mag[lrb[r]] if r < nl else 0.0
                step = 1 << bit
                for u in range(step):
                    table[q, u | step] = table[q, u] + wr

        best = np.inf
        best_p = -1
        best_mask = zero
        for p in range(npat):
            m = e0
            s = 0.0
            for u in range(pw):
                a = patterns[p, u]
                if a < 0:
                    break
                m ^= P[a]
                s += mw[a]
            mm = m
            for q in range(nbytes):
                s += table[q, np.int64(mm & np.uint64(255))]
                mm >>= np.uint64(8)
            if s < best:
                best = s
                best_p = p
                best_mask = m

        cw = out_cw[f]
        for a in range(k):
            cw[mrb[a]] = 1 if llr[mrb[a]] < 0 else 0
        if best_p >= 0:
            for u in range(pw):
                a = patterns[best_p, u]
                if a < 0:
                    break
                cw[mrb[a]] ^= 1
        for r in range(nl):
            h = 1 if llr[lrb[r]] < 0 else 0
            cw[lrb[r]] = h ^ np.int64((best_mask >> np.uint64(r)) & one)
        out_score[f] = best


def osd_decode_batch(code: ComponentCode, llrs, flips) -> tuple[np.ndarray, np.ndarray]:
    """Decode every row of ``llrs``; returns ``(codewords, scores)``."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != code.n:
        raise ValueError(f"expected an (F, {code.n}) LLR array")
    if code.n - code.k > 64:
        raise ValueError("the OSD kernel supports at most 64 parity positions")
    patterns = np.ascontiguousarray(_as_patterns(flips, code.k))
    if patterns.shape[0] == 0:
        raise ValueError("empty flipping set")
    F = llrs.shape[0]
    cw = np.zeros((F, code.n), dtype=np.uint8)
    score = np.zeros(F, dtype=np.float64)
    _osd_kernel(code.h_columns, code.k, llrs, patterns, cw, score)
    return cw, score


def osd_decode(code: ComponentCode, l, flips) -> OsdResult:
    l = np.asarray(l, dtype=np.float64)
    if l.shape != (code.n,):
        raise ValueError(f"expected {code.n} LLRs")
    cw, score = osd_decode_batch(code, l[None, :], flips)
    npat = _as_patterns(flips, code.k).shape[0]
    return OsdResult(cw[0], cw[0, : code.k].copy(), float(score[0]), npat)
