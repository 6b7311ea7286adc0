"""Extended BCH component codes, systematic encoding and rate accounting."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf2m import BinaryMatrix, GaloisField, bch_generator, gf2_eliminate, pack_bits

# KP4 = RS(544, 514)
KP4_N = 544
KP4_K = 514


@dataclass(frozen=True)
class OuterCodeModel:
    """The RS(544,514) outer code reduced to a pre-FEC BER threshold."""

    rate: float = KP4_K / KP4_N
    threshold_ber: float = 2.2e-4
    target_post_ber: float = 1e-15

    def __post_init__(self):
        if not 0 < self.threshold_ber < 0.5:
            raise ValueError("threshold_ber must lie in (0, 0.5)")


KP4 = OuterCodeModel()


def outer_success(pre_outer_ber: float, model: OuterCodeModel = KP4) -> bool:
    """True when the outer decoder is expected to reach its post-FEC target."""
    if not 0 <= pre_outer_ber <= 0.5:
        raise ValueError("pre-outer BER must lie in [0, 0.5]")
    return pre_outer_ber <= model.threshold_ber


@dataclass(frozen=True, eq=False)
class ComponentCode:
    """A binary linear (n, k, d_min) code with systematic generator ``G = [I | P]``.

    ``d_min`` is the designed minimum distance (a proven lower bound for BCH
    codes), not an exhaustively verified value.
    """

    n: int
    k: int
    d_min: int
    G: BinaryMatrix
    H: BinaryMatrix
    name: str = ""
    g_dense: np.ndarray = field(init=False, repr=False)
    h_dense: np.ndarray = field(init=False, repr=False)
    h_columns: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = self.G.to_dense()
        h = self.H.to_dense()
        if g.shape != (self.k, self.n) or h.shape != (self.n - self.k, self.n):
            raise ValueError("generator/parity-check shapes inconsistent with (n, k)")
        if not np.array_equal(g[:, : self.k], np.eye(self.k, dtype=np.uint8)):
            raise ValueError("generator must be systematic in the first k columns")
        g.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "g_dense", g)
        object.__setattr__(self, "h_dense", h)
        # column j of H as one word (bit i = row i), consumed by the OSD kernel
        if self.n - self.k <= 64:
            cols = pack_bits(h.T)[:, 0]
            cols.flags.writeable = False
            object.__setattr__(self, "h_columns", cols)
        else:
            object.__setattr__(self, "h_columns", None)

    @property
    def n_c(self) -> int:
        return self.n

    @property
    def k_c(self) -> int:
        return self.k

    @property
    def info_positions(self) -> np.ndarray:
        return np.arange(self.k)

    def syndrome(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.int64)
        return (word @ self.h_dense.T.astype(np.int64)) & 1

    def is_codeword(self, word) -> np.ndarray | bool:
        s = self.syndrome(word)
        return ~s.any(axis=-1)

    def __repr__(self) -> str:
        return f"ComponentCode({self.name or 'code'}: n={self.n}, k={self.k}, d_min={self.d_min})"


def systematic_from_generator(G0: np.ndarray):
    """Row-reduce a full-rank generator to ``[I | P]`` on its first k columns."""
    k, n = G0.shape
    reduced, pivots = gf2_eliminate(BinaryMatrix.from_dense(G0))
    if pivots != list(range(k)):
        raise ValueError("generator is not systematic-reducible on its first k columns")
    g = reduced.to_dense()
    P = g[:, k:]
    h = np.concatenate([P.T, np.eye(n - k, dtype=np.uint8)], axis=1)
    return BinaryMatrix.from_dense(g), BinaryMatrix.from_dense(h)


def _cyclic_generator_matrix(gpoly, n: int) -> np.ndarray:
    coeffs = np.array(gpoly.coefficients, dtype=np.uint8)
    r = gpoly.degree
    k = n - r
    G0 = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        G0[i, i : i + r + 1] = coeffs
    return G0


def build_ebch(k_c: int, m: int = 7) -> ComponentCode:
    """Extended narrow-sense BCH code of length 2^m with k_c information bits.

    The cyclic BCH(2^m - 1, k_c) code is extended with one overall parity
    bit, raising the designed distance by one. Results are cached, so equal
    arguments return the same object.
    """
    return _build_ebch(int(k_c), int(m))


@lru_cache(maxsize=None)
def _build_ebch(k_c: int, m: int) -> ComponentCode:
    field = GaloisField(m)
    n0 = field.order
    found = None
    for delta in range(3, n0 + 1, 2):
        try:
            g = bch_generator(field, delta)
        except ValueError:
            break
        if n0 - g.degree == k_c:
            found = (delta, g)
            break
        if n0 - g.degree < k_c:
            break
    if found is None:
        raise ValueError(f"no binary BCH({n0}, {k_c}) code exists over GF(2^{m})")
    delta, g = found
    G0 = _cyclic_generator_matrix(g, n0)
    parity = G0.sum(axis=1, dtype=np.int64) & 1
    G0 = np.concatenate([G0, parity[:, None].astype(np.uint8)], axis=1)
    G, H = systematic_from_generator(G0)
    n = n0 + 1
    return ComponentCode(n, k_c, delta + 1, G, H, name=f"ebch-{n}-{k_c}")


def extended_hamming(m: int) -> ComponentCode:
    """(2^m, 2^m - m - 1, 4) extended Hamming code (the d=3 eBCH code)."""
    return build_ebch((1 << m) - 1 - m, m=m)


CODE_NAMES = {
    "ebch-128-113": (113, 7),
    "ebch-128-106": (106, 7),
    "ebch-128-99": (99, 7),
    "ehamming-8-4": (4, 3),
    "ehamming-16-11": (11, 4),
}


def code_by_name(name: str) -> ComponentCode:
    try:
        k, m = CODE_NAMES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown code {name!r}; known: {', '.join(CODE_NAMES)}") from None
    return build_ebch(k, m)


def encode(code: ComponentCode, info) -> np.ndarray:
    """Systematic encoding; accepts a single word or a batch on the last axis."""
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != code.k:
        raise ValueError(f"expected {code.k} information bits, got {info.shape[-1]}")
    return ((info.astype(np.int32) @ code.g_dense.astype(np.int32)) & 1).astype(np.uint8)


def info_bits_per_frame(kind: str, d: int, code: ComponentCode | None) -> int:
    if kind == "concatenated":
        return d * code.k
    if kind == "cp-mlc":
        return code.k + (d - 1) * code.n
    if kind == "cp-mlc-id":
        return (d - 1) * code.k + code.n
    if kind == "uncoded":
        n = code.n if code is not None else 128
        return d * n
    raise ValueError(f"unknown scheme kind {kind!r}")


def inner_rate(scheme) -> float:
    n = scheme.code.n if scheme.code is not None else 128
    return info_bits_per_frame(scheme.kind, scheme.d, scheme.code) / (scheme.d * n)


def total_rate(scheme, outer: OuterCodeModel = KP4) -> float:
    return inner_rate(scheme) * outer.rate


def scheme_overhead(scheme, outer: OuterCodeModel = KP4) -> float:
    """Total overhead of inner scheme plus outer code, in percent."""
    return 100.0 * (1.0 / total_rate(scheme, outer) - 1.0)
