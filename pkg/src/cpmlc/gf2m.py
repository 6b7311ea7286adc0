"""GF(2^m) arithmetic, binary polynomials and bit-packed GF(2) matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# x^7 + x^3 + 1
DEFAULT_PRIMITIVE = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


# ---------------------------------------------------------------------------
# Binary polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryPolynomial:
    """Polynomial over GF(2); bit ``i`` of ``bits`` is the coefficient of x^i."""

    bits: int = 0

    @classmethod
    def from_coefficients(cls, coeffs: Iterable[int]) -> "BinaryPolynomial":
        """Build from coefficients listed lowest degree first."""
        v = 0
        for i, c in enumerate(coeffs):
            if c & 1:
                v |= 1 << i
        return cls(v)

    @property
    def coefficients(self) -> tuple[int, ...]:
        if self.bits == 0:
            return (0,)
        return tuple((self.bits >> i) & 1 for i in range(self.degree + 1))

    @property
    def degree(self) -> int:
        # -1 for the zero polynomial
        return self.bits.bit_length() - 1

    def __mul__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        a, b, out = self.bits, other.bits, 0
        while b:
            if b & 1:
                out ^= a
            a <<= 1
            b >>= 1
        return BinaryPolynomial(out)

    def __add__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return BinaryPolynomial(self.bits ^ other.bits)

    def __divmod__(self, other: "BinaryPolynomial"):
        if other.bits == 0:
            raise ZeroDivisionError("division by the zero polynomial")
        q, r = 0, self.bits
        dd = other.degree
        while r and r.bit_length() - 1 >= dd:
            shift = r.bit_length() - 1 - dd
            q |= 1 << shift
            r ^= other.bits << shift
        return BinaryPolynomial(q), BinaryPolynomial(r)

    def __mod__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return divmod(self, other)[1]

    def __floordiv__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return divmod(self, other)[0]

    def __str__(self) -> str:
        if self.bits == 0:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            if (self.bits >> i) & 1:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return " + ".join(terms)


def poly_gcd(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    while b.bits:
        a, b = b, a % b
    return a


def poly_lcm(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    return (a * b) // poly_gcd(a, b)


# ---------------------------------------------------------------------------
# Galois field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaloisField:
    """GF(2^m) with log/antilog tables generated by a primitive polynomial."""

    m: int
    primitive_poly: int = 0
    exp: np.ndarray = field(init=False, repr=False, compare=False)
    log: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 2 <= self.m <= 16:
            raise ValueError(f"extension degree must be in 2..16, got {self.m}")
        poly = self.primitive_poly or DEFAULT_PRIMITIVE[self.m]
        if poly.bit_length() - 1 != self.m:
            raise ValueError("primitive polynomial degree does not match m")
        object.__setattr__(self, "primitive_poly", poly)
        order = (1 << self.m) - 1
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.full(1 << self.m, -1, dtype=np.int64)
        x = 1
        for i in range(order):
            if log[x] != -1:
                raise ValueError(f"polynomial {poly:#x} is not primitive")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> self.m:
                x ^= poly
        if x != 1:
            raise ValueError(f"polynomial {poly:#x} is not primitive")
        exp[order:] = exp[:order]
        exp.flags.writeable = False
        log.flags.writeable = False
        object.__setattr__(self, "exp", exp)
        object.__setattr__(self, "log", log)

    @property
    def order(self) -> int:
        """Number of nonzero elements, 2^m - 1."""
        return (1 << self.m) - 1

    @property
    def size(self) -> int:
        return 1 << self.m

    def alpha(self, power: int) -> int:
        return int(self.exp[power % self.order])

    def _check(self, a: int):
        if not 0 <= a < self.size:
            raise ValueError(f"{a} is not an element of GF(2^{self.m})")


def gf_mul(field: GaloisField, a: int, b: int) -> int:
    field._check(a)
    field._check(b)
    if a == 0 or b == 0:
        return 0
    return int(field.exp[field.log[a] + field.log[b]])


def gf_inv(field: GaloisField, a: int) -> int:
    field._check(a)
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    return int(field.exp[(field.order - field.log[a]) % field.order])


def gf_pow(field: GaloisField, a: int, e: int) -> int:
    field._check(a)
    if a == 0:
        return 1 if e == 0 else 0
    return int(field.exp[(int(field.log[a]) * e) % field.order])


def conjugacy_class(field: GaloisField, e: int) -> list[int]:
    """Elements e, e^2, e^4, ... until the cycle closes."""
    out = [e]
    x = gf_mul(field, e, e)
    while x != e:
        out.append(x)
        x = gf_mul(field, x, x)
    return out


def minimal_polynomial(field: GaloisField, e: int) -> BinaryPolynomial:
    """Monic binary polynomial of least degree having ``e`` as a root."""
    field._check(e)
    if e == 0:
        raise ValueError("minimal polynomial of 0 is x; only nonzero elements are supported")
    # coefficients in GF(2^m), lowest degree first
    coeffs = [1]
    for root in conjugacy_class(field, e):
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] ^= c
            nxt[i] ^= gf_mul(field, c, root)
        coeffs = nxt
    if any(c not in (0, 1) for c in coeffs):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return BinaryPolynomial.from_coefficients(coeffs)


def bch_generator(field: GaloisField, design_distance: int) -> BinaryPolynomial:
    """Generator of the narrow-sense binary BCH code of length 2^m - 1.

    The roots are alpha^1 .. alpha^(design_distance - 1); conjugates make it
    enough to take the lcm over the odd powers.
    """
    if design_distance < 3:
        raise ValueError("design distance must be at least 3")
    if design_distance > field.order:
        raise ValueError(f"design distance {design_distance} too large for GF(2^{field.m})")
    g = BinaryPolynomial(1)
    for p in range(1, design_distance - 1 + 1, 2):
        g = poly_lcm(g, minimal_polynomial(field, field.alpha(p)))
    if g.degree >= field.order:
        raise ValueError(f"design distance {design_distance} too large for GF(2^{field.m})")
    return g


# ---------------------------------------------------------------------------
# Bit-packed GF(2) matrices
# ---------------------------------------------------------------------------

_WORD = 64


def _words(cols: int) -> int:
    return max(1, (cols + _WORD - 1) // _WORD)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    cols = bits.shape[-1]
    nw = _words(cols)
    padded = np.zeros(bits.shape[:-1] + (nw * _WORD,), dtype=np.uint8)
    padded[..., :cols] = bits
    b8 = np.packbits(padded, axis=-1, bitorder="little")
    return b8.view("<u8").reshape(bits.shape[:-1] + (nw,)).astype(np.uint64)


def unpack_bits(words: np.ndarray, cols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    b8 = words.view(np.uint8).reshape(words.shape[:-1] + (words.shape[-1] * 8,))
    return np.unpackbits(b8, axis=-1, bitorder="little")[..., :cols]


class BinaryMatrix:
    """Dense GF(2) matrix stored as rows of 64-bit words.

    Instances are treated as immutable; operations return new matrices.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray | None = None):
        self.rows = rows
        self.cols = cols
        if data is None:
            data = np.zeros((rows, _words(cols)), dtype=np.uint64)
        if data.shape != (rows, _words(cols)):
            raise ValueError("packed data has the wrong shape")
        data = np.array(data, dtype=np.uint64)
        data.flags.writeable = False
        self.data = data

    @classmethod
    def from_dense(cls, a) -> "BinaryMatrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(a.shape[0], a.shape[1], pack_bits(a))

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        return unpack_bits(self.data, self.cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.rows}x{self.cols})"

    def __matmul__(self, other: "BinaryMatrix") -> "BinaryMatrix":
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        prod = (self.to_dense().astype(np.int64) @ other.to_dense().astype(np.int64)) & 1
        return BinaryMatrix.from_dense(prod)

    @property
    def T(self) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.to_dense().T)

    def take_columns(self, cols: Sequence[int]) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.to_dense()[:, list(cols)])

    def rank(self) -> int:
        return len(gf2_eliminate(self)[1])

    def is_zero(self) -> bool:
        return not self.data.any()


def gf2_eliminate(M: BinaryMatrix, column_priority: Sequence[int] | None = None):
    """Gauss-Jordan elimination with pivots chosen in ``column_priority`` order.

    Returns ``(reduced, pivot_columns)``. Row ``r`` of the reduced matrix
    holds the pivot for ``pivot_columns[r]`` and every other row is zero in
    that column. Rows past the rank are zero.
    """
    n = M.cols
    if column_priority is None:
        column_priority = range(n)
    column_priority = [int(c) for c in column_priority]
    if sorted(column_priority) != list(range(n)):
        raise ValueError("column_priority must be a permutation of the column indices")

    A = M.data.copy()
    pivots: list[int] = []
    r = 0
    one = np.uint64(1)
    for c in column_priority:
        if r == M.rows:
            break
        w, b = divmod(c, _WORD)
        colbits = (A[:, w] >> np.uint64(b)) & one
        cand = np.flatnonzero(colbits[r:])
        if cand.size == 0:
            continue
        p = r + int(cand[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
            colbits[[r, p]] = colbits[[p, r]]
        hits = np.flatnonzero(colbits)
        hits = hits[hits != r]
        if hits.size:
            A[hits] ^= A[r]
        pivots.append(c)
        r += 1
    return BinaryMatrix(M.rows, M.cols, A), pivots


def gf2_rank_dense(a) -> int:
    """Rank of a dense 0/1 matrix via Python-int bitsets.

    Independent of :func:`gf2_eliminate`; used as a cross-check.
    """
    a = np.asarray(a, dtype=np.uint8)
    rows = [int("".join(map(str, row[::-1])), 2) if row.size else 0 for row in a]
    rank = 0
    while rows:
        pivot = rows.pop()
        if pivot == 0:
            continue
        rank += 1
        top = pivot.bit_length() - 1
        rows = [x ^ pivot if (x >> top) & 1 else x for x in rows]
    return rank
