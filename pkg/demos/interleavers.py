"""Digit-swap interleavers and how they spread a burst across codewords.

A burst of consecutive errors on one transmitted lane is mapped back through
the interleaver; the demo prints the smallest distance between two errored
codeword positions, plus the message schedule of the iterative decoder.

Run: python3 demos/interleavers.py
"""

from __future__ import annotations

import numpy as np

from cpmlc.schemes import InterleaverSpec, build_interleaver, deinterleave, message_schedule


def min_spacing(x: np.ndarray) -> int:
    return int(np.diff(np.flatnonzero(x)).min())


def main():
    n = 128
    burst = np.zeros(n, dtype=np.uint8)
    burst[40:56] = 1  # 16 consecutive channel errors
    print("size  first 12 positions of the permutation           min spacing of burst errors")
    for S in (1, 2, 4, 8, 16, 128):
        p = build_interleaver(InterleaverSpec("digit_swap", S), n)
        assert np.array_equal(p[p], np.arange(n))
        print(f"{S:4d}  {p[:12].tolist()!s:48s}  {min_spacing(deinterleave(burst, p))}")

    print("\nmessage schedule, d=3, I=3")
    for e in message_schedule(3, 3):
        print(f"  i={e.iteration} j={e.lane}: " + " ".join(e.messages))


if __name__ == "__main__":
    main()
