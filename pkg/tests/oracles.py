"""Brute-force reference computations shared by the tests.

Nothing here calls the elimination or decoding code under test.
"""

from __future__ import annotations

import itertools

import numpy as np

from cpmlc.gf2m import gf2_rank_dense

TABLE_II = {
    113: [("t0+t1", 114), ("t0+t1+t2(10,4)", 144), ("t0+t1+t2(20,9)", 249),
          ("t0+t1+t2(30,19)", 494), ("t0+t1+t2(40,29)", 839)],
    106: [("t0+t1", 107), ("t0+t1+t2(10,4)", 137), ("t0+t1+t2(20,9)", 242),
          ("t0+t1+t2(30,19)", 487), ("t0+t1+t2(40,29)", 832)],
    99: [("t0+t1+t2(40,29)", 825)],
}


def all_codewords(code) -> np.ndarray:
    k = code.k
    info = ((np.arange(1 << k)[:, None] >> np.arange(k)) & 1).astype(np.int64)
    return ((info @ code.g_dense.astype(np.int64)) & 1).astype(np.uint8)


def ml_decode(words: np.ndarray, l: np.ndarray) -> np.ndarray:
    """Maximum-likelihood codeword: largest correlation with the LLRs."""
    corr = (1 - 2 * words.astype(np.float64)) @ l
    return words[int(np.argmax(corr))]


def greedy_mrb(G: np.ndarray, order) -> list[int]:
    """Most reliable independent positions by repeated rank tests."""
    chosen: list[int] = []
    for c in order:
        if gf2_rank_dense(G[:, chosen + [int(c)]]) == len(chosen) + 1:
            chosen.append(int(c))
        if len(chosen) == G.shape[0]:
            break
    return chosen


def candidate_codewords(words: np.ndarray, G: np.ndarray, l: np.ndarray, patterns) -> np.ndarray:
    """Codewords reached by flipping ``patterns`` on the hard-decided MRB."""
    order = np.argsort(-np.abs(l), kind="stable")
    mrb = greedy_mrb(G, order)
    hard = (l < 0).astype(np.uint8)
    lookup = {w[mrb].tobytes(): w for w in words}
    out = []
    for p in patterns:
        i = hard[mrb].copy()
        for a in p:
            if a >= 0:
                i[a] ^= 1
        out.append(lookup[i.tobytes()])
    return np.array(out)


def semi_order_pairs_by_definition(k: int, m1: int, m2: int) -> set[tuple[int, int]]:
    """Pairs of MRB indices (0 = most reliable) inside the m1 least reliable,
    at least one inside the m2 least reliable."""
    least_m1 = set(range(k - m1, k))
    least_m2 = set(range(k - m2, k))
    return {
        (a, b)
        for a, b in itertools.combinations(range(k), 2)
        if a in least_m1 and b in least_m1 and (a in least_m2 or b in least_m2)
    }
