from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import norm

from cpmlc.channel import (
    L_MAX,
    ChannelConfig,
    frame_rng,
    hard_decision,
    llr_from_awgn,
    modulate,
    qfunc,
    sigma_to_snr,
    snr_to_sigma,
    transmit_awgn,
    transmit_bsc,
    uncoded_ber,
    uncoded_required_snr,
)


def test_modulate():
    assert modulate([0, 1]).tolist() == [1.0, -1.0]
    assert (modulate(np.zeros(128, dtype=np.uint8)) == 1).all()


def test_llr_examples():
    # sigma^2 = 0.5
    assert llr_from_awgn([1.0], math.sqrt(0.5))[0] == pytest.approx(4.0)
    assert llr_from_awgn([0.0], 1.0)[0] == 0.0
    assert llr_from_awgn([-2.0], 1.0)[0] == pytest.approx(-4.0)


def test_llr_clamp():
    l = llr_from_awgn([100.0, -100.0], 0.1)
    assert l.tolist() == [L_MAX, -L_MAX]


def test_sigma_examples():
    assert snr_to_sigma(0.0) == pytest.approx(1 / math.sqrt(2))
    assert snr_to_sigma(10 * math.log10(2)) == pytest.approx(0.5)
    assert sigma_to_snr(snr_to_sigma(4.37)) == pytest.approx(4.37)


def test_noiseless_roundtrip(rng):
    b = rng.integers(0, 2, 1000, dtype=np.uint8)
    y = transmit_awgn(modulate(b), 1e-9, rng)
    assert np.array_equal(hard_decision(llr_from_awgn(y, 1e-3)), b)


def test_hard_decision_at_zero():
    assert hard_decision([0.0, -0.0, -1e-300, 1e-300]).tolist() == [0, 0, 1, 0]


def test_awgn_variance():
    rng = np.random.default_rng(1)
    sigma = 0.7
    y = transmit_awgn(np.ones(1_000_000), sigma, rng)
    assert np.var(y - 1) == pytest.approx(sigma**2, rel=0.01)


def test_awgn_determinism():
    y1 = transmit_awgn(np.ones(64), 0.5, frame_rng(7, 3))
    y2 = transmit_awgn(np.ones(64), 0.5, frame_rng(7, 3))
    assert np.array_equal(y1, y2)


def test_bsc():
    rng = np.random.default_rng(2)
    b = np.zeros(1_000_000, dtype=np.uint8)
    assert np.array_equal(transmit_bsc(b, 0.0, rng), b)
    frac = transmit_bsc(b, 0.1, rng).mean()
    assert abs(frac - 0.1) < 0.001
    m1 = transmit_bsc(b[:100], 0.3, frame_rng(1, 1))
    m2 = transmit_bsc(b[:100], 0.3, frame_rng(1, 1))
    assert np.array_equal(m1, m2)


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig("bsc", p=0.5)
    with pytest.raises(ValueError):
        ChannelConfig("awgn", snr_db=float("inf"))
    with pytest.raises(ValueError):
        ChannelConfig("rayleigh")
    with pytest.raises(ValueError):
        ChannelConfig(master_seed=-1)


def test_frame_streams_order_independent():
    forward = [frame_rng(5, i).random(4) for i in range(20)]
    backward = [frame_rng(5, i).random(4) for i in reversed(range(20))][::-1]
    assert all(np.array_equal(a, b) for a, b in zip(forward, backward))


def test_frame_streams_distinct():
    draws = {tuple(frame_rng(5, i).integers(0, 2**63, 2)) for i in range(2000)}
    assert len(draws) == 2000
    assert not np.array_equal(frame_rng(5, 0).random(8), frame_rng(6, 0).random(8))


@given(st.floats(-5, 15))
def test_uncoded_ber_inverse(snr):
    assert uncoded_required_snr(float(uncoded_ber(snr))) == pytest.approx(snr, abs=1e-6)


def test_qfunc_against_scipy():
    x = np.linspace(-3, 8, 50)
    assert np.allclose(qfunc(x), norm.sf(x), rtol=1e-10, atol=0)


def test_uncoded_ber_by_simulation():
    rng = np.random.default_rng(3)
    snr = 4.0
    sigma = snr_to_sigma(snr)
    n = 2_000_000
    y = transmit_awgn(np.ones(n), sigma, rng)
    err = hard_decision(llr_from_awgn(y, sigma)).mean()
    p = float(uncoded_ber(snr))
    assert abs(err - p) < 3 * math.sqrt(p * (1 - p) / n)
