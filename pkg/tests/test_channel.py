import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nbldpc.channel import (ChannelConfig, ChannelError, bit_llr, frame_rng, frame_seed, generate_priors,
                            normalize_sort_truncate, priors_from_bit_llrs, quantize, sigma_from_snr,
                            symbol_metrics, transmit_all_zero)
from nbldpc.code import ParityCheckMatrix
from nbldpc.decoder import DecoderConfig
from nbldpc.gf import build_field
from nbldpc.llrv import Llrv


def test_sigma_examples():
    assert sigma_from_snr(0.0, 0.5) == pytest.approx(1.0)
    assert sigma_from_snr(4.4, 0.5) == pytest.approx(1 / math.sqrt(10 ** 0.44))
    assert sigma_from_snr(4.4, 0.5) == pytest.approx(0.6026, abs=5e-5)
    assert sigma_from_snr(float("inf"), 0.5) == 0.0
    with pytest.raises(ChannelError):
        sigma_from_snr(1.0, 0.0)
    with pytest.raises(ChannelError):
        sigma_from_snr(1.0, 1.5)


def test_transmit_noiseless():
    y = transmit_all_zero(50, 0.0, np.random.default_rng(0))
    assert np.all(y == 1.0)


def test_transmit_statistics():
    y = transmit_all_zero(10 ** 6, 1.0, frame_rng(11, 0))
    assert abs(y.mean() - 1.0) < 0.005
    assert abs(y.var() - 1.0) < 0.01


def test_transmit_deterministic():
    a = transmit_all_zero(100, 0.7, frame_rng(3, 9))
    b = transmit_all_zero(100, 0.7, frame_rng(3, 9))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, transmit_all_zero(100, 0.7, frame_rng(3, 10)))


def test_frame_seed_mixing():
    seeds = {frame_seed(1, k) for k in range(1000)}
    assert len(seeds) == 1000
    assert frame_seed(1, 0) != frame_seed(2, 0)


def test_bit_llr_examples():
    assert bit_llr(0.5, 1.0) == pytest.approx(1.0)
    assert bit_llr(1.0, 0.6026) == pytest.approx(5.507, abs=1e-3)
    assert bit_llr(0.0, 0.8) == 0.0
    assert bit_llr(-0.3, 0.0, clamp=63.0) == -63.0


def test_symbol_metrics(gf4, gf8):
    assert symbol_metrics([2.0, 2.0], gf4).tolist() == [0, 2, 2, 4]
    assert symbol_metrics([0.0, 0.0], gf4).tolist() == [0, 0, 0, 0]
    assert symbol_metrics([1.0, 2.0, 4.0], gf8)[7] == 7
    with pytest.raises(ChannelError):
        symbol_metrics([1.0], gf4)


@given(st.lists(st.floats(-50, 50), min_size=5, max_size=5))
def test_all_zero_symbol_scores_zero(lams):
    assert symbol_metrics(lams, build_field(5))[0] == 0.0


def test_normalize_sort_truncate_examples():
    v = normalize_sort_truncate([0, 2, 2, 4], 3)
    assert v.pairs() == [(0, 0), (2, 1), (2, 2)]
    full = normalize_sort_truncate([3.0, 1.0, 4.0, 1.5], 4)
    assert sorted(full.indices.tolist()) == [0, 1, 2, 3]
    met = np.full(8, 3.0)
    met[5] = -1.0
    assert normalize_sort_truncate(met, 2).pairs()[0] == (0.0, 5)
    with pytest.raises(ChannelError):
        normalize_sort_truncate([0, 1], 3)


@given(st.lists(st.floats(-100, 100), min_size=16, max_size=16), st.integers(1, 16))
def test_normalize_output_valid(metrics, n_m):
    v = normalize_sort_truncate(metrics, n_m)
    assert len(v) == n_m and v.is_valid()


def test_quantize_examples():
    assert quantize(Llrv.from_pairs([(0.0, 0), (1.3, 1)]), 6, 0.25).pairs() == [(0, 0), (5, 1)]
    assert quantize(Llrv.from_pairs([(0.0, 3), (100.0, 1)]), 6, 0.25).pairs() == [(0, 3), (63, 1)]


def test_quantize_reorders_ties():
    v = Llrv.from_pairs([(0.0, 2), (0.6, 3), (0.7, 1)])
    assert quantize(v, 4, 1.0).pairs() == [(0, 2), (1, 1), (1, 3)]


@given(st.floats(0, 200), st.floats(0, 200), st.integers(2, 8), st.floats(0.01, 5))
def test_quantize_monotone(a, b, bits, step):
    lo, hi = sorted((a, b))
    levels = quantize(Llrv.from_pairs([(0.0, 0), (lo, 1), (hi, 2)]), bits, step).as_dict()
    assert levels[1] <= levels[2] <= 2 ** bits - 1


def test_priors_example(gf4):
    pr = priors_from_bit_llrs(np.array([[2.0, 2.0]]), gf4, 2)
    assert pr[0].pairs() == [(0.0, 0), (2.0, 1)]


def test_priors_noiseless(gf32, code192):
    ch = ChannelConfig(float("inf"), 0.5)
    for qb in (0, 6):
        pr = generate_priors(code192, ch, DecoderConfig(n_m=8, quant_bits=qb), gf32, frame_rng(0, 0))
        assert np.all(pr.indices[:, 0] == 0)
        assert np.all(pr.penalties[:, 0] == 0)


def test_priors_deterministic_and_valid(gf32, code192):
    ch = ChannelConfig(2.0, 0.5)
    cfg = DecoderConfig(n_m=8, quant_bits=6)
    a = generate_priors(code192, ch, cfg, gf32, frame_rng(4, 2))
    b = generate_priors(code192, ch, cfg, gf32, frame_rng(4, 2))
    assert np.array_equal(a.penalties, b.penalties) and np.array_equal(a.indices, b.indices)
    assert all(a[j].is_valid() for j in range(len(a)))
    assert a.penalties.max() <= 63


def test_priors_field_mismatch(gf4, code192):
    with pytest.raises(ChannelError):
        generate_priors(code192, ChannelConfig(2.0, 0.5), DecoderConfig(n_m=2), gf4, frame_rng(0, 0))


def test_default_quant_step():
    ch = ChannelConfig(0.0, 0.5)
    assert ch.step() == pytest.approx(0.5)
    assert ChannelConfig(0.0, 0.5, quant_step=0.2).step() == 0.2
