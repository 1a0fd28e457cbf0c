import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nbldpc.channel import ChannelConfig, Priors, frame_rng, generate_priors, priors_from_bit_llrs
from nbldpc.code import ParityCheckMatrix, is_codeword
from nbldpc.decoder import (DecoderConfig, DecoderError, cn_process, decode, ecn_combine, inverse_permute,
                            permute, posterior_and_decide, vn_update)
from nbldpc.gf import build_field
from nbldpc.llrv import IDENTITY, Llrv
from oracles import brute_combine, dense_decode, random_llrv

L = Llrv.from_pairs


# -- permutation -----------------------------------------------------------

def test_permute_examples(gf4):
    v = L([(0.0, 3), (1.0, 0)])
    assert permute(v, 1, gf4) == v
    assert permute(L([(0.0, 3)]), 2, gf4).pairs() == [(0.0, 1)]
    assert inverse_permute(L([(0.0, 1)]), 2, gf4).pairs() == [(0.0, 3)]
    assert inverse_permute(v, 1, gf4) == v
    with pytest.raises(DecoderError):
        permute(v, 0, gf4)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 31), st.booleans())
def test_permute_round_trip(seed, h, integer):
    f = build_field(5)
    v = random_llrv(np.random.default_rng(seed), 32, 8, integer)
    p = permute(v, h, f)
    assert p.is_valid()
    assert sorted(p.penalties) == sorted(v.penalties)
    assert inverse_permute(p, h, f) == v


# -- elementary check node -------------------------------------------------

def test_ecn_examples(gf4):
    a, b = L([(0, 0), (1, 2)]), L([(0, 0), (2, 3)])
    for alg in ("ems", "mm"):
        cfg = DecoderConfig(algorithm=alg, n_m=2)
        assert ecn_combine(a, b, cfg, gf4).pairs() == [(0, 0), (1, 2)]
        assert ecn_combine(a, b, cfg, gf4, exhaustive=True).pairs() == [(0, 0), (1, 2)]
    assert brute_combine([a, b], 2, False) == [(0, 0), (1, 2)]


def test_ecn_identity(gf8):
    rng = np.random.default_rng(1)
    cfg = DecoderConfig(n_m=4, ls_cn=2)
    for _ in range(20):
        a = random_llrv(rng, 8, 4)
        assert ecn_combine(a, IDENTITY, cfg, gf8) == a
        assert ecn_combine(IDENTITY, a, cfg, gf8) == a


@pytest.mark.parametrize("q, n_m", [(8, 4), (16, 8), (32, 8)])
@pytest.mark.parametrize("alg", ["ems", "mm"])
def test_ecn_matches_brute_force(q, n_m, alg):
    f = build_field(q.bit_length() - 1)
    rng = np.random.default_rng(q * n_m)
    for ls_cn in (1, n_m // 2, n_m):
        cfg = DecoderConfig(algorithm=alg, n_m=n_m, ls_cn=ls_cn)
        for trial in range(100):
            a = random_llrv(rng, q, n_m, integer=trial % 2 == 0)
            b = random_llrv(rng, q, n_m, integer=trial % 2 == 0)
            ref = brute_combine([a, b], n_m, alg == "mm")
            assert ecn_combine(a, b, cfg, f).pairs() == ref
            assert ecn_combine(a, b, cfg, f, exhaustive=True).pairs() == ref


def test_ecn_quantized_saturates(gf8):
    cfg = DecoderConfig(n_m=4, quant_bits=3)
    a, b = L([(0, 1), (6, 2), (7, 3), (7, 4)]), L([(0, 0), (5, 5), (7, 6), (7, 7)])
    out = ecn_combine(a, b, cfg, gf8)
    assert out.penalties.max() <= 7
    assert out.is_valid()


def test_ecn_value_provenance(gf8):
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = random_llrv(rng, 8, 4), random_llrv(rng, 8, 4)
        mm = ecn_combine(a, b, DecoderConfig(algorithm="mm", n_m=4), gf8)
        raw = set(a.penalties) | set(b.penalties)
        # outputs are re-anchored at the best score, which is max(a0, b0) = 0 for valid inputs
        assert set(mm.penalties) <= raw
        ems = ecn_combine(a, b, DecoderConfig(n_m=4), gf8)
        sums = {x + y for x in a.penalties for y in b.penalties}
        assert all(any(np.isclose(p, s) for s in sums) for p in ems.penalties)


# -- check node ------------------------------------------------------------

def test_cn_pass_through(gf8):
    rng = np.random.default_rng(0)
    a, b = random_llrv(rng, 8, 4), random_llrv(rng, 8, 4)
    out = cn_process([a, b], DecoderConfig(n_m=4), gf8)
    assert out[0] == b and out[1] == a


def test_cn_certain_zeros(gf8):
    zero = L([(0.0, 0)])
    out = cn_process([zero] * 3, DecoderConfig(n_m=1), gf8)
    assert [o.pairs() for o in out] == [[(0.0, 0)]] * 3


def test_cn_single_edge(gf8):
    assert cn_process([L([(0.0, 3)])], DecoderConfig(n_m=1), gf8) == [IDENTITY]


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_cn_ems_brute_force(gf8, d):
    rng = np.random.default_rng(d)
    cfg = DecoderConfig(n_m=4, ls_cn=3)
    for _ in range(50):
        ins = [random_llrv(rng, 8, 4) for _ in range(d)]
        outs = cn_process(ins, cfg, gf8)
        for j in range(d):
            assert outs[j].pairs() == brute_combine([m for k, m in enumerate(ins) if k != j], 4, False)


@pytest.mark.parametrize("d", [3, 4, 6])
def test_cn_extrinsic(gf8, d):
    rng = np.random.default_rng(100 + d)
    for alg in ("ems", "mm"):
        cfg = DecoderConfig(algorithm=alg, n_m=4, ls_cn=2)
        for _ in range(30):
            ins = [random_llrv(rng, 8, 4) for _ in range(d)]
            base = cn_process(ins, cfg, gf8)
            for j in range(d):
                changed = list(ins)
                changed[j] = random_llrv(rng, 8, 4)
                assert cn_process(changed, cfg, gf8)[j] == base[j]


def test_cn_outputs_valid_and_quantized(gf8):
    rng = np.random.default_rng(9)
    cfg = DecoderConfig(n_m=4, quant_bits=4)
    for _ in range(50):
        ins = [Llrv.from_scores({int(i): float(rng.integers(0, 16)) for i in rng.choice(8, 4, replace=False)})
               for _ in range(4)]
        for out in cn_process(ins, cfg, gf8):
            assert out.is_valid() and len(out) == 4 and out.penalties.max() <= 15


# -- variable node ---------------------------------------------------------

def test_vn_bypass(gf8):
    prior = L([(0, 5), (1, 2), (3, 0)])
    assert vn_update(prior, [], DecoderConfig(n_m=3), gf8) == prior
    assert vn_update(prior, [], DecoderConfig(n_m=3, ls_vn=1), gf8) == prior


def test_vn_example(gf4):
    prior = L([(0, 0), (1, 1)])
    incoming = L([(0, 1), (2, 0)])
    out = vn_update(prior, [incoming], DecoderConfig(n_m=2, compensation_offset=0.0), gf4)
    assert out.pairs() == [(0, 1), (1, 0)]


def test_vn_agreement(gf8):
    out = vn_update(L([(0, 0)]), [L([(0, 0)]), L([(0, 0)])], DecoderConfig(n_m=1), gf8)
    assert out.pairs()[0][1] == 0


def test_vn_compensation(gf8):
    # symbol 6 absent from the incoming message: worst stored (4) + offset (1.5)
    prior = L([(0, 6), (1, 3)])
    incoming = L([(0, 3), (4, 1)])
    out = vn_update(prior, [incoming], DecoderConfig(n_m=3, compensation_offset=1.5), gf8)
    scores = {3: 1.0 + 0.0, 6: 0.0 + 5.5, 1: (1 + 1.5) + 4.0}
    assert out == Llrv.from_scores(scores)


def test_vn_degree_check(gf8):
    with pytest.raises(DecoderError):
        vn_update(L([(0, 0)]), [IDENTITY], DecoderConfig(n_m=1), gf8, expected_degree=3)


def test_vn_skimming(gf8):
    rng = np.random.default_rng(4)
    for _ in range(100):
        prior = random_llrv(rng, 8, 4)
        inc = [random_llrv(rng, 8, 4) for _ in range(2)]
        full = vn_update(prior, inc, DecoderConfig(n_m=4), gf8)
        # no skimming: best n_m over the union of stored symbols
        union = set(prior.indices) | {i for m in inc for i in m.indices}
        scores = {}
        for b in union:
            s = prior.as_dict().get(b, prior.penalties[-1] + 1.0)
            for m in inc:
                s += m.as_dict().get(b, m.penalties[-1] + 1.0)
            scores[int(b)] = s
        assert full == Llrv.from_scores(scores, 4)
        for ls in (1, 2, 3):
            skim = vn_update(prior, inc, DecoderConfig(n_m=4, ls_vn=ls), gf8)
            assert skim.is_valid() and len(skim) == 4
            heads = set(prior.indices[:ls]) | {i for m in inc for i in m.indices[:ls]}
            if len(heads) >= 4:
                assert set(skim.indices) <= heads


def test_posterior_examples(gf8):
    cfg = DecoderConfig(n_m=2)
    dec, score = posterior_and_decide(L([(0, 3), (1, 0)]), [L([(0, 0), (5, 3)])] * 2, cfg, gf8)
    assert dec == 0
    assert score[0] == 1 and score[3] == 10
    dec, _ = posterior_and_decide(L([(0, 2), (0, 5)]), [L([(0, 2), (0, 5)])], cfg, gf8)
    assert dec == 2
    dec, _ = posterior_and_decide(L([(0, 0), (9, 4)]), [L([(0, 7), (1, 0)])], cfg, gf8)
    assert dec == 0


# -- full decoder ----------------------------------------------------------

def test_config_validation():
    with pytest.raises(DecoderError):
        DecoderConfig(n_m=4, ls_cn=5)
    with pytest.raises(DecoderError):
        DecoderConfig(n_m=4, ls_vn=0)
    with pytest.raises(DecoderError):
        DecoderConfig(max_iter=0)
    with pytest.raises(DecoderError):
        DecoderConfig(quant_bits=1)
    assert DecoderConfig(n_m=6).ls_cn == 6


def test_decode_noiseless(gf32, code192):
    cfg = DecoderConfig(n_m=8, early_stop=True)
    pr = generate_priors(code192, ChannelConfig(float("inf"), 0.5), cfg, gf32, frame_rng(0, 0))
    res = decode(code192, pr, cfg, gf32)
    assert not res.decisions.any() and res.converged and res.iterations == 1


def test_decode_iteration_gain(gf32, code192):
    # frozen from a seeded run: one iteration leaves errors, ten clear them
    pr = generate_priors(code192, ChannelConfig(2.5, 0.5), DecoderConfig(n_m=8), gf32, frame_rng(2024, 0))
    one = decode(code192, pr, DecoderConfig(n_m=8, max_iter=1), gf32)
    ten = decode(code192, pr, DecoderConfig(n_m=8, max_iter=10), gf32)
    assert np.count_nonzero(one.decisions) == 29 and not one.converged
    assert not ten.decisions.any() and ten.converged


def test_decode_runs_fixed_iterations(gf32, code192):
    cfg = DecoderConfig(n_m=4, max_iter=7)
    pr = generate_priors(code192, ChannelConfig(6.0, 0.5), cfg, gf32, frame_rng(1, 1))
    assert decode(code192, pr, cfg, gf32).iterations == 7


def test_decode_shape_checks(gf32, gf4, code192):
    cfg = DecoderConfig(n_m=8)
    bad = Priors(np.zeros((3, 8)), np.zeros((3, 8), dtype=np.int64))
    with pytest.raises(DecoderError):
        decode(code192, bad, cfg, gf32)
    with pytest.raises(DecoderError):
        decode(code192, bad, cfg, gf4)
    with pytest.raises(DecoderError):
        decode(code192, bad, DecoderConfig(n_m=64), gf32)


def _compose_decode(h, priors, cfg, f):
    """Decoder assembled from the per-message operations."""
    edges = [(i, col, coef) for i, row in enumerate(h.rows) for col, coef in row]
    vc = {(i, col): permute(priors[col], coef, f) for i, col, coef in edges}
    cv = {}
    decisions = np.zeros(h.n, dtype=np.int64)
    for _ in range(cfg.max_iter):
        for i, row in enumerate(h.rows):
            outs = cn_process([vc[(i, c)] for c, _ in row], cfg, f)
            for (c, coef), out in zip(row, outs):
                cv[(i, c)] = inverse_permute(out, coef, f)
        for j, col in enumerate(h.columns):
            for i, coef in col:
                others = [cv[(i2, j)] for i2, _ in col if i2 != i]
                vc[(i, j)] = permute(vn_update(priors[j], others, cfg, f), coef, f)
            decisions[j], _ = posterior_and_decide(priors[j], [cv[(i2, j)] for i2, _ in col], cfg, f)
    return decisions


@pytest.mark.parametrize("alg, quant_bits, ls_cn, ls_vn", [
    ("ems", 0, 8, 8), ("ems", 6, 4, 6), ("mm", 0, 3, 5), ("mm", 5, 8, 2),
])
def test_kernel_matches_composition(gf32, code192, alg, quant_bits, ls_cn, ls_vn):
    cfg = DecoderConfig(algorithm=alg, n_m=8, quant_bits=quant_bits, ls_cn=ls_cn, ls_vn=ls_vn, max_iter=3)
    for k in range(2):
        pr = generate_priors(code192, ChannelConfig(2.0, 0.5), cfg, gf32, frame_rng(77, k))
        assert np.array_equal(decode(code192, pr, cfg, gf32).decisions, _compose_decode(code192, pr, cfg, gf32))


@pytest.mark.parametrize("alg", ["ems", "mm"])
def test_untruncated_matches_dense(gf4, toy6, alg):
    cfg = DecoderConfig(algorithm=alg, n_m=4, max_iter=4)
    rng = np.random.default_rng(5)
    for _ in range(20):
        lam = 2 * (1 + 0.9 * rng.standard_normal((toy6.n, 2))) / 0.81
        pr = priors_from_bit_llrs(lam, gf4, 4)
        dense = dense_decode(toy6, lam @ np.array([[0, 1, 0, 1], [0, 0, 1, 1]]), gf4, 4, use_max=alg == "mm")
        for it in (1, 4):
            got = decode(toy6, pr, DecoderConfig(algorithm=alg, n_m=4, max_iter=it), gf4).decisions
            assert got.tolist() == dense[it - 1].tolist()


def test_success_implies_codeword(gf32, code192):
    cfg = DecoderConfig(n_m=8, max_iter=10)
    for k in range(10):
        pr = generate_priors(code192, ChannelConfig(2.2, 0.5), cfg, gf32, frame_rng(3, k))
        res = decode(code192, pr, cfg, gf32)
        assert res.converged == is_codeword(code192, res.decisions.tolist(), gf32)


def test_quantized_decode_runs(gf32, code192):
    cfg = DecoderConfig(n_m=8, quant_bits=6, ls_cn=4, ls_vn=6)
    pr = generate_priors(code192, ChannelConfig(4.4, 0.5), cfg, gf32, frame_rng(0, 3))
    assert pr.penalties.max() <= 63
    res = decode(code192, pr, cfg, gf32)
    assert res.iterations == 10
