import dataclasses

import numpy as np
import pytest

from irregpolar.awtc import AdversarySpec, random_adversary, secrecy_capacity
from irregpolar.channels import ErasureChannel, bhattacharyya, bsc, capacity
from irregpolar.metrics import (BudgetError, SimReport, brute_force_synth, leakage_exact_small,
                                leakage_upper_bound, secrecy_rate, simulate_session,
                                wilson_interval)
from irregpolar.polarize import SynthChannelParams, construct
from irregpolar.secure_code import IndexPartition, SessionConfig, build_session

from conftest import random_channel


def _part(N, info, frozen=(), random=(), chained=(), relay=()):
    return IndexPartition(N, frozenset(info), frozenset(frozen), frozenset(random),
                          frozenset(chained), frozenset(relay))


def test_wilson_interval():
    lo, hi = wilson_interval(0, 1000)
    assert lo == 0.0 and 0.003 < hi < 0.004
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)


def test_secrecy_rate_examples():
    N = 8
    empty = _part(N, [], frozen=range(N))
    assert secrecy_rate([empty, empty]) == 0.0
    one = _part(N, [1, 2, 3], frozen=[0, 4, 5, 6, 7])
    assert secrecy_rate([one]) == 3 / 8
    a = _part(N, [1, 2, 3], frozen=[0, 4, 5, 6], relay=[3], random=[7])
    b = _part(N, [1, 2], frozen=[0, 4, 5, 6], chained=[7], random=[3])
    assert secrecy_rate([a, b]) == (2 + 2) / 16


def test_secrecy_rate_noiseless_large_block():
    clean = ErasureChannel(0.0)
    adv = random_adversary(1024, 1, 0.25, 0.25, seed=0)
    cfg = build_session(clean, clean, adv)
    assert abs(secrecy_rate(cfg.partitions) - 0.5) < 0.05


def test_leakage_upper_bound_examples():
    clean = ErasureChannel(0.0)
    adv = random_adversary(64, 2, 0.25, 0.25, seed=1)
    cfg = build_session(clean, clean, adv)
    assert leakage_upper_bound(cfg.wiretap_params, cfg.partitions) == 0.0
    params = SynthChannelParams(np.full(4, 0.5), np.full(4, 0.5), "bec_exact")
    assert leakage_upper_bound(params, [_part(4, [], random=range(4))]) == 0.0
    merged = SynthChannelParams(np.array([0.6, 1.0, 1.0, 0.0]), np.zeros(4), "merge")
    got = leakage_upper_bound(merged, [_part(4, [0, 1], frozen=[2], random=[3])])
    assert got == pytest.approx(0.8)


def test_leakage_upper_bound_large_bec_profile():
    adv = random_adversary(1024, 1, 0.25, 0.125, seed=0)
    cfg = build_session(ErasureChannel(0.1), ErasureChannel(0.4), adv)
    bound = leakage_upper_bound(cfg.wiretap_params, cfg.partitions)
    delta = 2.0 ** -(1024 ** 0.3)
    part = cfg.partitions[0]
    # every counted index has Z >= 1 - delta, hence I <= delta for erasures
    assert 0.0 < bound <= len(part.info | part.frozen) * delta
    assert bound <= 1024 * delta


def _tiny_config(W_tilde, rho_r, seed=3):
    adv = random_adversary(4, 1, rho_r, 0.0, seed)
    return adv, build_session(ErasureChannel(0.0), W_tilde, adv)


def test_leakage_exact_noiseless_wiretap_is_zero():
    for seed in range(5):
        adv, cfg = _tiny_config(ErasureChannel(0.0), 0.5, seed)
        assert cfg.partitions[0].n_message > 0
        assert leakage_exact_small(ErasureChannel(0.0), adv, cfg) == 0.0


def test_leakage_exact_below_bound():
    for seed in range(5):
        Wt = ErasureChannel(0.5)
        adv, cfg = _tiny_config(Wt, 0.5, seed)
        exact = leakage_exact_small(Wt, adv, cfg)
        assert 0.0 <= exact <= leakage_upper_bound(cfg.wiretap_params, cfg.partitions) + 1e-9


def test_leakage_exact_without_message():
    adv = random_adversary(4, 1, 0.5, 0.0, 0)
    cfg = SessionConfig(4, (_part(4, [], frozen=[0, 1], random=[2, 3]),))
    assert leakage_exact_small(bsc(0.1), adv, cfg) == 0.0


def test_leakage_exact_against_direct_formula():
    # one message bit, no randomness: Eve sees u0 through x0 = u0 ^ u1 ... with
    # u1 frozen to 0 and a single read position, I(M;Z) = I(BEC) = 1 - eps
    adv = AdversarySpec(2, 0.5, 0.0, ([0],), ([],))
    cfg = SessionConfig(2, (_part(2, [0], frozen=[1]),))
    assert leakage_exact_small(ErasureChannel(0.3), adv, cfg) == pytest.approx(0.7)


def test_leakage_exact_refuses_large_instances():
    adv = random_adversary(16, 1, 0.5, 0.0, 0)
    cfg = build_session(ErasureChannel(0.0), ErasureChannel(0.0), adv)
    with pytest.raises(BudgetError):
        leakage_exact_small(ErasureChannel(0.0), adv, cfg)
    adv2 = random_adversary(4, 2, 0.5, 0.0, 0)
    cfg2 = build_session(ErasureChannel(0.0), ErasureChannel(0.0), adv2)
    with pytest.raises(ValueError):
        leakage_exact_small(ErasureChannel(0.0), adv2, cfg2)


def test_brute_force_examples():
    a, b = 0.3, 0.6
    ch = brute_force_synth([ErasureChannel(a), ErasureChannel(b)], 0)
    assert bhattacharyya(ch) == pytest.approx(a + b - a * b, abs=1e-12)
    clean = ErasureChannel(0.0)
    for i in (0, 1):
        assert capacity(brute_force_synth([clean, clean], i)) == pytest.approx(1.0)
    labelled = brute_force_synth([clean, clean], 1)
    assert labelled.outputs[0] == ((0, 0), (0,))


@pytest.mark.parametrize("N", [2, 4, 8])
def test_brute_force_matches_exact_construction(N):
    rng = np.random.default_rng(N)
    leaves = [random_channel(rng) for _ in range(N)]
    params = construct(leaves, "exact")
    for i in range(N):
        ch = brute_force_synth(leaves, i)
        assert bhattacharyya(ch) == pytest.approx(params.z[i], abs=1e-9)
        assert capacity(ch) == pytest.approx(params.i_cap[i], abs=1e-9)


def test_exact_channels_equal_oracle_up_to_relabeling():
    leaves = [ErasureChannel(0.2), bsc(0.1), ErasureChannel(0.5), bsc(0.3)]
    params = construct(leaves, "exact", lossless=False)
    for i in range(4):
        ours = params.exact_channels[i].p
        oracle = brute_force_synth(leaves, i).p

        def rows(p):
            cols = p[:, (p[0] + p[1]) > 0].T
            return cols[np.lexsort(cols.T[::-1])]
        np.testing.assert_allclose(rows(ours), rows(oracle), atol=1e-9)


def test_brute_force_budget():
    with pytest.raises(BudgetError):
        brute_force_synth([ErasureChannel(0.1)] * 16, 0)
    with pytest.raises(IndexError):
        brute_force_synth([ErasureChannel(0.1)] * 4, 4)


def test_simulate_noiseless_has_no_errors():
    clean = ErasureChannel(0.0)
    adv = random_adversary(64, 2, 0.25, 0.0, seed=0)
    cfg = build_session(clean, clean, adv)
    rep = simulate_session(cfg, adv, clean, clean, 50, master_seed=1)
    assert rep.session_errors == 0 and rep.block_errors == 0 and rep.p_e == 0.0


def test_simulate_is_deterministic_across_threads_and_chunks():
    W, Wt = ErasureChannel(0.05), ErasureChannel(0.05)
    adv = random_adversary(64, 3, 0.5, 0.3, seed=4)
    cfg = build_session(W, Wt, adv)
    assert any(p.relay for p in cfg.partitions)
    a = simulate_session(cfg, adv, W, Wt, 300, 9, threads=1)
    b = simulate_session(cfg, adv, W, Wt, 300, 9, threads=3, chunk=37)
    assert a.csv_row() == b.csv_row()
    c = simulate_session(cfg, adv, W, Wt, 300, 10)
    assert c.csv_row() != a.csv_row() or c.session_errors == a.session_errors


def test_simulate_rejects_mismatched_adversary():
    W = ErasureChannel(0.1)
    adv = random_adversary(64, 1, 0.25, 0.0, seed=0)
    cfg = build_session(W, W, adv)
    with pytest.raises(ValueError):
        simulate_session(cfg, random_adversary(32, 1, 0.25, 0.0, 0), W, W, 10)
    with pytest.raises(ValueError):
        simulate_session(cfg, adv, W, W, 0)


def test_report_invariants_and_serialization():
    W, Wt = bsc(0.02), bsc(0.2)
    adv = random_adversary(64, 2, 0.25, 0.125, seed=2)
    cfg = build_session(W, Wt, adv, mu=16)
    rep = simulate_session(cfg, adv, W, Wt, 100, 0)
    assert 0 <= rep.p_e_low <= rep.p_e <= rep.p_e_high <= 1
    assert rep.leakage_bound >= 0 and rep.secrecy_rate <= 1
    row = rep.csv_row()
    assert "runtime_s" not in row and row["master_seed"] == 0
    assert "session errors" in rep.summary()
    assert dataclasses.is_dataclass(SimReport)


@pytest.mark.slow
def test_half_size_run_is_consistent():
    W, Wt = ErasureChannel(0.1), ErasureChannel(0.4)
    adv = random_adversary(64, 2, 0.25, 0.125, seed=0)
    cfg = build_session(W, Wt, adv)
    full = simulate_session(cfg, adv, W, Wt, 10_000, 5)
    half = simulate_session(cfg, adv, W, Wt, 5_000, 6)
    assert half.p_e_low <= full.p_e <= half.p_e_high


def test_measured_rate_below_capacity_plus_slack():
    W, Wt = ErasureChannel(0.1), ErasureChannel(0.4)
    for N in (256, 1024):
        adv = random_adversary(N, 2, 0.25, 0.125, seed=N)
        cfg = build_session(W, Wt, adv)
        assert secrecy_rate(cfg.partitions) <= secrecy_capacity(W, Wt, 0.25, 0.125) + 0.05
