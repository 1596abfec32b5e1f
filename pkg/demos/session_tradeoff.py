"""End-to-end sessions over BEC(0.1) / BEC(0.4): reliability against rate.

The threshold exponent beta sets how reliable a synthetic channel must be
before it carries a message bit. Larger beta tightens the threshold, which
lowers the block error rate and costs rate.
"""

from irregpolar import (ErasureChannel, build_session, leakage_upper_bound,
                        random_adversary, secrecy_capacity, simulate_session)


def main(N=256, T=4, trials=500):
    W, Wt = ErasureChannel(0.1), ErasureChannel(0.4)
    rho_r, rho_w = 0.25, 0.125
    adv = random_adversary(N, T, rho_r, rho_w, seed=0)
    print(f"secrecy capacity {secrecy_capacity(W, Wt, rho_r, rho_w):.4f}")
    print(" beta   rate    P_e    95% CI            leakage bound")
    for beta in (0.30, 0.35, 0.40, 0.45):
        cfg = build_session(W, Wt, adv, beta=beta)
        rep = simulate_session(cfg, adv, W, Wt, trials, master_seed=0)
        bound = leakage_upper_bound(cfg.wiretap_params, cfg.partitions)
        print(f" {beta:.2f}  {rep.secrecy_rate:.4f}  {rep.p_e:.3f}  "
              f"[{rep.p_e_low:.3f}, {rep.p_e_high:.3f}]  {bound:.3g}")


if __name__ == "__main__":
    main()
