"""The adversarial wiretap channel with perfect channels.

With noiseless main and wiretap channels every synthetic channel is either
perfect or useless, so the code reduces to placing message bits where the
adversary can neither read nor overwrite.
"""

from irregpolar import (build_session, degenerate_bec, leakage_upper_bound,
                        random_adversary, secrecy_capacity, secrecy_rate)


def main(N=64, rho_r=0.25, rho_w=0.125, seed=3):
    clean = degenerate_bec("eps0")
    adv = random_adversary(N, 1, rho_r, rho_w, seed)
    cfg = build_session(clean, clean, adv)
    part = cfg.partitions[0]
    print(f"read set   {sorted(adv.read_sets[0])}")
    print(f"write set  {sorted(adv.write_sets[0])}")
    print(f"message positions {len(part.info)}, frozen {len(part.frozen)}, "
          f"random {len(part.random)}, chained {len(part.chained)}")
    print(f"rate {secrecy_rate(cfg.partitions):.4f} against capacity "
          f"{secrecy_capacity(clean, clean, rho_r, rho_w):.4f}")
    print(f"leakage bound {leakage_upper_bound(cfg.wiretap_params, cfg.partitions)}")


if __name__ == "__main__":
    main()
