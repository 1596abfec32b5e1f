"""Irregular channel polarization and secure polar coding for the static
adversarial wiretap channel."""

from .awtc import (AdversarySpec, EquivalentChannels, apply_read, apply_rewrite,
                   equivalent_channels, equivalent_main, equivalent_wiretap,
                   random_adversary, secrecy_capacity, special_cases)
from .channels import (ERASURE, AlphabetMismatchError, ChannelStats, DiscreteChannel,
                       ErasureChannel, bhattacharyya, bsc, capacity, cascade,
                       degenerate_bec, stats)
from .metrics import (BudgetError, SimReport, brute_force_synth, leakage_exact_small,
                      leakage_upper_bound, secrecy_rate, simulate_session)
from .polarize import (ChannelArray, ConstructionError, PolarizedSets, SynthChannelParams,
                       bec_recursion, construct, kernel_minus, kernel_plus,
                       polarized_sets, selected_z_sum)
from .secure_code import (ChainError, IndexPartition, SessionConfig, SessionState,
                          build_session, chain_plan, encode_block, gn_transform,
                          partition, sc_decode_block)

__version__ = "0.1.0"
