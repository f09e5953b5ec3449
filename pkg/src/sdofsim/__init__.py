"""Secure-DoF simulator for the blind multi-eavesdropper MIMO wiretap channel
with delayed legitimate-receiver CSIT."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .model import (AntennaConfig, ChannelRealization, apply_channel,  # noqa: E402
                    generate_channel, stack_block_diagonal, trial_rng)
from .sdof import (SdofResult, comparison_table, compute_prior_achievable,  # noqa: E402
                   compute_reference_sdof, compute_sdof, table1, table2)
from .encoder import (TwoPhasePlan, build_noise_selector,  # noqa: E402
                      build_phase2_precoder, encode_case_a, encode_two_phase)
from .receiver import (decode_case_a, decode_legitimate, leakage_dof,  # noqa: E402
                       logdet_dof_slope, numeric_rank, secrecy_rank_check)
