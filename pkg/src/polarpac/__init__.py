"""Polar/PAC coding toolkit: polarized channel construction, the
mutual-information bit-metric, fast list decoding with metric-threshold
pruning, and a reproducible Monte-Carlo harness."""

from .channel import (AwgnChannel, BecChannel, BscChannel, awgn_llr,
                      channel_iv, j_approx, j_func, k_approx, k_func,
                      metric_variance_awgn, sigma_from_ebn0)
from .codes import (DEFAULT_POLY, CodeSpec, NodeClass, ProfileError,
                    classify_tree, encode, extract, ga_profile, insert_data,
                    load_profile, polar_transform, rm_profile, save_profile,
                    toeplitz_encode, toeplitz_invert, tree_node_visits)
from .decode import (DecodeCounters, DecoderConfig, decode_with_counters,
                     fscl_decode, pfscl_decode, sc_decode, scl_decode,
                     vpscl_decode)
from .metric import (MetricNode, MetricTree, PruneThresholds, bit_metric,
                     cumulative_metric_profile, expected_metric_tree,
                     sample_metric_profile, vpscl_thresholds)
from .polarize import (BitChannelStats, ChannelTree, DiscreteChannel,
                       GaProfileState, bec_stats, bit_channel_stats,
                       degrade_merge, ga_construct, polar_minus, polar_plus,
                       quantize_awgn)
from .sim import (PointReport, SimConfig, SimReport, build_spec, emit_csv,
                  emit_profile_csv, mc_profile_path, run_point, run_recipe,
                  run_sweep)

__version__ = "0.1.0"
