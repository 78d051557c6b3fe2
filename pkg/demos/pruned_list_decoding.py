"""Sorting-operation reduction from metric-threshold pruning.

Runs the bundled PAC(64,32) code under plain list decoding, the fast
decoder, the constant-threshold pruned fast decoder (PFSCL), and the
varentropy-threshold pruned decoder (VPSCL), and reports frame error rates
and the average number of sorting operations per decoded frame.  Desk
scale: a few thousand frames per point.
"""

import numpy as np

from polarpac import (AwgnChannel, CodeSpec, DEFAULT_POLY, DecoderConfig,
                      bit_channel_stats, load_profile, mc_profile_path,
                      run_point, vpscl_thresholds)

spec = CodeSpec(6, 32, load_profile(mc_profile_path())[1], DEFAULT_POLY)
stats = bit_channel_stats(AwgnChannel.from_ebn0(2.5, 0.5), 6, 512)
thresholds = vpscl_thresholds(stats, 1e-6)

configs = {
    "SCL  L=8": DecoderConfig("scl", 8),
    "FSCL L=8": DecoderConfig("fscl", 8),
    "PFSCL L=8 mT=-10": DecoderConfig("pfscl", 8, m_t=-10.0),
    "VPSCL L=8 Pth=1e-6": DecoderConfig("vpscl", 8, thresholds=thresholds),
}

trials = 4000
print(f"{'decoder':>20} {'Eb/N0':>6} {'FER':>9} {'sorts':>7} {'visits':>7}")
for ebn0 in (1.0, 2.5, 4.0):
    for name, cfg in configs.items():
        r = run_point(spec, cfg, ebn0, trials=trials, min_errors=10**9, seed=3)
        print(f"{name:>20} {ebn0:6.1f} {r.fer:9.4f} {r.avg_sort_ops:7.2f} "
              f"{r.avg_node_visits:7.1f}")
    print()
