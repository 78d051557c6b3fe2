import numpy as np
import pytest

import polarpac as pp


def awgn_trial(spec, sigma, rng):
    """One transmission: returns (data, channel llrs)."""
    d = rng.integers(0, 2, size=spec.K, dtype=np.uint8)
    x = pp.encode(spec, d)
    y = (1.0 - 2.0 * x) + sigma * rng.standard_normal(spec.N)
    return d, pp.awgn_llr(y, pp.AwgnChannel(sigma))


@pytest.fixture(scope="session")
def pac64_spec():
    n_len, prof = pp.load_profile(pp.mc_profile_path())
    assert n_len == 64
    return pp.CodeSpec(6, 32, prof, pp.DEFAULT_POLY)


@pytest.fixture(scope="session")
def pac128_64_spec():
    return pp.CodeSpec(7, 64, pp.rm_profile(7, 64), pp.DEFAULT_POLY)


@pytest.fixture(scope="session")
def pac128_99_spec():
    return pp.CodeSpec(7, 99, pp.rm_profile(7, 99), pp.DEFAULT_POLY)


@pytest.fixture(scope="session")
def stats64_25db():
    """Quantized construction for N=64 at E_b/N_0 = 2.5 dB, R = 1/2."""
    return pp.bit_channel_stats(pp.AwgnChannel.from_ebn0(2.5, 0.5), 6, 512)


@pytest.fixture(scope="session")
def stats64_fig_tree():
    """Construction at sigma = 10^-0.2, the operating point whose polarized
    mutual informations match the published PAC(64,32) metric tree."""
    return pp.bit_channel_stats(pp.AwgnChannel(10 ** -0.2), 6, 512)
