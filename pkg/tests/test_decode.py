import math

import numpy as np
import pytest

import polarpac as pp
from polarpac.channel import AwgnChannel, awgn_llr, sigma_from_ebn0
from polarpac.codes import polar_transform, toeplitz_encode
from polarpac.decode import (DecoderConfig, decode_with_counters, fscl_decode,
                             pfscl_decode, sc_decode, scl_decode, vpscl_decode)
from polarpac.metric import bit_metric, vpscl_thresholds

from conftest import awgn_trial


def clean_llrs(spec, d, scale=200.0):
    x = pp.encode(spec, d)
    return (1.0 - 2.0 * x) * scale


class TestScDecode:
    def test_noiseless_round_trip(self, pac64_spec):
        rng = np.random.default_rng(0)
        for _ in range(200):
            d = rng.integers(0, 2, pac64_spec.K, dtype=np.uint8)
            assert np.array_equal(sc_decode(pac64_spec, clean_llrs(pac64_spec, d)), d)

    def test_equals_list_size_one(self, pac64_spec):
        sigma = sigma_from_ebn0(2.0, 0.5)
        rng = np.random.default_rng(1)
        for _ in range(300):
            d, llrs = awgn_trial(pac64_spec, sigma, rng)
            assert np.array_equal(sc_decode(pac64_spec, llrs),
                                  scl_decode(pac64_spec, llrs, 1))

    def test_matches_exhaustive_path_search(self):
        # polar N=8 K=4: compare against the best SC-path by total metric,
        # found by scoring all 16 codewords on the channel-level metric
        spec = pp.CodeSpec(3, 4, pp.rm_profile(3, 4))
        sigma = 0.8
        rng = np.random.default_rng(2)
        for _ in range(100):
            d, llrs = awgn_trial(spec, sigma, rng)
            # the SC output must equal one of the 16 codeword paths, and the
            # full-list decoder with L=16 must return the metric argmax
            best, best_m = None, -math.inf
            for val in range(16):
                cand = np.array([(val >> b) & 1 for b in range(4)], dtype=np.uint8)
                x = pp.encode(spec, cand)
                m = bit_metric(llrs * (1 - 2.0 * x.astype(float)), 0).sum()
                if m > best_m:
                    best, best_m = cand, m
            assert np.array_equal(scl_decode(spec, llrs, 16), best)


class TestSclDecode:
    def test_noisy_recovery_reasonable(self, pac64_spec):
        sigma = sigma_from_ebn0(3.5, 0.5)
        rng = np.random.default_rng(3)
        fe = 0
        for _ in range(300):
            d, llrs = awgn_trial(pac64_spec, sigma, rng)
            fe += not np.array_equal(scl_decode(pac64_spec, llrs, 8), d)
        assert fe / 300 < 0.05

    def test_polarized_and_penalty_metrics_keep_same_survivors(self,
                                                               pac128_64_spec):
        sigma = sigma_from_ebn0(2.0, 0.5)
        rng = np.random.default_rng(4)
        for _ in range(60):
            d, llrs = awgn_trial(pac128_64_spec, sigma, rng)
            snaps = {}

            def tr_a(i, vp):
                snaps.setdefault(i, []).append({bytes(r) for r in vp})

            scl_decode(pac128_64_spec, llrs, 8, trace=tr_a)
            scl_decode(pac128_64_spec, llrs, 8, penalty_metric=True, trace=tr_a)
            for i, pair in snaps.items():
                assert pair[0] == pair[1], f"survivor sets differ at bit {i+1}"

    def test_full_list_output(self, pac64_spec):
        sigma = sigma_from_ebn0(2.5, 0.5)
        rng = np.random.default_rng(5)
        d, llrs = awgn_trial(pac64_spec, sigma, rng)
        data, carriers, metrics = scl_decode(pac64_spec, llrs, 8, full=True)
        assert len(carriers) == len(metrics) == 8
        best = carriers[np.argmax(metrics)]
        assert np.array_equal(data, best[pac64_spec.info_mask])
        # frozen carrier positions stay zero on every path
        assert not carriers[:, ~pac64_spec.info_mask].any()


class TestFsclEquivalence:
    @pytest.mark.parametrize("list_size", [1, 2, 8, 32])
    def test_pac64(self, pac64_spec, list_size):
        self._check(pac64_spec, list_size, 2.5, 150)

    @pytest.mark.parametrize("list_size", [8, 32])
    def test_pac128_64(self, pac128_64_spec, list_size):
        self._check(pac128_64_spec, list_size, 1.5, 100)

    @pytest.mark.parametrize("list_size", [8])
    def test_pac128_99(self, pac128_99_spec, list_size):
        self._check(pac128_99_spec, list_size, 3.0, 100)

    def test_plain_polar(self):
        spec = pp.CodeSpec(6, 32, pp.rm_profile(6, 32))
        self._check(spec, 8, 2.0, 150)

    @staticmethod
    def _check(spec, L, ebn0, trials):
        sigma = sigma_from_ebn0(ebn0, spec.rate())
        rng = np.random.default_rng(6)
        for _ in range(trials):
            d, llrs = awgn_trial(spec, sigma, rng)
            want = (sc_decode(spec, llrs) if L == 1
                    else scl_decode(spec, llrs, L))
            assert np.array_equal(fscl_decode(spec, llrs, L), want)

    def test_node_visits_structural(self, pac64_spec):
        sigma = sigma_from_ebn0(2.5, 0.5)
        rng = np.random.default_rng(7)
        cfg = DecoderConfig("fscl", 8)
        for _ in range(20):
            d, llrs = awgn_trial(pac64_spec, sigma, rng)
            _, counters = decode_with_counters(cfg, pac64_spec, llrs)
            assert counters.node_visits == 22

    def test_scl_node_visits(self, pac64_spec):
        sigma = sigma_from_ebn0(2.5, 0.5)
        rng = np.random.default_rng(8)
        d, llrs = awgn_trial(pac64_spec, sigma, rng)
        _, counters = decode_with_counters(DecoderConfig("scl", 8),
                                           pac64_spec, llrs)
        assert counters.node_visits == 2 * 64 - 2


class TestPfscl:
    def test_no_threshold_equals_fscl(self, pac64_spec):
        sigma = sigma_from_ebn0(2.0, 0.5)
        rng = np.random.default_rng(9)
        for _ in range(100):
            d, llrs = awgn_trial(pac64_spec, sigma, rng)
            assert np.array_equal(pfscl_decode(pac64_spec, llrs, 8, -math.inf),
                                  fscl_decode(pac64_spec, llrs, 8))

    def test_sorting_monotone_in_threshold(self, pac64_spec):
        sigma = sigma_from_ebn0(2.5, 0.5)
        rng_seeds = range(60)
        avg = {}
        for m_t in (-math.inf, -20.0, -10.0, -5.0):
            tot = 0
            for s in rng_seeds:
                rng = np.random.default_rng(s)
                d, llrs = awgn_trial(pac64_spec, sigma, rng)
                cfg = DecoderConfig("pfscl", 8, m_t=m_t)
                _, counters = decode_with_counters(cfg, pac64_spec, llrs)
                tot += counters.sort_ops
            avg[m_t] = tot / 60
        assert avg[-math.inf] >= avg[-20.0] >= avg[-10.0] >= avg[-5.0]

    def test_prune_counter_active(self, pac64_spec):
        sigma = sigma_from_ebn0(3.0, 0.5)
        rng = np.random.default_rng(10)
        d, llrs = awgn_trial(pac64_spec, sigma, rng)
        _, counters = decode_with_counters(DecoderConfig("pfscl", 8, m_t=-5.0),
                                           pac64_spec, llrs)
        assert counters.paths_pruned > 0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DecoderConfig("pfscl", 8, m_t=1.0)  # threshold must be negative
        with pytest.raises(ValueError):
            DecoderConfig("nonsense", 8)
        DecoderConfig("pfscl", 8, m_t=-math.inf)  # unpruned form is valid


class TestVpscl:
    def test_with_huge_thresholds_equals_scl(self, pac64_spec, stats64_25db):
        thr = vpscl_thresholds(stats64_25db, 0.999)
        loose = pp.PruneThresholds(m_i=thr.m_i + 1e9, p_th=thr.p_th)
        sigma = sigma_from_ebn0(2.0, 0.5)
        rng = np.random.default_rng(11)
        for _ in range(50):
            d, llrs = awgn_trial(pac64_spec, sigma, rng)
            assert np.array_equal(vpscl_decode(pac64_spec, llrs, 8, loose),
                                  scl_decode(pac64_spec, llrs, 8))

    def test_sorting_reduced_vs_scl(self, pac64_spec, stats64_25db):
        thr = vpscl_thresholds(stats64_25db, 1e-6)
        sigma = sigma_from_ebn0(2.5, 0.5)
        rng = np.random.default_rng(12)
        s_scl = s_vp = 0
        for _ in range(80):
            d, llrs = awgn_trial(pac64_spec, sigma, rng)
            _, c1 = decode_with_counters(DecoderConfig("scl", 8), pac64_spec, llrs)
            _, c2 = decode_with_counters(
                DecoderConfig("vpscl", 8, thresholds=thr), pac64_spec, llrs)
            s_scl += c1.sort_ops
            s_vp += c2.sort_ops
        assert s_vp < s_scl

    def test_zero_thresholds_degrade_fer(self, pac64_spec):
        # all-zero m_i prunes every negative-metric branch; at 1 dB this
        # costs measurable frame errors versus plain list decoding
        zero = pp.PruneThresholds(m_i=np.zeros(64), p_th=0.999)
        sigma = sigma_from_ebn0(1.0, 0.5)
        rng = np.random.default_rng(13)
        fe_scl = fe_vp = 0
        for _ in range(400):
            d, llrs = awgn_trial(pac64_spec, sigma, rng)
            fe_scl += not np.array_equal(scl_decode(pac64_spec, llrs, 8), d)
            fe_vp += not np.array_equal(vpscl_decode(pac64_spec, llrs, 8, zero), d)
        assert fe_vp > fe_scl * 1.5

    def test_sc_mode_counts_no_sorts(self, pac64_spec):
        sigma = sigma_from_ebn0(2.5, 0.5)
        rng = np.random.default_rng(14)
        d, llrs = awgn_trial(pac64_spec, sigma, rng)
        _, counters = decode_with_counters(DecoderConfig("sc"), pac64_spec, llrs)
        assert counters.sort_ops == 0

    def test_scl_sort_count_bounded_by_k(self, pac128_64_spec):
        sigma = sigma_from_ebn0(2.0, 0.5)
        rng = np.random.default_rng(15)
        for _ in range(10):
            d, llrs = awgn_trial(pac128_64_spec, sigma, rng)
            _, counters = decode_with_counters(DecoderConfig("scl", 32),
                                               pac128_64_spec, llrs)
            assert counters.sort_ops <= 64
