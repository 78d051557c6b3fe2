import math
import os

import numpy as np
import pytest

import polarpac as pp
from polarpac.decode import DecoderConfig
from polarpac.sim import (ConfigError, SimConfig, _config_from_file,
                          _parse_poly, build_spec, emit_csv, emit_profile_csv,
                          main, run_point, run_sweep)


def small_config(**kw):
    base = dict(n=4, k=8, profile="rm", poly=(1, 1, 0, 1),
                ebn0_db=(3.0,), mode="scl", list_size=4,
                trials=400, min_errors=10**9, seed=5, workers=1)
    base.update(kw)
    return SimConfig(**base)


class TestRunPoint:
    def test_noiseless_emulation_zero_fer(self, pac64_spec):
        r = run_point(pac64_spec, DecoderConfig("scl", 2), 40.0,
                      trials=1000, min_errors=10**9, seed=1)
        assert r.frame_errors == 0
        assert r.frames == 1000

    def test_counters_are_exact_averages(self, pac64_spec):
        r = run_point(pac64_spec, DecoderConfig("fscl", 4), 2.0,
                      trials=200, min_errors=10**9, seed=2)
        assert r.avg_node_visits == pytest.approx(22.0, abs=1e-12)

    def test_min_errors_stop(self, pac64_spec):
        r = run_point(pac64_spec, DecoderConfig("scl", 2), 0.0,
                      trials=100_000, min_errors=20, seed=3)
        assert r.frames < 100_000
        assert r.frame_errors >= 20

    def test_fer_matches_exhaustive_bsc_oracle(self):
        # N=8 single-path decode on a BSC-like hard-decision channel; the
        # exact FER is computable by enumerating all 2^8 error patterns
        spec = pp.CodeSpec(3, 4, pp.rm_profile(3, 4))
        delta = 0.04
        big = 50.0
        fe_prob = 0.0
        for pattern in range(256):
            flips = np.array([(pattern >> b) & 1 for b in range(8)],
                             dtype=np.uint8)
            w = int(flips.sum())
            prob = delta**w * (1 - delta) ** (8 - w)
            llrs = big * (1 - 2.0 * flips.astype(float))
            ok = np.array_equal(pp.sc_decode(spec, llrs),
                                np.zeros(4, dtype=np.uint8))
            fe_prob += prob * (not ok)
        # simulate the same channel by thresholding AWGN-free BSC draws
        rng = np.random.default_rng(4)
        trials = 30_000
        fe = 0
        for _ in range(trials):
            flips = (rng.random(8) < delta).astype(np.uint8)
            llrs = big * (1 - 2.0 * flips.astype(float))
            fe += not np.array_equal(pp.sc_decode(spec, llrs),
                                     np.zeros(4, dtype=np.uint8))
        se = math.sqrt(fe_prob * (1 - fe_prob) / trials)
        assert abs(fe / trials - fe_prob) < 3 * se + 1e-9


class TestDeterminism:
    def test_same_seed_identical_csv(self):
        cfg = small_config()
        a = run_sweep(cfg).to_csv()
        b = run_sweep(cfg).to_csv()
        assert a == b

    def test_worker_count_invariance(self):
        a = run_sweep(small_config(workers=1)).to_csv()
        b = run_sweep(small_config(workers=8)).to_csv()
        assert a == b

    def test_worker_invariance_with_early_stop(self):
        a = run_sweep(small_config(ebn0_db=(0.0,), min_errors=25,
                                   trials=50_000, workers=1)).to_csv()
        b = run_sweep(small_config(ebn0_db=(0.0,), min_errors=25,
                                   trials=50_000, workers=4)).to_csv()
        assert a == b

    def test_different_seeds_differ(self):
        a = run_sweep(small_config(seed=5)).to_csv()
        b = run_sweep(small_config(seed=6)).to_csv()
        assert a != b


class TestCsv:
    def test_header_and_roundtrip(self, tmp_path):
        cfg = small_config(ebn0_db=(1.0, 3.0))
        report = run_sweep(cfg)
        path = tmp_path / "out.csv"
        emit_csv(report, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ("ebn0_db,frames,frame_errors,fer,ber,avg_sorts,"
                            "avg_node_visits,avg_pruned")
        assert len(lines) == 3
        for ln, row in zip(lines[1:], report.rows):
            f = ln.split(",")
            assert float(f[0]) == row.ebn0_db
            assert int(f[1]) == row.frames
            assert float(f[3]) == pytest.approx(row.fer, rel=1e-5)

    def test_empty_report_header_only(self, tmp_path):
        report = pp.SimReport(small_config())
        path = tmp_path / "empty.csv"
        emit_csv(report, path)
        assert path.read_text().strip().splitlines() == [
            "ebn0_db,frames,frame_errors,fer,ber,avg_sorts,"
            "avg_node_visits,avg_pruned"]

    def test_unwritable_path_raises_with_context(self):
        with pytest.raises(OSError, match="no/such/dir"):
            emit_csv(pp.SimReport(small_config()), "/no/such/dir/x.csv")

    def test_profile_csv(self, tmp_path):
        path = tmp_path / "prof.csv"
        emit_profile_csv(path, np.array([0.5, 1.0]), np.array([0.4, 0.9]),
                         np.array([0.01, 0.02]))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "position,expected_cum,sample_cum,sample_var"
        assert lines[1].startswith("1,0.5,0.4,")


class TestConfig:
    def test_poly_parse(self):
        assert _parse_poly("11010001001") == pp.DEFAULT_POLY
        assert _parse_poly("1") == (1,)
        with pytest.raises(ConfigError):
            _parse_poly("10a1")

    def test_file_parse_and_override(self, tmp_path):
        path = tmp_path / "sim.ini"
        path.write_text("""
[code]
N = 64
k = 32
profile = rm
poly = 11010001001

[channel]
ebn0_db = 1.0,2.0

[decoder]
mode = pfscl
list = 8
mt = -10

[run]
trials = 50
seed = 9
""")
        fields = _config_from_file(path)
        cfg = SimConfig(**fields)
        assert cfg.n == 6 and cfg.k == 32
        assert cfg.mode == "pfscl" and cfg.m_t == -10.0
        assert cfg.ebn0_db == (1.0, 2.0)

    def test_build_spec_profile_file(self, tmp_path):
        cfg = SimConfig(n=6, k=32, profile="file:" + pp.mc_profile_path(),
                        ebn0_db=(2.0,))
        spec = build_spec(cfg)
        assert spec.K == 32

    def test_mismatched_profile_file(self, tmp_path):
        cfg = SimConfig(n=5, k=16, profile="file:" + pp.mc_profile_path(),
                        ebn0_db=(2.0,))
        with pytest.raises(ConfigError):
            build_spec(cfg)

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            SimConfig(n=4, k=8, trials=0)
        with pytest.raises(ConfigError):
            SimConfig(n=4, k=8, ebn0_db=())


class TestCli:
    def test_basic_run_to_csv(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        rc = main(["--code", "16,8", "--profile", "rm", "--poly", "1101",
                   "--ebn0", "3.0", "--mode", "scl", "--list", "4",
                   "--trials", "200", "--min-errors", "1000000",
                   "--seed", "3", "--out", str(out)])
        assert rc == 0
        assert out.read_text().startswith("ebn0_db,")

    def test_stdout_when_no_out(self, capsys):
        rc = main(["--code", "16,8", "--profile", "rm", "--ebn0", "3.0",
                   "--mode", "sc", "--trials", "100",
                   "--min-errors", "1000000", "--seed", "3"])
        assert rc == 0
        assert capsys.readouterr().out.startswith("ebn0_db,")

    def test_config_error_exit_code(self, capsys):
        assert main(["--code", "15,8", "--ebn0", "1.0"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_code_is_error(self, capsys):
        assert main(["--ebn0", "1.0"]) == 2

    def test_vpscl_requires_pth(self, capsys):
        rc = main(["--code", "16,8", "--profile", "rm", "--ebn0", "1.0",
                   "--mode", "vpscl", "--trials", "10"])
        assert rc == 2

    def test_recipe_fig6(self, tmp_path):
        rc = main(["--recipe", "fig6", "--out", str(tmp_path)])
        assert rc == 0
        path = tmp_path / "fig6_metric_tree.csv"
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "node_id,depth,start,end,kind,mean,variance"
        root = lines[1].split(",")
        assert float(root[5]) == pytest.approx(0.7944, abs=0.01)

    def test_unknown_recipe(self, capsys):
        assert main(["--recipe", "nope", "--out", "/tmp"]) == 2
