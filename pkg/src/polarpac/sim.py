"""Seeded Monte-Carlo link simulation, CSV reporting, CLI, and preset recipes.

Per-trial randomness comes from a counter-based Philox stream keyed by
(seed, snr_index, trial_index), so results are byte-identical for any
worker count.  Trials are dispatched in fixed-size chunks and consumed in
index order; the early-stop rule (min_errors) is evaluated at chunk
boundaries, which keeps the accepted trial set deterministic.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import AwgnChannel, awgn_llr, sigma_from_ebn0
from .codes import (DEFAULT_POLY, CodeSpec, encode, ga_profile, load_profile,
                    rm_profile)
from .decode import DecoderConfig, decode_with_counters
from .metric import (cumulative_metric_profile, expected_metric_tree,
                     sample_metric_profile, vpscl_thresholds)
from .polarize import bit_channel_stats

_CHUNK = 256


class ConfigError(ValueError):
    """Inconsistent or unusable simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    """Everything one sweep needs: code, channel grid, decoder, run control."""

    n: int
    k: int
    profile: str = "rm"                 # rm | ga | file:<path>
    poly: tuple[int, ...] = (1,)
    ebn0_db: tuple[float, ...] = (2.0,)
    mode: str = "scl"
    list_size: int = 8
    m_t: float = -math.inf
    p_th: float | None = None
    ga_ebn0_db: float = 2.5             # construction point for GA profiles
    v_ebn0_db: float = 2.5              # construction point for VPSCL variances
    mu: int = 512
    trials: int = 100_000
    min_errors: int = 200
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.ebn0_db:
            raise ConfigError("need at least one E_b/N_0 point")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass(frozen=True)
class PointReport:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    avg_sort_ops: float
    avg_node_visits: float
    avg_paths_pruned: float
    wall_time: float

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def ber(self) -> float:
        return self.bit_errors / self.frames


@dataclass
class SimReport:
    config: SimConfig
    rows: list[PointReport] = field(default_factory=list)

    def to_csv(self) -> str:
        k = self.config.k
        lines = ["ebn0_db,frames,frame_errors,fer,ber,avg_sorts,"
                 "avg_node_visits,avg_pruned"]
        for r in self.rows:
            lines.append(
                f"{r.ebn0_db:.6g},{r.frames},{r.frame_errors},"
                f"{r.fer:.6g},{r.bit_errors / (r.frames * k):.6g},"
                f"{r.avg_sort_ops:.6g},{r.avg_node_visits:.6g},"
                f"{r.avg_paths_pruned:.6g}")
        return "\n".join(lines) + "\n"


def build_spec(config: SimConfig) -> CodeSpec:
    n_len = 1 << config.n
    if config.profile == "rm":
        prof = rm_profile(config.n, config.k)
    elif config.profile == "ga":
        ch = AwgnChannel.from_ebn0(config.ga_ebn0_db, config.k / n_len)
        prof = ga_profile(config.n, config.k, ch)
    elif config.profile.startswith("file:"):
        n_file, prof = load_profile(config.profile[5:])
        if n_file != n_len:
            raise ConfigError(f"profile file is for N={n_file}, not N={n_len}")
        if len(prof) != config.k:
            raise ConfigError(f"profile file has K={len(prof)}, not K={config.k}")
    else:
        raise ConfigError(f"unknown profile source {config.profile!r}")
    return CodeSpec(config.n, config.k, prof, config.poly)


def build_decoder(config: SimConfig, spec: CodeSpec) -> DecoderConfig:
    if config.mode == "vpscl":
        if config.p_th is None:
            raise ConfigError("vpscl needs p_th")
        ch = AwgnChannel.from_ebn0(config.v_ebn0_db, spec.rate())
        stats = bit_channel_stats(ch, spec.n, config.mu)
        thresholds = vpscl_thresholds(stats, config.p_th)
        return DecoderConfig("vpscl", config.list_size, thresholds=thresholds)
    if config.mode == "pfscl":
        return DecoderConfig("pfscl", config.list_size, m_t=config.m_t)
    return DecoderConfig(config.mode, config.list_size)


def _trial_rng(seed: int, snr_index: int, trial: int):
    mix = (snr_index * 0x9E3779B97F4A7C15 + trial * 0xBF58476D1CE4E5B9
           + 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, mix], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _run_chunk(spec, dcfg, sigma, seed, snr_index, t_lo, t_hi):
    ch = AwgnChannel(sigma)
    frames = ferr = berr = 0
    sorts = visits = pruned = 0
    errs_in_order = []
    for t in range(t_lo, t_hi):
        rng = _trial_rng(seed, snr_index, t)
        d = rng.integers(0, 2, size=spec.K, dtype=np.uint8)
        x = encode(spec, d)
        y = (1.0 - 2.0 * x) + sigma * rng.standard_normal(spec.N)
        d_hat, counters = decode_with_counters(dcfg, spec, awgn_llr(y, ch))
        nbit = int(np.count_nonzero(d_hat != d))
        frames += 1
        berr += nbit
        fe = nbit > 0
        ferr += fe
        errs_in_order.append(fe)
        sorts += counters.sort_ops
        visits += counters.node_visits
        pruned += counters.paths_pruned
    return frames, ferr, berr, sorts, visits, pruned, errs_in_order


def run_point(spec: CodeSpec, dcfg: DecoderConfig, ebn0_db: float, *,
              rate: float | None = None, trials: int = 100_000,
              min_errors: int = 200, seed: int = 1, workers: int = 1,
              snr_index: int = 0) -> PointReport:
    """Simulate one SNR point until `trials` frames or `min_errors` frame errors."""
    sigma = sigma_from_ebn0(ebn0_db, spec.rate() if rate is None else rate)
    t0 = time.perf_counter()
    frames = ferr = berr = 0
    sorts = visits = pruned = 0
    bounds = [(lo, min(lo + _CHUNK, trials)) for lo in range(0, trials, _CHUNK)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, spec, dcfg, sigma, seed, snr_index,
                               lo, hi) for lo, hi in bounds]
        for fut in futures:
            f, fe, be, so, vi, pr, errs = fut.result()
            if ferr >= min_errors:
                continue  # deterministic stop at the prior chunk boundary
            frames += f
            ferr += fe
            berr += be
            sorts += so
            visits += vi
            pruned += pr
    return PointReport(ebn0_db, frames, ferr, berr,
                       sorts / frames, visits / frames, pruned / frames,
                       time.perf_counter() - t0)


def run_sweep(config: SimConfig) -> SimReport:
    """Simulate every configured SNR point with a shared spec and decoder."""
    spec = build_spec(config)
    dcfg = build_decoder(config, spec)
    report = SimReport(config)
    for idx, ebn0 in enumerate(config.ebn0_db):
        report.rows.append(run_point(
            spec, dcfg, ebn0, trials=config.trials,
            min_errors=config.min_errors, seed=config.seed,
            workers=config.workers, snr_index=idx))
    return report


def emit_csv(report: SimReport, path) -> None:
    try:
        with open(path, "w") as f:
            f.write(report.to_csv())
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e}") from e


def emit_profile_csv(path, expected_cum, sample_cum=None, sample_var=None):
    cols = ["position", "expected_cum"]
    if sample_cum is not None:
        cols.append("sample_cum")
    if sample_var is not None:
        cols.append("sample_var")
    try:
        with open(path, "w") as f:
            f.write(",".join(cols) + "\n")
            for p in range(len(expected_cum)):
                row = [str(p + 1), f"{expected_cum[p]:.6g}"]
                if sample_cum is not None:
                    row.append(f"{sample_cum[p]:.6g}")
                if sample_var is not None:
                    row.append(f"{sample_var[p]:.6g}")
                f.write(",".join(row) + "\n")
    except OSError as e:
        raise OSError(f"cannot write profile to {path}: {e}") from e


# --- preset recipes -----------------------------------------------------------

def mc_profile_path() -> str:
    """Bundled PAC(64,32) Monte-Carlo-construction rate profile."""
    from importlib.resources import files
    return str(files("polarpac").joinpath("profiles/pac64_32_mc.txt"))


def _pac6432(**kw) -> SimConfig:
    return SimConfig(n=6, k=32, profile="file:" + mc_profile_path(),
                     poly=DEFAULT_POLY, **kw)


_TABLE_GRIDS = {
    "table1": dict(base=lambda **kw: SimConfig(n=7, k=64, profile="rm",
                                               poly=DEFAULT_POLY, **kw),
                   ebn0=tuple(np.arange(0.0, 3.51, 0.5)),
                   rows=[("pfscl", 32, -10.0, None), ("pfscl", 8, -10.0, None),
                         ("vpscl", 32, None, 1e-6), ("vpscl", 8, None, 1e-6)],
                   v_ebn0=2.5),
    "table2": dict(base=lambda **kw: SimConfig(n=10, k=512, profile="ga",
                                               poly=DEFAULT_POLY, **kw),
                   ebn0=tuple(np.arange(0.0, 3.01, 0.5)),
                   rows=[("pfscl", 4, -10.0, None), ("vpscl", 4, None, 1e-6),
                         ("vpscl", 4, None, 1e-4)],
                   v_ebn0=2.5),
    "table3": dict(base=_pac6432,
                   ebn0=tuple(np.arange(0.0, 4.01, 0.5)),
                   rows=[("pfscl", 32, -10.0, None), ("pfscl", 8, -10.0, None),
                         ("vpscl", 32, None, 1e-6), ("vpscl", 8, None, 1e-6)],
                   v_ebn0=2.5),
    "table4": dict(base=lambda **kw: SimConfig(n=7, k=99, profile="rm",
                                               poly=DEFAULT_POLY, **kw),
                   ebn0=tuple(np.arange(0.0, 4.51, 0.5)),
                   rows=[("pfscl", 32, -15.0, None), ("pfscl", 8, -15.0, None),
                         ("vpscl", 32, None, 1e-6), ("vpscl", 8, None, 1e-6)],
                   v_ebn0=3.5),
}

_FER_GRIDS = {
    "fig12": ("table1", [("scl", 8, None, None), ("scl", 32, None, None),
                         ("pfscl", 8, -10.0, None), ("pfscl", 32, -10.0, None),
                         ("vpscl", 8, None, 1e-6), ("vpscl", 32, None, 1e-6)]),
    "fig13": ("table2", [("scl", 4, None, None), ("pfscl", 4, -10.0, None),
                         ("vpscl", 4, None, 1e-6), ("vpscl", 4, None, 1e-4)]),
    "fig14": ("table3", [("scl", 8, None, None), ("scl", 32, None, None),
                         ("pfscl", 8, -10.0, None), ("pfscl", 32, -10.0, None),
                         ("vpscl", 8, None, 1e-6), ("vpscl", 32, None, 1e-6)]),
    "fig15": ("table4", [("scl", 8, None, None), ("scl", 32, None, None),
                         ("pfscl", 8, -15.0, None), ("pfscl", 32, -15.0, None),
                         ("vpscl", 8, None, 1e-6), ("vpscl", 32, None, 1e-6)]),
    "fig16": ("table1", [("scl", 8, None, None), ("vpscl", 8, None, 1e-2),
                         ("vpscl", 8, None, 1e-4), ("vpscl", 8, None, 1e-6)]),
    "fig17": ("table1", [("vpscl", 8, None, 1e-2), ("vpscl", 8, None, 1e-4),
                         ("vpscl", 8, None, 1e-6)]),
}

_PROFILE_RECIPES = {
    # recipe: (config builder kwargs, operating/reporting E_b/N_0)
    "fig7": (_pac6432, 2.5),
    "fig8": (_pac6432, 2.5),
    "fig9": (lambda **kw: SimConfig(n=10, k=512, profile="ga",
                                    poly=DEFAULT_POLY, **kw), 2.5),
    "fig10": (lambda **kw: SimConfig(n=7, k=64, profile="ga",
                                     poly=DEFAULT_POLY, **kw), 2.5),
    "fig11": (lambda **kw: SimConfig(n=7, k=64, profile="rm",
                                     poly=DEFAULT_POLY, **kw), 2.5),
}

RECIPES = (["fig6"] + sorted(_PROFILE_RECIPES) + sorted(_FER_GRIDS)
           + sorted(_TABLE_GRIDS))


def _decoder_tag(mode, lsz, m_t, p_th):
    tag = f"{mode}_L{lsz}"
    if m_t is not None:
        tag += f"_mt{m_t:g}"
    if p_th is not None:
        tag += f"_pth{p_th:g}"
    return tag


def run_recipe(name: str, out_dir, *, trials: int | None = None,
               seed: int = 1, workers: int = 1, mu: int = 512,
               log=print) -> list[str]:
    """Run a preset reproduction recipe; writes CSV files into out_dir.

    Desk-scale trial counts are defaults; pass trials to override.
    Returns the paths written.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    written = []

    def emit(fname, text):
        path = os.path.join(out_dir, fname)
        with open(path, "w") as f:
            f.write(text)
        written.append(path)
        log(f"wrote {path}")

    if name == "fig6":
        # expected metric tree of the bundled PAC(64,32) profile; the node
        # means reproduce the published tree at sigma = 10^-0.2
        cfg = _pac6432(mu=mu)
        spec = build_spec(cfg)
        stats = bit_channel_stats(AwgnChannel.from_ebn0(4.0, 0.5), 6, mu)
        tree = expected_metric_tree(spec, stats)
        emit("fig6_metric_tree.csv", tree.to_csv())
        return written

    if name in _PROFILE_RECIPES:
        builder, op_ebn0 = _PROFILE_RECIPES[name]
        cfg = builder(mu=mu, seed=seed)
        spec = build_spec(cfg)
        ch = AwgnChannel.from_ebn0(op_ebn0, spec.rate())
        stats = bit_channel_stats(ch, spec.n, mu)
        expected = cumulative_metric_profile(expected_metric_tree(spec, stats))
        ntr = trials or (2000 if spec.N >= 1024 else 10_000)
        cum, var, n_ok, n_bad = sample_metric_profile(spec, ch, ntr, seed=seed,
                                                      mu=mu)
        log(f"{name}: {n_ok} correct decodes kept, {n_bad} discarded")
        lines = ["position,expected_cum,sample_cum,sample_var"]
        for p in range(spec.N):
            lines.append(f"{p + 1},{expected[p]:.6g},{cum[p]:.6g},{var[p]:.6g}")
        emit(f"{name}_metric_profile.csv", "\n".join(lines) + "\n")
        return written

    if name in _TABLE_GRIDS or name in _FER_GRIDS:
        if name in _FER_GRIDS:
            grid_name, rows = _FER_GRIDS[name]
            grid = _TABLE_GRIDS[grid_name]
        else:
            grid = _TABLE_GRIDS[name]
            rows = grid["rows"]
        ntr = trials or (2000 if name in ("table2", "fig13") else 10_000)
        for mode, lsz, m_t, p_th in rows:
            cfg = grid["base"](
                ebn0_db=grid["ebn0"], mode=mode, list_size=lsz,
                m_t=(m_t if m_t is not None else -math.inf), p_th=p_th,
                v_ebn0_db=grid["v_ebn0"], mu=mu, trials=ntr,
                min_errors=ntr + 1 if name.startswith("table") else 200,
                seed=seed, workers=workers)
            report = run_sweep(cfg)
            emit(f"{name}_{_decoder_tag(mode, lsz, m_t, p_th)}.csv",
                 report.to_csv())
        return written

    raise ConfigError(f"unknown recipe {name!r}; choose from {RECIPES}")


# --- CLI ------------------------------------------------------------------

def _parse_poly(text: str) -> tuple[int, ...]:
    bits = text.strip().lower().removeprefix("0b")
    if not bits or any(c not in "01" for c in bits):
        raise ConfigError(f"polynomial must be binary digits p_m..p_0, got {text!r}")
    return tuple(int(c) for c in reversed(bits))


def _config_from_file(path) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read([path]):
        raise ConfigError(f"cannot read config file {path}")
    out = {}
    code = cp["code"] if "code" in cp else {}
    if "n" in code:
        out["n"] = int(code["n"])
    elif "N" in code:
        out["n"] = int(math.log2(int(code["N"])))
    if "k" in code:
        out["k"] = int(code["k"])
    if "profile" in code:
        out["profile"] = code["profile"]
    if "poly" in code:
        out["poly"] = _parse_poly(code["poly"])
    if "ga_ebn0_db" in code:
        out["ga_ebn0_db"] = float(code["ga_ebn0_db"])
    chan = cp["channel"] if "channel" in cp else {}
    if "type" in chan and chan["type"].lower() != "awgn":
        raise ConfigError("only the awgn channel is simulated")
    if "ebn0_db" in chan:
        out["ebn0_db"] = tuple(float(x) for x in chan["ebn0_db"].split(","))
    dec = cp["decoder"] if "decoder" in cp else {}
    if "mode" in dec:
        out["mode"] = dec["mode"]
    if "list" in dec:
        out["list_size"] = int(dec["list"])
    if "mt" in dec:
        out["m_t"] = float(dec["mt"])
    if "pth" in dec:
        out["p_th"] = float(dec["pth"])
    if "v_ebn0_db" in dec:
        out["v_ebn0_db"] = float(dec["v_ebn0_db"])
    run = cp["run"] if "run" in cp else {}
    for key, cast in (("trials", int), ("min_errors", int), ("seed", int),
                      ("workers", int), ("mu", int)):
        if key in run:
            out[key] = cast(run[key])
    return out


def _build_parser():
    p = argparse.ArgumentParser(
        prog="polarpac",
        description="Monte-Carlo simulation of polar/PAC codes under "
                    "SC-based list decoding with metric pruning.")
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--code", help="N,K (e.g. 128,64)")
    p.add_argument("--profile", help="rm | ga | file:<path>")
    p.add_argument("--poly", help="connection polynomial bits p_m..p_0 "
                                  "(e.g. 11010001001); 1 for plain polar")
    p.add_argument("--channel", default=None, help="awgn (default)")
    p.add_argument("--ebn0", help="comma-separated E_b/N_0 list in dB")
    p.add_argument("--mode", choices=["sc", "scl", "fscl", "pfscl", "vpscl"])
    p.add_argument("--list", dest="list_size", type=int, help="list size L")
    p.add_argument("--mt", type=float, help="PFSCL metric threshold m_T")
    p.add_argument("--pth", type=float, help="VPSCL deviation probability P_th")
    p.add_argument("--trials", type=int)
    p.add_argument("--min-errors", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output CSV file (or directory for recipes)")
    p.add_argument("--recipe", help="preset run: " + ", ".join(RECIPES))
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.recipe:
            run_recipe(args.recipe, args.out or ".",
                       trials=args.trials, seed=args.seed or 1,
                       workers=args.workers or 1)
            return 0
        fields = _config_from_file(args.config) if args.config else {}
        if args.code:
            n_str, k_str = args.code.split(",")
            n_len = int(n_str)
            if n_len & (n_len - 1):
                raise ConfigError(f"N={n_len} is not a power of two")
            fields["n"] = int(math.log2(n_len))
            fields["k"] = int(k_str)
        if args.profile:
            fields["profile"] = args.profile
        if args.poly:
            fields["poly"] = _parse_poly(args.poly)
        if args.channel and args.channel.lower() != "awgn":
            raise ConfigError("only the awgn channel is simulated")
        if args.ebn0:
            fields["ebn0_db"] = tuple(float(x) for x in args.ebn0.split(","))
        for name in ("mode", "list_size", "trials", "seed", "workers"):
            val = getattr(args, name)
            if val is not None:
                fields[name] = val
        if args.mt is not None:
            fields["m_t"] = args.mt
        if args.pth is not None:
            fields["p_th"] = args.pth
        if args.min_errors is not None:
            fields["min_errors"] = args.min_errors
        if "n" not in fields or "k" not in fields:
            raise ConfigError("--code N,K (or a config file) is required")
        config = SimConfig(**fields)
        report = run_sweep(config)
    except (ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.out:
        emit_csv(report, args.out)
    else:
        sys.stdout.write(report.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
