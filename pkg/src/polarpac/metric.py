"""The polarized bit-metric, expected metric trees, metric profiles, and
varentropy-based pruning thresholds.

The per-decision metric is phi = 1 - log2(1 + 2^(-L (-1)^u)) for a base-2
LLR L and hypothesis bit u.  Its mean over the channel ensemble is the
mutual information of the synthesized channel at that tree depth, and its
variance is the channel varentropy, so the same formula scores decisions
at every level of the polarization tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LN2
from .codes import CodeSpec, classify_tree, polar_transform, toeplitz_encode
from .polarize import ChannelTree


def _log1p2(z):
    """log2(1 + 2^z) for z <= 0, vectorized and overflow-free."""
    return np.log1p(np.exp2(z)) / LN2


def bit_metric(llr, u):
    """phi(u; L) = 1 - log2(1 + 2^(-L (-1)^u)), numerically stable.

    Vectorized over both arguments; u is 0/1.  The value is at most 1,
    reached only for infinitely reliable agreeing LLRs.
    """
    llr = np.asarray(llr, dtype=float)
    u = np.asarray(u)
    z = np.where(u == 0, llr, -llr)
    out = np.where(z >= 0, 1.0 - _log1p2(-np.abs(z)), 1.0 + z - _log1p2(-np.abs(z)))
    # exact zero LLR gives phi = 1 - log2(2) = 0 for either hypothesis
    return float(out) if out.ndim == 0 else out


def phi_of_abs(mag):
    """phi of an agreeing decision: 1 - log2(1 + 2^(-|L|)), |L| >= 0."""
    return 1.0 - _log1p2(-np.asarray(mag, dtype=float))


def phi_wrong(mag):
    """phi of a disagreeing decision: 1 - |L| - log2(1 + 2^(-|L|))."""
    mag = np.asarray(mag, dtype=float)
    return 1.0 - mag - _log1p2(-mag)


@dataclass(frozen=True)
class MetricNode:
    """One pruned-tree node: segment [start, end] is 1-based inclusive."""

    node_id: int
    depth: int
    start: int
    end: int
    kind: str
    mean: float
    variance: float

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class MetricTree:
    """Expected metric mean/variance at every node of the pruned decoding tree."""

    nodes: tuple[MetricNode, ...]

    def frontier(self) -> list[MetricNode]:
        return [nd for nd in self.nodes if nd.kind != "Internal"]

    def root(self) -> MetricNode:
        return self.nodes[0]

    def to_csv(self) -> str:
        lines = ["node_id,depth,start,end,kind,mean,variance"]
        for nd in self.nodes:
            lines.append(f"{nd.node_id},{nd.depth},{nd.start},{nd.end},"
                         f"{nd.kind},{nd.mean:.6g},{nd.variance:.6g}")
        return "\n".join(lines) + "\n"


def expected_metric_tree(spec: CodeSpec, stats: ChannelTree) -> MetricTree:
    """Fill the pruned decoding tree of a code with polarized (mean, variance).

    stats must be a ChannelTree at the construction channel, deep enough to
    cover the classification frontier.
    """
    frontier = {(node.start, node.end): node.kind for node in classify_tree(spec)}
    need_depth = max(spec.n - int(math.log2(nd.length))
                     for nd in classify_tree(spec)) if frontier else 0
    if stats.depth < need_depth:
        raise ValueError(f"stats depth {stats.depth} < required depth {need_depth}")

    nodes: list[MetricNode] = []

    def rec(depth: int, start0: int, length: int) -> None:
        key = (start0 + 1, start0 + length)
        kind = frontier.get(key, "Internal")
        mean, var = stats.node(depth, start0 // length)
        nodes.append(MetricNode(len(nodes), depth, key[0], key[1], kind, mean, var))
        if kind == "Internal":
            half = length // 2
            rec(depth + 1, start0, half)
            rec(depth + 1, start0 + half, half)

    rec(0, 0, spec.N)
    return MetricTree(tuple(nodes))


def cumulative_metric_profile(tree: MetricTree) -> np.ndarray:
    """Prefix sums of per-position expected metric in decoding order.

    Position p (1-based) accumulates the node mean of every frontier
    position up to p; the final entry is the expected total path metric.
    """
    frontier = sorted(tree.frontier(), key=lambda nd: nd.start)
    per_pos = np.concatenate([np.full(nd.length, nd.mean) for nd in frontier])
    return np.cumsum(per_pos)


@dataclass(frozen=True)
class PruneThresholds:
    """Per-bit pruning levels m_i = sqrt(V_i / P_th) plus the PFSCL constant."""

    m_i: np.ndarray
    p_th: float
    m_t: float = -math.inf


def vpscl_thresholds(stats, p_th: float) -> PruneThresholds:
    """Varentropy-based per-bit thresholds; the prune test is phi < -m_i."""
    if not (0.0 < p_th < 1.0):
        raise ValueError(f"P_th must be in (0,1), got {p_th}")
    if isinstance(stats, ChannelTree):
        variances = stats.leaf_variances()
    else:
        variances = np.array([s.variance for s in stats], dtype=float)
    m_i = np.sqrt(np.maximum(variances, 0.0) / p_th)
    m_i.setflags(write=False)
    return PruneThresholds(m_i=m_i, p_th=p_th)


# --- true-path stage metrics -------------------------------------------------

def _boxplus(a, b):
    s = a + b
    d = a - b
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
            + _log1p2(-np.abs(s)) - _log1p2(-np.abs(d)))


def stage_llrs_forced(llrs: np.ndarray, u: np.ndarray, depth: int):
    """Stage LLRs and stage input bits at a tree depth, along the true path.

    llrs: [trials, N] base-2 channel LLRs; u: [trials, N] the transmitted
    polar-mapper inputs.  Returns (alpha, s): both [trials, N], the
    concatenated per-node stage LLR vectors at the requested depth and the
    corresponding stage input bits (whose polar transform over each node
    segment gives that node's codeword).  depth = n gives the leaf decision
    LLRs and u itself.
    """
    llrs = np.atleast_2d(np.asarray(llrs, dtype=float))
    u = np.atleast_2d(np.asarray(u).astype(np.uint8) & 1)
    n_len = llrs.shape[1]

    def rec(alpha, useg, d):
        if d == 0:
            # stage inputs of this node: transform of its u segment
            return alpha, polar_transform(useg)
        half = alpha.shape[1] // 2
        a, b = alpha[:, :half], alpha[:, half:]
        ul, ur = useg[:, :half], useg[:, half:]
        left_alpha, left_bits = rec(_boxplus(a, b), ul, d - 1)
        beta_l = polar_transform(ul)
        right_alpha, right_bits = rec(b + (1.0 - 2.0 * beta_l) * a, ur, d - 1)
        return (np.concatenate([left_alpha, right_alpha], axis=1),
                np.concatenate([left_bits, right_bits], axis=1))

    if not (0 <= depth <= int(math.log2(n_len))):
        raise ValueError("depth out of range")
    return rec(llrs, u, depth)


def true_path_bit_metrics(llrs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Leaf-level phi of every transmitted bit: [trials, N]."""
    n = int(math.log2(np.atleast_2d(llrs).shape[1]))
    alpha, s = stage_llrs_forced(llrs, u, n)
    return bit_metric(alpha, s)


def sample_metric_profile(spec: CodeSpec, ch, trials: int, seed: int = 0,
                          mu: int = 512):
    """Per-position metric statistics over correctly decoded codewords.

    Transmits random data over BI-AWGN, decodes with fast SC, and for the
    correctly decoded trials accumulates the node-depth metric increment of
    every position.  Returns (cum_mean, inc_var, n_correct, n_discarded):
    cum_mean[p] is the sample mean of the cumulative metric through
    position p+1 and inc_var[p] the sample variance of the increment there.
    """
    from .channel import AwgnChannel, awgn_llr
    from .decode import fscl_decode

    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not isinstance(ch, AwgnChannel):
        raise TypeError("sample profiles are collected on BI-AWGN")
    rng = np.random.default_rng(seed)
    n_len = spec.N
    frontier = classify_tree(spec)
    depths = sorted({spec.n - int(math.log2(nd.length)) for nd in frontier})

    batch = max(1, min(trials, 2048))
    count = 0
    discarded = 0
    s1 = np.zeros(n_len)
    s2 = np.zeros(n_len)
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        done += m
        d = rng.integers(0, 2, size=(m, spec.K), dtype=np.uint8)
        v = np.zeros((m, n_len), dtype=np.uint8)
        v[:, spec.info_mask] = d
        u = toeplitz_encode(v, spec.poly)
        x = polar_transform(u)
        y = (1.0 - 2.0 * x) + ch.sigma * rng.standard_normal((m, n_len))
        llrs = awgn_llr(y, ch)
        ok = np.zeros(m, dtype=bool)
        for t in range(m):
            ok[t] = np.array_equal(fscl_decode(spec, llrs[t], 1), d[t])
        discarded += int(m - ok.sum())
        if not ok.any():
            continue
        lo, uo = llrs[ok], u[ok]
        inc = np.empty((len(lo), n_len))
        for depth in depths:
            alpha, s = stage_llrs_forced(lo, uo, depth)
            phi = bit_metric(alpha, s)
            seg = n_len >> depth
            for nd in frontier:
                if nd.length == seg:
                    inc[:, nd.start - 1:nd.end] = phi[:, nd.start - 1:nd.end]
        count += len(lo)
        s1 += inc.sum(axis=0)
        s2 += (inc * inc).sum(axis=0)
    if count == 0:
        raise RuntimeError("no samples: zero correct decodes")
    mean_inc = s1 / count
    var_inc = np.maximum(s2 / count - mean_inc**2, 0.0)
    return np.cumsum(mean_inc), var_inc, count, discarded


def profile_csv(cum_mean, sample_cum=None, sample_var=None) -> str:
    """CSV of a metric profile: position plus the supplied columns."""
    cols = ["position", "mean"]
    if sample_cum is not None:
        cols.append("sample_cum")
    if sample_var is not None:
        cols.append("sample_var")
    lines = [",".join(cols)]
    for p in range(len(cum_mean)):
        row = [str(p + 1), f"{cum_mean[p]:.6g}"]
        if sample_cum is not None:
            row.append(f"{sample_cum[p]:.6g}")
        if sample_var is not None:
            row.append(f"{sample_var[p]:.6g}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
