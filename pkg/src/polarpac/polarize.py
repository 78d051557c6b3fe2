"""Channel polarization: exact BEC recursion, quantized-DMC construction
with degrading merge, and Gaussian-approximation density evolution.

Symmetric binary-input channels are stored in a paired half-alphabet form:
each entry (a, b) with a >= b stands for an output symbol y with
W(y|0) = a, W(y|1) = b together with its mirror symbol (b, a), so that
sum(a + b) = 1 over all entries and the full output alphabet has twice as
many symbols as there are entries.  A self-mirrored (erasure-like) symbol
of probability q is split into two halves (q/2, q/2).  Entries are kept
sorted by decreasing likelihood ratio, with equal-LR entries merged.

Tree indexing is natural (non-bit-reversed): node (d, j) has the minus
child (d+1, 2j) and the plus child (d+1, 2j+1); leaves in index order are
the bit-channels of u_1..u_N for the encoding x = u F^(otimes n).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .channel import AwgnChannel, BecChannel, BscChannel, channel_iv

_LR_MERGE_TOL = 1e-9    # symbols closer than this in log-LR are one symbol
_EXACT_MERGE_MAX = 4096  # alphabet size below which the greedy merge is exact


class DiscreteChannel:
    """Symmetric binary-input DMC in paired half-alphabet form."""

    __slots__ = ("a", "b")

    def __init__(self, a, b, normalize_check=True):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if normalize_check:
            tot = a.sum() + b.sum()
            if abs(tot - 1.0) > 1e-9:
                raise ValueError(f"transition probabilities sum to {tot}, not 1")
        self.a, self.b = _canonical(a, b)

    @classmethod
    def from_bec(cls, epsilon: float) -> "DiscreteChannel":
        if not (0.0 <= epsilon <= 1.0):
            raise ValueError("epsilon must be in [0,1]")
        return cls(np.array([1.0 - epsilon, epsilon / 2.0]),
                   np.array([0.0, epsilon / 2.0]))

    @classmethod
    def from_bsc(cls, delta: float) -> "DiscreteChannel":
        if not (0.0 <= delta <= 1.0):
            raise ValueError("delta must be in [0,1]")
        d = min(delta, 1.0 - delta)
        return cls(np.array([1.0 - d]), np.array([d]))

    @property
    def num_outputs(self) -> int:
        """Size of the full output alphabet (two symbols per entry)."""
        return 2 * len(self.a)

    def mutual_information(self) -> float:
        return float(np.sum(_entry_capacity(self.a, self.b)))

    def metric_variance(self) -> float:
        """Varentropy: variance of h(X|Y) = -log2 p(x|y) under uniform input."""
        eh, eh2 = _entropy_moments(self.a, self.b)
        return max(eh2 - eh * eh, 0.0)

    def stats(self) -> tuple[float, float]:
        eh, eh2 = _entropy_moments(self.a, self.b)
        return 1.0 - eh, max(eh2 - eh * eh, 0.0)


def _canonical(a, b, tol=_LR_MERGE_TOL):
    """Sort entries by decreasing LR, merging equal-LR entries."""
    keep = (a + b) > 0.0
    a, b = a[keep], b[keep]
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    with np.errstate(divide="ignore"):
        key = np.where(lo > 0.0, np.log(hi) - np.log(lo), np.inf)
    order = np.argsort(-key, kind="stable")
    key, hi, lo = key[order], hi[order], lo[order]
    starts = np.ones(len(key), dtype=bool)
    if len(key) > 1:
        with np.errstate(invalid="ignore"):
            d = np.diff(key)
            same = ((d > -tol) & (d < tol)) | np.isnan(d)  # nan: inf-to-inf gap
        starts[1:] = ~same
    idx = np.flatnonzero(starts)
    return np.add.reduceat(hi, idx), np.add.reduceat(lo, idx)


def _entry_capacity(a, b):
    # per-entry contribution to I(W): a log2(2a/(a+b)) + b log2(2b/(a+b))
    s = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0.0, a * (np.log2(np.maximum(a, 1e-320)) + 1.0), 0.0)
        tb = np.where(b > 0.0, b * (np.log2(np.maximum(b, 1e-320)) + 1.0), 0.0)
        return ta + tb - np.where(s > 0.0, s * np.log2(np.maximum(s, 1e-320)), 0.0)


def _entropy_moments(a, b):
    # E[h] and E[h^2] with h(x|y) = -log2 p(x|y), uniform input
    s = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        ls = np.log2(np.maximum(s, 1e-320))
        ha = -(np.log2(np.maximum(a, 1e-320)) - ls)
        hb = -(np.log2(np.maximum(b, 1e-320)) - ls)
    wa = np.where(a > 0.0, a, 0.0)
    wb = np.where(b > 0.0, b, 0.0)
    ha = np.where(a > 0.0, ha, 0.0)
    hb = np.where(b > 0.0, hb, 0.0)
    eh = float(np.sum(wa * ha + wb * hb))
    eh2 = float(np.sum(wa * ha * ha + wb * hb * hb))
    return eh, eh2


def polar_minus(w: DiscreteChannel) -> DiscreteChannel:
    """Check-node (bad) channel combination W -> W-."""
    a, b = w.a, w.b
    A = (np.outer(a, a) + np.outer(b, b)).ravel()
    B = (np.outer(a, b) + np.outer(b, a)).ravel()
    return DiscreteChannel(A, B, normalize_check=False)


def polar_plus(w: DiscreteChannel) -> DiscreteChannel:
    """Variable-node (good) channel combination W -> W+ (genie output)."""
    a, b = w.a, w.b
    A = np.concatenate([np.outer(a, a).ravel(), np.outer(a, b).ravel()])
    B = np.concatenate([np.outer(b, b).ravel(), np.outer(b, a).ravel()])
    return DiscreteChannel(A, B, normalize_check=False)


def degrade_merge(w: DiscreteChannel, mu: int) -> DiscreteChannel:
    """Degrading quantization: merge adjacent-LR symbols, keeping at most
    mu output symbols (mu/2 entries), choosing merges of least capacity loss.

    Large alphabets are first reduced by batched rounds of least-loss
    adjacent merges; the final reduction below _EXACT_MERGE_MAX entries is
    the exact one-at-a-time greedy.  Every step merges adjacent symbols in
    LR order, so the result is a degraded version of the input.
    """
    if mu < 2:
        raise ValueError(f"mu must be >= 2, got {mu}")
    target = max(mu // 2, 1)
    a, b = w.a, w.b
    while len(a) > max(target, _EXACT_MERGE_MAX):
        a, b = _merge_round(a, b, max(target, _EXACT_MERGE_MAX))
    if len(a) > target:
        a, b = _merge_greedy(a, b, target)
    out = DiscreteChannel.__new__(DiscreteChannel)
    out.a, out.b = _canonical(a, b)
    return out


def _merge_round(a, b, target):
    """One batched round: apply the k least-loss non-overlapping adjacent merges."""
    m = len(a)
    k = min(m - target, max(1, m // 3))
    cap = _entry_capacity(a, b)
    loss = cap[:-1] + cap[1:] - _entry_capacity(a[:-1] + a[1:], b[:-1] + b[1:])
    taken = np.zeros(m, dtype=bool)
    merge_at = []
    for i in np.argsort(loss, kind="stable"):
        if len(merge_at) >= k:
            break
        if taken[i] or taken[i + 1]:
            continue
        taken[i] = taken[i + 1] = True
        merge_at.append(i)
    merge_at = np.array(merge_at, dtype=int)
    a = a.copy()
    b = b.copy()
    a[merge_at] += a[merge_at + 1]
    b[merge_at] += b[merge_at + 1]
    keep = np.ones(m, dtype=bool)
    keep[merge_at + 1] = False
    return _canonical(a[keep], b[keep])


def _merge_greedy(a, b, target):
    """Exact greedy: repeatedly merge the adjacent pair of least capacity loss."""
    n = len(a)
    a = list(a)
    b = list(b)
    prv = list(range(-1, n - 1))
    nxt = list(range(1, n + 1))
    nxt[-1] = -1
    alive = [True] * n
    version = [0] * n

    def pair_loss(i):
        j = nxt[i]
        ca = _entry_capacity(np.array([a[i], a[j], a[i] + a[j]]),
                             np.array([b[i], b[j], b[i] + b[j]]))
        return ca[0] + ca[1] - ca[2]

    heap = [(pair_loss(i), i, 0, 0) for i in range(n - 1)]
    heapq.heapify(heap)
    remaining = n
    while remaining > target and heap:
        loss, i, vi, vj = heapq.heappop(heap)
        j = nxt[i]
        if not alive[i] or j == -1 or version[i] != vi or version[j] != vj:
            continue
        a[i] += a[j]
        b[i] += b[j]
        alive[j] = False
        version[i] += 1
        nxt[i] = nxt[j]
        if nxt[j] != -1:
            prv[nxt[j]] = i
        remaining -= 1
        if nxt[i] != -1:
            heapq.heappush(heap, (pair_loss(i), i, version[i], version[nxt[i]]))
        if prv[i] != -1:
            p = prv[i]
            heapq.heappush(heap, (pair_loss(p), p, version[p], version[i]))
    keep = np.array(alive)
    return np.array(a)[keep], np.array(b)[keep]


def quantize_awgn(ch: AwgnChannel, mu: int) -> DiscreteChannel:
    """Discretize BI-AWGN to a symmetric DMC with at most mu outputs.

    Fine bins over the positive half-axis of the channel output (the mirror
    bins are implied by symmetry), then a degrading merge down to mu.
    """
    sigma = ch.sigma
    nbins = max(8 * mu, 256)
    inner = np.linspace(0.0, 1.0 + 10.0 * sigma, nbins)
    edges = np.concatenate([inner, [np.inf]])
    up = ndtr((edges - 1.0) / sigma)     # P(Y <= e | x=0 -> +1)
    dn = ndtr((edges + 1.0) / sigma)     # P(Y <= e | x=1 -> -1)
    a = np.diff(up)
    b = np.diff(dn)
    w = DiscreteChannel(a, b, normalize_check=False)
    return degrade_merge(w, mu)


def as_discrete(ch, mu: int = 512) -> DiscreteChannel:
    """Coerce a channel model to a DiscreteChannel."""
    if isinstance(ch, DiscreteChannel):
        return ch
    if isinstance(ch, AwgnChannel):
        return quantize_awgn(ch, mu)
    if isinstance(ch, BecChannel):
        return DiscreteChannel.from_bec(ch.epsilon)
    if isinstance(ch, BscChannel):
        return DiscreteChannel.from_bsc(ch.delta)
    raise TypeError(f"cannot build a DiscreteChannel from {type(ch).__name__}")


@dataclass(frozen=True)
class BitChannelStats:
    """Per-index capacity I(W_N^(i)) and metric variance V(W_N^(i)); index is 1-based."""

    index: int
    capacity: float
    variance: float


class ChannelTree:
    """Capacity/variance of every node of the polarization tree.

    level d holds 2^d nodes in natural order; node (d, j) has children
    (d+1, 2j) = minus and (d+1, 2j+1) = plus.
    """

    def __init__(self, capacity_levels, variance_levels):
        self.capacity = [np.asarray(c, dtype=float) for c in capacity_levels]
        self.variance = [np.asarray(v, dtype=float) for v in variance_levels]

    @property
    def depth(self) -> int:
        return len(self.capacity) - 1

    def node(self, depth: int, index: int) -> tuple[float, float]:
        """(capacity, variance) of tree node (depth, index)."""
        return float(self.capacity[depth][index]), float(self.variance[depth][index])

    def leaves(self) -> list[BitChannelStats]:
        caps = self.capacity[-1]
        vars_ = self.variance[-1]
        return [BitChannelStats(i + 1, float(caps[i]), float(vars_[i]))
                for i in range(len(caps))]

    def leaf_capacities(self) -> np.ndarray:
        return self.capacity[-1].copy()

    def leaf_variances(self) -> np.ndarray:
        return self.variance[-1].copy()

    def leaf_csv(self) -> str:
        lines = ["index,capacity,variance"]
        for s in self.leaves():
            lines.append(f"{s.index},{s.capacity:.6g},{s.variance:.6g}")
        return "\n".join(lines) + "\n"

    def tree_csv(self) -> str:
        lines = ["node_id,depth,capacity,variance"]
        node_id = 0
        for d in range(len(self.capacity)):
            for j in range(len(self.capacity[d])):
                lines.append(f"{node_id},{d},{self.capacity[d][j]:.6g},"
                             f"{self.variance[d][j]:.6g}")
                node_id += 1
        return "\n".join(lines) + "\n"


def bit_channel_stats(w, n: int, mu: int = 512) -> ChannelTree:
    """Full-depth polarization of a channel, quantized to mu outputs per node.

    Accepts a DiscreteChannel or any channel model coercible to one.
    Returns the whole tree; .leaves() gives the N = 2^n bit-channel stats.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    root = as_discrete(w, mu)
    caps = []
    vars_ = []
    level = [root]
    i0, v0 = root.stats()
    caps.append([i0])
    vars_.append([v0])
    for _ in range(n):
        nxt = []
        ci = []
        vi = []
        for node in level:
            wm = degrade_merge(polar_minus(node), mu)
            wp = degrade_merge(polar_plus(node), mu)
            for child in (wm, wp):
                s = child.stats()
                ci.append(s[0])
                vi.append(s[1])
                nxt.append(child)
        level = nxt
        caps.append(ci)
        vars_.append(vi)
    return ChannelTree(caps, vars_)


def bec_stats(epsilon: float, n: int) -> ChannelTree:
    """Exact BEC polarization: eps- = 2e - e^2, eps+ = e^2 at every split."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError("epsilon must be in [0,1]")
    if n < 0:
        raise ValueError("n must be >= 0")
    eps_levels = [np.array([epsilon])]
    for _ in range(n):
        e = eps_levels[-1]
        nxt = np.empty(2 * len(e))
        nxt[0::2] = 2.0 * e - e * e
        nxt[1::2] = e * e
        eps_levels.append(nxt)
    caps = [1.0 - e for e in eps_levels]
    vars_ = [e * (1.0 - e) for e in eps_levels]
    return ChannelTree(caps, vars_)


# --- Gaussian approximation -------------------------------------------------
#
# Mean-LLR density evolution in the natural-log domain.  The check-node
# transfer function phi(x) = 1 - E[tanh(L/2)] under L ~ N(x, 2x) is the
# standard piecewise approximation (four segments including the x = 0
# point and the large-x asymptote); its inverse is found by bisection.

def _ga_phi(x):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    lo = (x > 0) & (x <= 0.867861)
    mid = (x > 0.867861) & (x <= 10.0)
    hic = x > 10.0
    out[lo] = np.exp(0.1047 * x[lo] ** 2 - 0.4992 * x[lo])
    out[mid] = np.exp(-0.4527 * x[mid] ** 0.86 + 0.0218)
    xh = x[hic]
    out[hic] = np.sqrt(np.pi / xh) * np.exp(-xh / 4.0) * (1.0 - 10.0 / (7.0 * xh))
    return out


def _ga_phi_inv(y: float) -> float:
    if y >= 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while _ga_phi(hi) > y:
        hi *= 2.0
        if hi > 1e9:
            return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _ga_phi(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class GaProfileState:
    """Per-index mean LLRs (natural log) of the GA construction, by level."""

    def __init__(self, mean_levels):
        self.means = [np.asarray(m, dtype=float) for m in mean_levels]

    @property
    def leaf_means(self) -> np.ndarray:
        return self.means[-1].copy()


def ga_construct(ch: AwgnChannel, n: int) -> GaProfileState:
    """Gaussian-approximation density evolution over the polarization tree."""
    if n < 0:
        raise ValueError("n must be >= 0")
    levels = [np.array([2.0 / (ch.sigma * ch.sigma)])]
    for _ in range(n):
        m = levels[-1]
        phi = _ga_phi(m)
        minus = np.array([_ga_phi_inv(1.0 - (1.0 - p) ** 2) for p in phi])
        nxt = np.empty(2 * len(m))
        nxt[0::2] = minus
        nxt[1::2] = 2.0 * m
        levels.append(nxt)
    return GaProfileState(levels)
