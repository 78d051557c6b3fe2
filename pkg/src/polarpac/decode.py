"""SC-based decoders: SC, SCL with the polarized metric, fast SCL over
special nodes, and the two metric-threshold pruned variants (PFSCL, VPSCL).

All decoders take base-2 channel LLRs.  Paths are held in numpy arrays with
the leading axis indexing list entries, so per-node work is vectorized over
the list.  A sorting operation is counted exactly when a top-L selection
runs over more than L candidates; node visits count every decoding-tree
node touched except an internal root, so a conventional leaf-level decode
reports 2N - 2 and a frontier-pruned decode reports the classification
count.

Fast handlers score whole segments with the metric evaluated on the node's
stage LLRs.  Because the summed metric of a segment equals the sum of the
leaf-level metrics for the same decisions, the fast decoder keeps exactly
the paths conventional SCL keeps:

- Rate-0: single forced candidate, no split, whole-segment metric update.
- REP: both carrier completions compared on their segment totals (the one
  data bit sits at the last position, so this is the selection conventional
  SCL would make there).
- Type-I: the two data bits resolved in two selection stages: the partial
  segment metric through the first data bit, then the final position's
  LLR, which has the closed form sum_j (1-2k_j) alpha_j.  This reproduces
  conventional SCL's survivor sets exactly; a single 4-way comparison would
  not, because SCL's first selection cannot see the last bit's metric.
- Rate-1 / SPC: bifurcation runs in leaf order inside the segment (a
  whole-segment top-L would keep paths conventional SCL's greedy per-leaf
  selection has already dropped); only the LLR/partial-sum recursion is
  shared with the ordinary descent.

PFSCL is the same traversal with a constant threshold m_T: a bifurcation
branch whose decision metric falls below m_T is dropped before insertion,
and REP/Type-I candidates are dropped on their segment totals.  Paths can
die at REP/Type-I nodes; a selection counts as a sorting operation only
when more than L candidates survive the threshold.

PAC codes constrain the carrier v, not the mapper input u, so committed
segment decisions are converted back to carrier bits through the shift
register before decoding continues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codes import (CodeSpec, NodeClass, classify_tree, polar_transform,
                    tree_node_visits)
from .metric import PruneThresholds, _boxplus, bit_metric


@dataclass
class DecodeCounters:
    """Instrumentation of one decode."""

    sort_ops: int = 0
    node_visits: int = 0
    paths_pruned: int = 0


@dataclass(frozen=True)
class DecoderConfig:
    """Mode plus the knobs the mode needs.

    mode: one of 'sc', 'scl', 'fscl', 'pfscl', 'vpscl'.  PFSCL requires a
    finite negative m_t; VPSCL requires thresholds.
    """

    mode: str
    list_size: int = 1
    m_t: float = -math.inf
    thresholds: PruneThresholds | None = None

    def __post_init__(self):
        if self.mode not in ("sc", "scl", "fscl", "pfscl", "vpscl"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.list_size < 1:
            raise ValueError("list size must be >= 1")
        if self.mode == "pfscl" and not (self.m_t < 0):
            raise ValueError("pfscl needs a finite negative m_t")
        if self.mode == "vpscl" and self.thresholds is None:
            raise ValueError("vpscl needs a thresholds table")


class _ListDecoder:
    """One decode's mutable state; instances are single-use."""

    def __init__(self, spec: CodeSpec, llrs, L, *, frontier=None, m_t=-math.inf,
                 m_i=None, count_sorts=True, inc_offset=0.0, trace=None):
        llrs = np.asarray(llrs, dtype=float)
        if llrs.shape != (spec.N,):
            raise ValueError(f"expected {spec.N} LLRs, got shape {llrs.shape}")
        self.spec = spec
        self.N = spec.N
        self.n = spec.n
        self.L = L
        self.m_t = m_t
        self.m_i = m_i
        self.count_sorts = count_sorts
        self.inc_offset = inc_offset
        self.trace = trace
        self.counters = DecodeCounters()
        self.taps = [k for k, c in enumerate(spec.poly) if c and k > 0]
        self.p1 = spec.poly[1] if len(spec.poly) > 1 else 0
        self.frontier = None
        if frontier is not None:
            self.frontier = {(nd.start - 1, nd.length): nd.kind for nd in frontier}
        self.llr = [None] * (self.n + 1)
        self.llr[0] = llrs[None, :]
        self.beta = [np.zeros((1, self.N >> d), dtype=np.uint8)
                     for d in range(self.n + 1)]
        self.v = np.zeros((1, self.N), dtype=np.uint8)
        self.metric = np.zeros(1)

    # -- state plumbing -------------------------------------------------

    @property
    def alive(self) -> int:
        return len(self.metric)

    def _take(self, rows):
        for d in range(1, self.n + 1):
            if self.llr[d] is not None:
                self.llr[d] = self.llr[d][rows]
            self.beta[d] = self.beta[d][rows]
        self.beta[0] = self.beta[0][rows]
        self.v = self.v[rows]

    def _select(self, cand_metric):
        """Stable top-L candidate indices (ascending); counts one sorting
        operation when there are more than L candidates."""
        m = len(cand_metric)
        if m <= self.L:
            return np.arange(m)
        if self.count_sorts:
            self.counters.sort_ops += 1
        order = np.argsort(-cand_metric, kind="stable")[:self.L]
        return np.sort(order)

    def _conv_base(self, pos, ln):
        """u over [pos, pos+ln) when the carrier segment is all zero."""
        mem = self.spec.memory
        if not self.taps:
            return np.zeros((self.alive, ln), dtype=np.uint8)
        window = np.zeros((self.alive, mem), dtype=np.uint8)
        avail = min(pos, mem)
        if avail:
            window[:, mem - avail:] = self.v[:, pos - avail:pos]
        ext = np.concatenate([window, np.zeros((self.alive, ln), dtype=np.uint8)],
                             axis=1)
        u = np.zeros((self.alive, ln), dtype=np.uint8)
        for k in self.taps:
            u ^= ext[:, mem - k:mem - k + ln]
        return u

    def _carrier_from_u(self, pos, ln, u_seg):
        """Back-substitute u = vT over the segment given the carrier history."""
        mem = self.spec.memory
        if not self.taps:
            return u_seg
        window = np.zeros((self.alive, mem), dtype=np.uint8)
        avail = min(pos, mem)
        if avail:
            window[:, mem - avail:] = self.v[:, pos - avail:pos]
        ext = np.concatenate([window, np.zeros_like(u_seg)], axis=1)
        for j in range(ln):
            acc = u_seg[:, j].copy()
            for k in self.taps:
                acc ^= ext[:, mem + j - k]
            ext[:, mem + j] = acc
        return ext[:, mem:]

    # -- traversal -------------------------------------------------------

    def run(self):
        self._walk(0, 0)
        if self.frontier is None or (0, self.N) not in self.frontier:
            self.counters.node_visits -= 1  # internal root does not count
        return self

    def _walk(self, d, pos, plain=False):
        if not plain:
            self.counters.node_visits += 1
        ln = self.N >> d
        if self.frontier is not None and not plain:
            kind = self.frontier.get((pos, ln))
            if kind is not None:
                if kind in ("Rate1", "SPC"):
                    self._walk(d, pos, plain=True)
                else:
                    getattr(self, "_node_" + kind.lower())(d, pos, ln)
                if self.trace is not None:
                    self.trace(pos + ln - 1, self.v[:, :pos + ln])
                return
        if d == self.n:
            self._leaf(pos)
            return
        half = ln >> 1
        al = self.llr[d]
        self.llr[d + 1] = _boxplus(al[:, :half], al[:, half:])
        self._walk(d + 1, pos, plain)
        self.beta[d][:, :half] = self.beta[d + 1]
        al = self.llr[d]
        self.llr[d + 1] = (al[:, half:]
                           + (1.0 - 2.0 * self.beta[d][:, :half]) * al[:, :half])
        self._walk(d + 1, pos + half, plain)
        br = self.beta[d + 1]
        self.beta[d][:, half:] = br
        self.beta[d][:, :half] ^= br

    # -- leaf-level step (SC / SCL / VPSCL) -------------------------------

    def _leaf(self, i):
        llr = self.llr[self.n][:, 0]
        base = np.zeros(self.alive, dtype=np.uint8)
        for k in self.taps:
            if i - k >= 0:
                base ^= self.v[:, i - k]
        if not self.spec.info_mask[i]:
            # frozen bits extend every path uniquely; the threshold tests
            # apply only where paths compete (a near-useless bit has both
            # V_i ~ 0 and phi ~ 0, so testing there would shed half the
            # correct paths)
            phi = bit_metric(llr, base)
            self.metric = self.metric + phi + self.inc_offset
            self.beta[self.n] = base[:, None]
        else:
            a = self.alive
            # parent-major candidate order: (row, v=0), (row, v=1)
            cand_parent = np.repeat(np.arange(a), 2)
            cand_bit = np.tile(np.array([0, 1], dtype=np.uint8), a)
            cand_phi = np.column_stack([bit_metric(llr, base),
                                        bit_metric(llr, base ^ 1)]).ravel()
            cand_metric = (np.repeat(self.metric, 2) + cand_phi
                           + self.inc_offset)
            if self.m_i is not None or self.m_t > -math.inf:
                floor = -self.m_i[i] if self.m_i is not None else self.m_t
                keep = cand_phi >= floor
                if not keep.any():
                    keep[np.argmax(cand_metric)] = True
                self.counters.paths_pruned += int(len(keep) - keep.sum())
                sel = np.flatnonzero(keep)
                cand_parent, cand_bit = cand_parent[sel], cand_bit[sel]
                cand_metric = cand_metric[sel]
            if self.count_sorts:
                kept = self._select(cand_metric)
            else:  # SC: plain argmax, not a sorting operation
                kept = (np.arange(len(cand_metric)) if len(cand_metric) <= self.L
                        else np.array([int(np.argmax(cand_metric))]))
            par = cand_parent[kept]
            bits = cand_bit[kept]
            self._take(par)
            self.metric = cand_metric[kept]
            self.v[:, i] = bits
            self.beta[self.n] = (base[par] ^ bits)[:, None]
        if self.trace is not None:
            self.trace(i, self.v[:, :i + 1])

    # -- frontier handlers -------------------------------------------------

    def _commit(self, d, pos, ln, chunk_beta):
        u_seg = polar_transform(chunk_beta)
        self.v[:, pos:pos + ln] = self._carrier_from_u(pos, ln, u_seg)
        self.beta[d] = chunk_beta

    def _node_rate0(self, d, pos, ln):
        u_base = self._conv_base(pos, ln)
        beta = polar_transform(u_base)
        z = self.llr[d] * (1.0 - 2.0 * beta)
        self.metric = self.metric + bit_metric(z, 0).sum(axis=1)
        self.beta[d] = beta

    @staticmethod
    def _chunk_ok(inc, m_t):
        """Threshold test on segment completions: a candidate below m_t is
        dropped unless it is its path's best completion (pruning trims the
        candidate set, it never removes a path)."""
        ok = inc >= m_t
        best = inc.argmax(axis=1)
        ok[np.arange(len(inc)), best] = True
        return ok.ravel()

    def _node_rep(self, d, pos, ln):
        alpha = self.llr[d]
        u_base = self._conv_base(pos, ln)
        beta0 = polar_transform(u_base)
        z0 = alpha * (1.0 - 2.0 * beta0)
        # the two carrier completions differ by the all-ones transform row
        inc = np.column_stack([bit_metric(z0, 0).sum(axis=1),
                               bit_metric(-z0, 0).sum(axis=1)])
        ok = self._chunk_ok(inc, self.m_t)
        cand_parent = np.repeat(np.arange(self.alive), 2)
        cand_b = np.tile(np.array([0, 1], dtype=np.uint8), self.alive)
        cand_metric = np.repeat(self.metric, 2) + inc.ravel()
        if not ok.all():
            self.counters.paths_pruned += int(len(ok) - ok.sum())
            sel = np.flatnonzero(ok)
            cand_parent, cand_b = cand_parent[sel], cand_b[sel]
            cand_metric = cand_metric[sel]
        kept = self._select(cand_metric)
        par = cand_parent[kept]
        b_sel = cand_b[kept]
        self._take(par)
        self.metric = cand_metric[kept]
        self.v[:, pos + ln - 1] = b_sel
        self.beta[d] = beta0[par] ^ b_sel[:, None]

    def _node_typei(self, d, pos, ln):
        alpha = self.llr[d]
        u_base = self._conv_base(pos, ln)
        beta0 = polar_transform(u_base)
        pat_a = np.zeros(ln, dtype=np.uint8)
        pat_a[ln - 2] = 1
        if self.p1:
            pat_a[ln - 1] ^= 1
        fa = polar_transform(pat_a)
        z_base = alpha * (1.0 - 2.0 * beta0)
        sign_a = 1.0 - 2.0 * fa
        # stage 1: choose the first data bit on the partial segment metric;
        # the final position's leaf LLR has the closed form sum_j (1-2k_j)
        # alpha_j with k the segment codeword whose last mapper bit is 0
        z = {0: z_base, 1: z_base * sign_a}
        total_b0 = {a: bit_metric(z[a], 0).sum(axis=1) for a in (0, 1)}
        u_last0 = {a: u_base[:, ln - 1] ^ (a & self.p1) for a in (0, 1)}
        l_last = {a: z[a].sum(axis=1) * (1.0 - 2.0 * u_last0[a])
                  for a in (0, 1)}
        partial = {a: total_b0[a] - bit_metric(l_last[a], u_last0[a])
                   for a in (0, 1)}
        cand_parent = np.repeat(np.arange(self.alive), 2)
        cand_a = np.tile(np.array([0, 1], dtype=np.uint8), self.alive)
        cand_partial = np.column_stack([partial[0], partial[1]])
        cand_metric = np.repeat(self.metric, 2) + cand_partial.ravel()
        ok = self._chunk_ok(cand_partial, self.m_t)
        if not ok.all():
            self.counters.paths_pruned += int(len(ok) - ok.sum())
            sel = np.flatnonzero(ok)
            cand_parent, cand_a = cand_parent[sel], cand_a[sel]
            cand_metric = cand_metric[sel]
        kept = self._select(cand_metric)
        par = cand_parent[kept]
        a_sel = cand_a[kept]
        self._take(par)
        self.metric = cand_metric[kept]
        l_sel = np.where(a_sel == 0, l_last[0][par], l_last[1][par])
        u_last_sel = u_base[par, ln - 1] ^ (a_sel & self.p1)
        part_sel = np.where(a_sel == 0, partial[0][par], partial[1][par])
        beta_sel = beta0[par] ^ (a_sel[:, None] * fa[None, :])
        # stage 2: the final position has the closed-form LLR sum
        inc = np.column_stack([bit_metric(l_sel, u_last_sel),
                               bit_metric(l_sel, u_last_sel ^ 1)])
        chunk_total = part_sel[:, None] + inc
        ok = self._chunk_ok(chunk_total, self.m_t)
        cand_parent = np.repeat(np.arange(self.alive), 2)
        cand_b = np.tile(np.array([0, 1], dtype=np.uint8), self.alive)
        cand_metric = np.repeat(self.metric, 2) + inc.ravel()
        if not ok.all():
            self.counters.paths_pruned += int(len(ok) - ok.sum())
            sel = np.flatnonzero(ok)
            cand_parent, cand_b, cand_metric = (cand_parent[sel], cand_b[sel],
                                                cand_metric[sel])
        kept = self._select(cand_metric)
        par = cand_parent[kept]
        b_sel = cand_b[kept]
        self._take(par)
        self.metric = cand_metric[kept]
        self.v[:, pos + ln - 2] = a_sel[par]
        self.v[:, pos + ln - 1] = b_sel
        self.beta[d] = beta_sel[par] ^ b_sel[:, None]

    # -- results -----------------------------------------------------------

    def best_carrier(self):
        return self.v[int(np.argmax(self.metric))]

    def carriers(self):
        return self.v.copy(), self.metric.copy()


def _extract(spec: CodeSpec, carrier):
    return carrier[spec.info_mask].astype(np.uint8)


def sc_decode(spec: CodeSpec, llrs) -> np.ndarray:
    """Successive cancellation; identical output to scl_decode with L=1."""
    dec = _ListDecoder(spec, llrs, 1, count_sorts=False).run()
    return _extract(spec, dec.best_carrier())


def scl_decode(spec: CodeSpec, llrs, L: int, *, penalty_metric=False,
               trace=None, full=False):
    """List decoding with the polarized metric (leaf-level traversal).

    penalty_metric=True accumulates phi - 1 per decision instead, the
    conventional path penalty; survivor sets are identical because the two
    differ by a constant at each level.
    """
    dec = _ListDecoder(spec, llrs, L,
                       inc_offset=-1.0 if penalty_metric else 0.0,
                       trace=trace).run()
    data = _extract(spec, dec.best_carrier())
    if full:
        vs, ms = dec.carriers()
        return data, vs, ms
    return data


def fscl_decode(spec: CodeSpec, llrs, L: int) -> np.ndarray:
    """Fast SCL over the classified special-node frontier; output-equivalent
    to scl_decode on every input."""
    dec = _ListDecoder(spec, llrs, L, frontier=classify_tree(spec)).run()
    return _extract(spec, dec.best_carrier())


def pfscl_decode(spec: CodeSpec, llrs, L: int, m_t: float) -> np.ndarray:
    """Pruned fast SCL: the fast traversal with bifurcation branches whose
    decision metric falls below the constant threshold m_t discarded before
    insertion, and REP/Type-I candidates discarded on their segment totals.
    m_t = -inf reproduces fscl_decode exactly."""
    dec = _ListDecoder(spec, llrs, L, frontier=classify_tree(spec),
                       m_t=m_t).run()
    return _extract(spec, dec.best_carrier())


def vpscl_decode(spec: CodeSpec, llrs, L: int,
                 thresholds: PruneThresholds) -> np.ndarray:
    """SCL with per-bit varentropy thresholds: a path whose bit metric falls
    below -m_i is discarded before selection."""
    dec = _ListDecoder(spec, llrs, L, m_i=thresholds.m_i).run()
    return _extract(spec, dec.best_carrier())


def decode_with_counters(config: DecoderConfig, spec: CodeSpec, llrs):
    """Run the configured decoder; returns (data, DecodeCounters)."""
    if config.mode == "sc":
        dec = _ListDecoder(spec, llrs, 1, count_sorts=False)
    elif config.mode == "scl":
        dec = _ListDecoder(spec, llrs, config.list_size)
    elif config.mode == "fscl":
        dec = _ListDecoder(spec, llrs, config.list_size,
                           frontier=classify_tree(spec))
    elif config.mode == "pfscl":
        dec = _ListDecoder(spec, llrs, config.list_size,
                           frontier=classify_tree(spec), m_t=config.m_t)
    else:
        dec = _ListDecoder(spec, llrs, config.list_size,
                           m_i=config.thresholds.m_i)
    dec.run()
    return _extract(spec, dec.best_carrier()), dec.counters


__all__ = ["DecodeCounters", "DecoderConfig", "NodeClass", "classify_tree",
           "tree_node_visits", "sc_decode", "scl_decode", "fscl_decode",
           "pfscl_decode", "vpscl_decode", "decode_with_counters"]
