"""Polar transform, convolutional pre-transform, rate profiles, and code specs.

Index convention: 1-based in profile files and documentation, 0-based in
arrays.  The polar transform is x = u F^(otimes n) with F = [[1,0],[1,1]]
and no bit reversal; the row weight of F_N row i (1-based) is
2^popcount(i-1).

A PAC code applies the rate-1 convolution u = v T first, where T is the
upper-triangular Toeplitz matrix of the connection polynomial
p(x) = p_m x^m + ... + p_1 x + p_0 with p_0 = p_m = 1.  Polynomials are
stored as the coefficient list (p_0, ..., p_m); p_0 multiplies the current
carrier bit.  poly = (1,) gives a plain polar code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import AwgnChannel
from .polarize import ga_construct

# p(x) = x^10 + x^9 + x^7 + x^3 + 1, as (p_0, ..., p_m)
DEFAULT_POLY = (1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1)


class ProfileError(ValueError):
    """Raised for malformed rate-profile files or inconsistent profiles."""


def polar_transform(u: np.ndarray) -> np.ndarray:
    """x = u F^(otimes n) over GF(2); also its own inverse.

    Accepts a length-N vector or an array of rows; N must be a power of two.
    """
    u = np.asarray(u)
    x = (u.astype(np.uint8) & 1).copy()
    n_len = x.shape[-1]
    if n_len == 0 or (n_len & (n_len - 1)) != 0:
        raise ValueError(f"length {n_len} is not a power of two")
    rows = x.reshape(-1, n_len)
    h = 1
    while h < n_len:
        view = rows.reshape(rows.shape[0], n_len // (2 * h), 2, h)
        view[:, :, 0, :] ^= view[:, :, 1, :]
        h *= 2
    return x


def toeplitz_encode(v: np.ndarray, poly=DEFAULT_POLY) -> np.ndarray:
    """u = v T: shift-register convolution u_j = sum_k p_k v_{j-k}."""
    poly = tuple(int(c) & 1 for c in poly)
    if not poly or poly[0] != 1:
        raise ValueError("p_0 must be 1")
    v = np.asarray(v).astype(np.uint8) & 1
    u = np.zeros_like(v)
    n_len = v.shape[-1]
    for k, c in enumerate(poly):
        if c and k < n_len:
            u[..., k:] ^= v[..., : n_len - k]
    return u


def toeplitz_invert(u: np.ndarray, poly=DEFAULT_POLY) -> np.ndarray:
    """Recover v from u = v T by back-substitution (p_0 = 1)."""
    poly = tuple(int(c) & 1 for c in poly)
    if not poly or poly[0] != 1:
        raise ValueError("p_0 must be 1")
    u = np.asarray(u)
    flat = u.ndim == 1
    u = np.atleast_2d(u.astype(np.uint8) & 1)
    n_len = u.shape[-1]
    taps = [k for k, c in enumerate(poly) if c and k > 0]
    v = np.zeros_like(u)
    for j in range(n_len):
        acc = u[:, j].copy()
        for k in taps:
            if j - k >= 0:
                acc ^= v[:, j - k]
        v[:, j] = acc
    return v[0] if flat else v


def toeplitz_matrix(n_len: int, poly=DEFAULT_POLY) -> np.ndarray:
    """Dense T for testing: T[i, i+k] = p_k."""
    t = np.zeros((n_len, n_len), dtype=np.uint8)
    for k, c in enumerate(poly):
        if c:
            for i in range(n_len - k):
                t[i, i + k] = 1
    return t


def rm_profile(n: int, k: int) -> frozenset[int]:
    """The K indices (1-based) of largest F_N row weight.

    Ties inside a weight class are broken toward higher indices (the more
    reliable ones under successive decoding).
    """
    n_len = 1 << n
    if not (1 <= k <= n_len):
        raise ProfileError(f"K={k} out of range for N={n_len}")
    order = sorted(range(n_len), key=lambda i: (bin(i).count("1"), i), reverse=True)
    return frozenset(i + 1 for i in order[:k])


def ga_profile(n: int, k: int, ch: AwgnChannel) -> frozenset[int]:
    """Top-K indices by Gaussian-approximation reliability at the given channel."""
    n_len = 1 << n
    if not (1 <= k <= n_len):
        raise ProfileError(f"K={k} out of range for N={n_len}")
    means = ga_construct(ch, n).leaf_means
    order = sorted(range(n_len), key=lambda i: (means[i], i), reverse=True)
    return frozenset(i + 1 for i in order[:k])


def save_profile(path, n_len: int, profile) -> None:
    """Write a profile file: first line 'N K', then one ascending 1-based index per line."""
    idx = sorted(profile)
    with open(path, "w") as f:
        f.write(f"{n_len} {len(idx)}\n")
        for i in idx:
            f.write(f"{i}\n")


def load_profile(path) -> tuple[int, frozenset[int]]:
    """Read a profile file; returns (N, profile). Raises ProfileError when malformed."""
    with open(path) as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise ProfileError(f"{path}: missing 'N K' header")
    try:
        n_len, k = int(tokens[0]), int(tokens[1])
        idx = [int(t) for t in tokens[2:]]
    except ValueError as e:
        raise ProfileError(f"{path}: non-integer entry ({e})") from None
    if len(idx) != k:
        raise ProfileError(f"{path}: expected {k} indices, found {len(idx)}")
    if len(set(idx)) != len(idx):
        raise ProfileError(f"{path}: duplicate index")
    for i in idx:
        if not (1 <= i <= n_len):
            raise ProfileError(f"{path}: index {i} out of range 1..{n_len}")
    return n_len, frozenset(idx)


@dataclass(frozen=True)
class CodeSpec:
    """An (N, K, profile, poly) polar or PAC code.

    profile holds 1-based carrier positions of the data bits; poly is the
    connection polynomial (p_0, ..., p_m), (1,) for plain polar.
    """

    n: int
    k: int
    profile: frozenset[int]
    poly: tuple[int, ...] = (1,)
    info_mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n_len = 1 << self.n
        profile = frozenset(int(i) for i in self.profile)
        object.__setattr__(self, "profile", profile)
        if len(profile) != self.k:
            raise ProfileError(f"|profile| = {len(profile)} but K = {self.k}")
        if not (1 <= self.k <= n_len):
            raise ProfileError(f"K={self.k} out of range for N={n_len}")
        for i in profile:
            if not (1 <= i <= n_len):
                raise ProfileError(f"profile index {i} out of range 1..{n_len}")
        poly = tuple(int(c) & 1 for c in self.poly)
        object.__setattr__(self, "poly", poly)
        if not poly or poly[0] != 1 or poly[-1] != 1:
            raise ValueError("connection polynomial needs p_0 = p_m = 1")
        mask = np.zeros(n_len, dtype=bool)
        mask[[i - 1 for i in profile]] = True
        object.__setattr__(self, "info_mask", mask)
        self.info_mask.setflags(write=False)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def K(self) -> int:
        return self.k

    @property
    def is_pac(self) -> bool:
        return self.poly != (1,)

    @property
    def memory(self) -> int:
        return len(self.poly) - 1

    def rate(self) -> float:
        return self.k / self.N


def insert_data(spec: CodeSpec, d: np.ndarray) -> np.ndarray:
    """Carrier word v with v_profile = d and frozen positions zero."""
    d = np.asarray(d).astype(np.uint8) & 1
    if d.shape[-1] != spec.k:
        raise ValueError(f"data length {d.shape[-1]} != K = {spec.k}")
    v = np.zeros(d.shape[:-1] + (spec.N,), dtype=np.uint8)
    v[..., spec.info_mask] = d
    return v


def extract(spec: CodeSpec, v_hat: np.ndarray) -> np.ndarray:
    """Data word read off the carrier's profile positions."""
    v_hat = np.asarray(v_hat)
    if v_hat.shape[-1] != spec.N:
        raise ValueError(f"carrier length {v_hat.shape[-1]} != N = {spec.N}")
    return (v_hat[..., spec.info_mask].astype(np.uint8)) & 1


def encode(spec: CodeSpec, d: np.ndarray) -> np.ndarray:
    """d -> v -> u = vT -> x = u F_N."""
    v = insert_data(spec, d)
    u = toeplitz_encode(v, spec.poly)
    return polar_transform(u)


# --- pruned-tree classification ---------------------------------------------

NODE_KINDS = ("Rate0", "Rate1", "REP", "SPC", "TypeI", "Internal")


@dataclass(frozen=True)
class NodeClass:
    """A pruned-tree segment: kind plus 1-based inclusive bounds [start, end]."""

    kind: str
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def _match_kind(mask: np.ndarray) -> str | None:
    ln = len(mask)
    ones = int(mask.sum())
    if ones == 0:
        return "Rate0"
    if ones == ln:
        return "Rate1"
    if ln >= 2 and ones == 1 and mask[-1]:
        return "REP"
    if ln >= 2 and ones == ln - 1 and not mask[0]:
        return "SPC"
    if ln >= 2 and ones == 2 and mask[-1] and mask[-2]:
        return "TypeI"
    return None


def classify_tree(spec: CodeSpec) -> list[NodeClass]:
    """Greedy top-down classification of the decoding tree.

    Recurses from the root until a segment matches a special-node pattern;
    the returned frontier partitions [1, N] in decoding order.
    """
    frontier: list[NodeClass] = []

    def rec(start: int, length: int) -> None:
        kind = _match_kind(spec.info_mask[start:start + length])
        if kind is not None:
            frontier.append(NodeClass(kind, start + 1, start + length))
            return
        half = length // 2
        rec(start, half)
        rec(start + half, half)

    rec(0, spec.N)
    return frontier


def tree_node_visits(spec: CodeSpec) -> int:
    """Nodes a frontier-pruned traversal touches.

    Every pruned-tree node counts except an internal root, so a
    conventional leaf-level traversal gives 2N - 2 while an all-frozen
    code (whose root is itself the frontier) gives 1.
    """
    count = 0

    def rec(start: int, length: int, is_root: bool) -> None:
        nonlocal count
        matched = _match_kind(spec.info_mask[start:start + length]) is not None
        if matched or not is_root:
            count += 1
        if matched:
            return
        half = length // 2
        rec(start, half, False)
        rec(start + half, half, False)

    rec(0, spec.N, True)
    return count
