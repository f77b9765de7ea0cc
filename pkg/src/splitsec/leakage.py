"""Proximity-induced information leakage of a placed layout.

For every unordered vertex pair the layout exposes a Manhattan distance D;
the netlist defines the binary connectivity X.  Binning D into fixed-width
buckets gives a joint histogram, from which the leakage is the mutual
information

    MI = I(X; D) = H[X] - H[X | D]        (log base 2, bits)

Low MI means distance reveals little about connectivity: the layout resists
proximity attacks.  ``mutual_information_reverse`` evaluates I(D; X) from
the same histogram as an algebraic cross-check (the two are identical).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netlist import NetlistGraph, connected_pairs
from .layout import Placement


@dataclass
class JointDistribution:
    """Joint histogram of X (connected / not) vs binned distance."""

    bin_width: int
    bins: dict[int, tuple[int, int]]
    total_pairs: int

    def __post_init__(self):
        if self.bin_width < 1:
            raise ValueError("bin_width must be >= 1")
        count = 0
        for b, (c, u) in self.bins.items():
            if b < 0 or c < 0 or u < 0:
                raise ValueError("negative bin index or count")
            count += c + u
        if count != self.total_pairs or self.total_pairs <= 0:
            raise ValueError("bin counts do not sum to total_pairs")

    @property
    def connected_total(self) -> int:
        return sum(c for c, _ in self.bins.values())


def joint_distribution(
    g: NetlistGraph,
    pl: Placement,
    bin_width: int = 1,
    include_pads: bool = True,
) -> JointDistribution:
    """Exact pairwise histogram over all placed vertices.

    Bin index is floor(distance / bin_width).  Pads are part of the pair
    universe by default; ``include_pads=False`` restricts to logic cells.
    """
    if bin_width < 1:
        raise ValueError("bin_width must be >= 1")
    pads = set(g.pad_ids)
    ids = sorted(v for v in pl.sites if include_pads or v not in pads)
    n = len(ids)
    if n < 2:
        raise ValueError("need at least 2 placed gates")

    xs = np.array([pl.sites[v][0] for v in ids], dtype=np.int64)
    ys = np.array([pl.sites[v][1] for v in ids], dtype=np.int64)
    max_bin = int((xs.max() - xs.min() + ys.max() - ys.min()) // bin_width)
    totals = np.zeros(max_bin + 1, dtype=np.int64)

    block = 512
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        dx = np.abs(xs[i0:i1, None] - xs[None, :])
        dy = np.abs(ys[i0:i1, None] - ys[None, :])
        d = (dx + dy) // bin_width
        cols = np.arange(n)[None, :]
        rows = np.arange(i0, i1)[:, None]
        sel = d[cols > rows]
        totals += np.bincount(sel, minlength=max_bin + 1)

    index = {v: i for i, v in enumerate(ids)}
    conn = np.zeros(max_bin + 1, dtype=np.int64)
    for a, b in connected_pairs(g):
        if a in index and b in index:
            ia, ib = index[a], index[b]
            d = int(abs(xs[ia] - xs[ib]) + abs(ys[ia] - ys[ib])) // bin_width
            conn[d] += 1

    bins = {
        int(b): (int(conn[b]), int(totals[b] - conn[b]))
        for b in range(max_bin + 1)
        if totals[b] > 0
    }
    return JointDistribution(bin_width, bins, n * (n - 1) // 2)


def entropy(probs) -> float:
    """Shannon entropy in bits of a discrete distribution; 0*log(0) = 0."""
    total = 0.0
    acc = 0.0
    for p in probs:
        if p < -1e-12:
            raise ValueError(f"negative probability {p}")
        total += p
        if p > 0:
            acc -= p * math.log2(p)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return acc


def _h2(a: int, b: int) -> float:
    """Entropy in bits of a two-bucket count vector."""
    n = a + b
    if n == 0 or a == 0 or b == 0:
        return 0.0
    pa, pb = a / n, b / n
    return -(pa * math.log2(pa) + pb * math.log2(pb))


def conditional_entropy(j: JointDistribution) -> float:
    """H[X | D] = sum_d Pr[D in bin d] * H[X | D in bin d]."""
    n = j.total_pairs
    return sum(((c + u) / n) * _h2(c, u) for c, u in j.bins.values())


@dataclass(frozen=True)
class LeakageReport:
    h_x: float
    h_x_given_d: float
    mi: float
    normalized_mi: float


def mutual_information(j: JointDistribution) -> LeakageReport:
    """MI = H[X] - H[X|D]; normalized form divides by H[X] (0 when H[X]=0)."""
    c = j.connected_total
    h_x = _h2(c, j.total_pairs - c)
    h_cond = conditional_entropy(j)
    mi = min(max(h_x - h_cond, 0.0), h_x)
    return LeakageReport(
        h_x=h_x,
        h_x_given_d=h_cond,
        mi=mi,
        normalized_mi=mi / h_x if h_x > 0 else 0.0,
    )


def mutual_information_reverse(j: JointDistribution) -> float:
    """I(D; X) = H[D] - H[D|X], from the same histogram; equals I(X; D)."""
    n = j.total_pairs
    c_total = j.connected_total
    u_total = n - c_total
    h_d = entropy([(c + u) / n for c, u in j.bins.values()])
    h_d_given_x = 0.0
    if c_total:
        h_d_given_x += (c_total / n) * entropy(
            [c / c_total for c, _ in j.bins.values() if c > 0]
        )
    if u_total:
        h_d_given_x += (u_total / n) * entropy(
            [u / u_total for _, u in j.bins.values() if u > 0]
        )
    return h_d - h_d_given_x


def mi_reduction_percent(mi_baseline: float, mi_protected: float) -> float:
    """100 * (1 - MI_protected / MI_baseline); NaN when the baseline is 0."""
    if mi_baseline <= 0:
        return float("nan")
    return 100.0 * (1.0 - mi_protected / mi_baseline)


def joint_to_csv(j: JointDistribution) -> str:
    lines = ["bin,connected,unconnected"]
    for b in sorted(j.bins):
        c, u = j.bins[b]
        lines.append(f"{b},{c},{u}")
    return "\n".join(lines) + "\n"


def report_to_json(r: LeakageReport) -> dict:
    return {
        "h_x": r.h_x,
        "h_x_given_d": r.h_x_given_d,
        "mi": r.mi,
        "normalized_mi": r.normalized_mi,
    }
