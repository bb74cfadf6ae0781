"""Degree distributions and log-log least-squares power-law slopes."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .model import Layer, TemporalMultigraph

DEGREE_MODES = ("in", "out", "total")
MULTIPLICITIES = ("multi", "simple")


@dataclass(frozen=True)
class DegreeDistribution:
    layer: Layer
    mode: str
    multiplicity: str
    counts: dict  # degree -> number of nodes

    @property
    def n_nodes(self) -> int:
        return sum(self.counts.values())


def degree_distribution(
    graph: TemporalMultigraph,
    layer: Layer,
    mode: str = "total",
    multiplicity: str = "multi",
    roster=None,
) -> DegreeDistribution:
    """Histogram of node degrees within one layer.

    ``multi`` counts every event as one unit of degree; ``simple`` counts
    distinct neighbours.  Nodes in ``roster`` without edges appear with
    degree 0.
    """
    if mode not in DEGREE_MODES:
        raise ValueError(f"mode must be one of {DEGREE_MODES}")
    if multiplicity not in MULTIPLICITIES:
        raise ValueError(f"multiplicity must be one of {MULTIPLICITIES}")
    multi = Counter()
    simple = defaultdict(set)
    for e in graph.events:
        if e.layer is not layer:
            continue
        ends = []
        if mode in ("out", "total"):
            ends.append((e.src, e.dst))
        if mode in ("in", "total"):
            ends.append((e.dst, e.src))
        for node, other in ends:
            multi[node] += 1
            simple[node].add(other)
    degree = multi if multiplicity == "multi" else {n: len(s) for n, s in simple.items()}
    hist = Counter(d for d in degree.values() if d > 0)
    if roster is not None:
        hist[0] += sum(1 for n in set(roster) if degree.get(n, 0) == 0)
        if not hist[0]:
            del hist[0]
    return DegreeDistribution(layer, mode, multiplicity, dict(sorted(hist.items())))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    r_squared: float
    points_used: int

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points_used": self.points_used,
        }


def fit_power_law(points) -> PowerLawFit:
    """Ordinary least squares of log10(count) on log10(x).

    ``points`` maps x to count.  Entries with x <= 0 or count <= 0 are
    dropped before fitting.  The exponent is the negated slope; the
    intercept is in log10 units.
    """
    usable = sorted((x, c) for x, c in points.items() if x > 0 and c > 0)
    if len(usable) < 2:
        raise ValueError(f"need at least 2 usable points, got {len(usable)}")
    lx = np.log10(np.array([x for x, _ in usable], dtype=float))
    ly = np.log10(np.array([c for _, c in usable], dtype=float))
    dx = lx - lx.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise ValueError("all usable points share one x value")
    dy = ly - ly.mean()
    slope = float(dx @ dy) / sxx
    intercept = float(ly.mean() - slope * lx.mean())
    resid = dy - slope * dx
    ss_res = float(resid @ resid)
    ss_tot = float(dy @ dy)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if not math.isfinite(slope):
        raise ValueError("non-finite slope")
    return PowerLawFit(-slope, intercept, r2, len(usable))
