"""Histogram comparison metrics and generation campaigns.

The main quality metric is the mean absolute percentage error (MAPE)
between a target histogram and the histogram achieved by a generated
topology, computed bin by bin.  Campaigns run a generator many times with
derived seeds and keep the best topology under a chosen metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DisjointHistogramsError, GenerationError, InvalidParamsError
from .model import Topology, degree_histogram

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DegreeDistribution:
    """Target distribution of node degrees, e.g. ``{2: 0.227, 3: 0.409}``."""

    probabilities: Mapping[int, float]

    def __post_init__(self):
        items = sorted(self.probabilities.items())
        if not items:
            raise InvalidParamsError("degree distribution is empty")
        for d, p in items:
            if int(d) != d or d < 1:
                raise InvalidParamsError(f"degree {d!r} must be an integer >= 1")
            if p < 0:
                raise InvalidParamsError(f"probability for degree {d} is negative")
        total = sum(p for _, p in items)
        if abs(total - 1.0) > _SUM_TOL:
            raise InvalidParamsError(f"degree probabilities sum to {total}, expected 1")
        object.__setattr__(self, "probabilities", dict(items))

    def degrees(self) -> list[int]:
        return list(self.probabilities)

    def support(self) -> list[int]:
        return [d for d, p in self.probabilities.items() if p > 0]

    def as_histogram(self) -> dict[int, float]:
        return {d: p for d, p in self.probabilities.items() if p > 0}

    def average(self) -> float:
        return sum(d * p for d, p in self.probabilities.items())

    @classmethod
    def parse(cls, text: str) -> "DegreeDistribution":
        """Parse an inline spec such as ``2:0.227,3:0.409,4:0.273,5:0.091``."""
        probs = {}
        try:
            for part in text.split(","):
                k, v = part.split(":")
                probs[int(k)] = float(v)
        except ValueError as exc:
            raise InvalidParamsError(f"bad degree spec {text!r}") from exc
        return cls(probs)


@dataclass(frozen=True)
class DistanceRanges:
    """Link-length bins in km with optional target proportions."""

    bins: Sequence[tuple[float, float]]
    targets: Sequence[float] | None = None

    def __post_init__(self):
        bins = [(float(a), float(b)) for a, b in self.bins]
        if not bins:
            raise InvalidParamsError("distance ranges are empty")
        prev = None
        for lo, hi in bins:
            if not (hi > lo >= 0):
                raise InvalidParamsError(f"bad range ({lo}, {hi})")
            if prev is not None and lo < prev:
                raise InvalidParamsError("ranges must be ascending and non-overlapping")
            prev = hi
        object.__setattr__(self, "bins", tuple(bins))
        if self.targets is not None:
            t = [float(x) for x in self.targets]
            if len(t) != len(bins):
                raise InvalidParamsError("targets must match the number of ranges")
            if any(x < 0 for x in t):
                raise InvalidParamsError("range targets must be non-negative")
            # Published range proportions are rounded per bin and often miss
            # 100% by a few tenths, so allow slack that a sampling
            # distribution would not get.
            if abs(sum(t) - 1.0) > 0.01:
                raise InvalidParamsError(f"range targets sum to {sum(t)}, expected 1")
            object.__setattr__(self, "targets", tuple(t))

    def labels(self) -> list[str]:
        return [f"{_fmt(lo)}-{_fmt(hi)}" for lo, hi in self.bins]

    def max_km(self) -> float:
        return self.bins[-1][1]

    def target_histogram(self) -> dict[str, float]:
        if self.targets is None:
            raise InvalidParamsError("ranges carry no target proportions")
        return dict(zip(self.labels(), self.targets))

    @classmethod
    def parse(cls, text: str) -> "DistanceRanges":
        """Parse an inline spec such as ``0-50:0.155,50-100:0.169``."""
        bins, targets = [], []
        try:
            for part in text.split(","):
                rng, p = part.rsplit(":", 1)
                lo, hi = rng.split("-")
                bins.append((float(lo), float(hi)))
                targets.append(float(p))
        except ValueError as exc:
            raise InvalidParamsError(f"bad range spec {text!r}") from exc
        return cls(bins, targets)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)


#: Default degree statistics of a national backbone.
DEFAULT_BACKBONE_DEGREES = DegreeDistribution({2: 0.227, 3: 0.409, 4: 0.273, 5: 0.091})

#: Default link-length ranges (km) for backbone links.
DEFAULT_BACKBONE_RANGES = DistanceRanges(
    bins=[(0, 50), (50, 100), (100, 200), (200, 400), (400, 600)],
    targets=[0.155, 0.169, 0.338, 0.254, 0.085],
)

#: Default link-length ranges (km) for metro core links.
DEFAULT_METRO_RANGES = DistanceRanges(
    bins=[(0, 10), (10, 40), (40, 80), (80, 120)],
    targets=[0.39, 0.37, 0.21, 0.03],
)


def mape(target: Mapping, achieved: Mapping) -> float:
    """Mean absolute percentage error between two histograms.

    Bins are compared on the support of ``target``; bins with a zero
    target are skipped (their achieved mass is reported separately by
    :func:`compare_histograms`).  A missing achieved bin counts as zero.
    """
    support = [k for k, v in target.items() if v > 0]
    if not support:
        raise DisjointHistogramsError("target histogram has no positive bins")
    if achieved and not any(k in achieved and achieved[k] > 0 for k in support):
        if not set(achieved) & set(target):
            raise DisjointHistogramsError("histograms share no bins")
    err = 0.0
    for k in support:
        t = target[k]
        a = achieved.get(k, 0.0)
        err += abs(a - t) / t
    return err / len(support)


def compare_histograms(target: Mapping, achieved: Mapping) -> tuple[float, float]:
    """Return ``(mape, other_mass)``.

    ``other_mass`` is the achieved proportion falling on bins that are
    absent from the target support (or have a zero target).
    """
    score = mape(target, achieved)
    support = {k for k, v in target.items() if v > 0}
    other = sum(v for k, v in achieved.items() if k not in support)
    return score, other


def range_histogram(lengths_km, ranges: DistanceRanges) -> tuple[dict[str, float], float]:
    """Bin link lengths into ``ranges``; returns (histogram, outside_mass).

    Bins are half-open ``[lo, hi)`` except the last, which includes its
    upper bound.  Proportions are over all supplied lengths, so the
    histogram plus the outside mass sums to 1.
    """
    arr = np.asarray(list(lengths_km), dtype=float)
    labels = ranges.labels()
    if arr.size == 0:
        return {lab: 0.0 for lab in labels}, 0.0
    hist = {}
    covered = np.zeros(arr.shape, dtype=bool)
    last = len(ranges.bins) - 1
    for i, (lo, hi) in enumerate(ranges.bins):
        if i == last:
            sel = (arr >= lo) & (arr <= hi)
        else:
            sel = (arr >= lo) & (arr < hi)
        sel &= ~covered
        covered |= sel
        hist[labels[i]] = float(sel.sum()) / arr.size
    outside = 1.0 - float(covered.sum()) / arr.size
    return hist, outside


@dataclass
class ValidationReport:
    """Achieved-vs-target statistics for one topology."""

    degree_target: dict[int, float] | None = None
    degree_achieved: dict[int, float] | None = None
    degree_mape: float | None = None
    degree_other: float | None = None
    distance_target: dict[str, float] | None = None
    distance_achieved: dict[str, float] | None = None
    distance_mape: float | None = None
    distance_other: float | None = None

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if v is None:
                continue
            if isinstance(v, dict):
                out[k] = {str(kk): float(vv) for kk, vv in v.items()}
            else:
                out[k] = float(v)
        return out


def validate_topology(
    topo: Topology,
    degrees: DegreeDistribution | None = None,
    ranges: DistanceRanges | None = None,
) -> ValidationReport:
    """Build a :class:`ValidationReport` for the supplied targets."""
    report = ValidationReport()
    if degrees is not None:
        target = degrees.as_histogram()
        achieved = degree_histogram(topo)
        score, other = compare_histograms(target, achieved)
        report.degree_target = target
        report.degree_achieved = achieved
        report.degree_mape = score
        report.degree_other = other
    if ranges is not None and ranges.targets is not None:
        target = ranges.target_histogram()
        lengths = [l.length_km for l in topo.links()]
        achieved, outside = range_histogram(lengths, ranges)
        score = mape(target, achieved)
        report.distance_target = target
        report.distance_achieved = achieved
        report.distance_mape = score
        report.distance_other = outside
    return report


@dataclass
class CampaignResult:
    best_index: int
    best_seed: int
    best_score: float
    best_topology: Topology
    best_report: ValidationReport
    average_score: float
    scores: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    failures: int = 0


def best_of_n(
    generate: Callable[[int], Topology],
    n: int,
    metric: str = "degree",
    degrees: DegreeDistribution | None = None,
    ranges: DistanceRanges | None = None,
    seeds: Sequence[int] | None = None,
    base_seed: int = 0,
) -> CampaignResult:
    """Run ``generate(seed)`` ``n`` times and keep the best topology.

    ``metric`` selects the score: ``"degree"`` or ``"distance"`` MAPE.
    Seeds default to ``base_seed + i`` so a campaign is reproducible; an
    explicit seed list overrides.  Ties keep the lowest iteration index.
    """
    if n < 1:
        raise InvalidParamsError("campaign needs n >= 1")
    if metric not in ("degree", "distance"):
        raise InvalidParamsError(f"unknown metric {metric!r}")
    if metric == "degree" and degrees is None:
        raise InvalidParamsError("degree metric needs a degree distribution")
    if metric == "distance" and (ranges is None or ranges.targets is None):
        raise InvalidParamsError("distance metric needs ranges with targets")
    if seeds is None:
        seeds = [base_seed + i for i in range(n)]
    elif len(seeds) != n:
        raise InvalidParamsError("seed list length must equal n")

    best = None  # (score, index)
    best_topo, best_report = None, None
    scores: list[float] = []
    failures = 0
    for i, seed in enumerate(seeds):
        try:
            topo = generate(int(seed))
        except GenerationError:
            failures += 1
            scores.append(math.inf)
            continue
        report = validate_topology(topo, degrees=degrees, ranges=ranges)
        score = report.degree_mape if metric == "degree" else report.distance_mape
        scores.append(score)
        if best is None or score < best[0]:
            best = (score, i)
            best_topo, best_report = topo, report
    if best is None:
        raise GenerationError("all campaign iterations failed", attempts=n)
    finite = [s for s in scores if math.isfinite(s)]
    return CampaignResult(
        best_index=best[1],
        best_seed=int(seeds[best[1]]),
        best_score=best[0],
        best_topology=best_topo,
        best_report=best_report,
        average_score=sum(finite) / len(finite),
        scores=scores,
        seeds=[int(s) for s in seeds],
        failures=failures,
    )
