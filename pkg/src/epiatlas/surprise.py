"""Bayesian surprise over a space of candidate rate models.

Candidate models produce per-region expected daily (or monthly) per-capita
rates.  Observations update a plausibility distribution over the models;
per-region surprise is the KL divergence, in bits, between the region's
posterior and the shared prior.  Surprise is signed by the region's
deviation from the belief-weighted consensus expectation.

The update schedule is two-level: per-region posteriors drive per-region
surprise, while the shared belief advances using the geometric mean of the
regional likelihoods, so a single date shifts beliefs by a bounded amount
no matter how many regions report.

Likelihoods use a binomial-normal approximation: with expected rate p and
population n, an observed count k has z = (k/n - p) / sqrt(p(1-p)/n) and
likelihood exp(-z^2/2).  Small populations produce wide funnels and small
surprise; the same rate residual in a large region is strong evidence.
"""
from __future__ import annotations

import datetime as dt
import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .jsonutil import clean_float
from .metrics import Metric, SURPRISE_METRICS
from .store import Snapshot

logger = logging.getLogger(__name__)

EPS_FLOOR = 1e-12  # floor on likelihoods and belief weights
EPS_P = 1e-9       # expected-rate clamp keeping sigma finite

_TRAILING_NAME = re.compile(r"^trailing_base_rate_(\d+)$")


class ModelKind(str, Enum):
    UNIFORM = "uniform"
    POPULATION_PROPORTIONAL = "population_proportional"
    FOOT_TRAFFIC_PROPORTIONAL = "foot_traffic_proportional"
    TRAILING_BASE_RATE = "trailing_base_rate"


@dataclass(frozen=True)
class ModelSpec:
    """A named generative expectation over regions."""

    name: str
    kind: ModelKind
    window: int | None = None  # trailing_base_rate only

    def __post_init__(self):
        if self.kind is ModelKind.TRAILING_BASE_RATE:
            if self.window is None or self.window < 1:
                raise ValueError("trailing_base_rate requires window >= 1")
        elif self.window is not None:
            raise ValueError(f"{self.kind.value} takes no window")

    def parameters(self) -> dict:
        return {"window": self.window} if self.window is not None else {}


def uniform_model() -> ModelSpec:
    return ModelSpec("uniform", ModelKind.UNIFORM)


def population_model() -> ModelSpec:
    return ModelSpec("population_proportional", ModelKind.POPULATION_PROPORTIONAL)


def foot_traffic_model() -> ModelSpec:
    return ModelSpec("foot_traffic_proportional", ModelKind.FOOT_TRAFFIC_PROPORTIONAL)


def trailing_model(window: int) -> ModelSpec:
    return ModelSpec(f"trailing_base_rate_{window}", ModelKind.TRAILING_BASE_RATE, window)


def parse_model_name(name: str) -> ModelSpec:
    if name == "uniform":
        return uniform_model()
    if name == "population_proportional":
        return population_model()
    if name == "foot_traffic_proportional":
        return foot_traffic_model()
    m = _TRAILING_NAME.match(name)
    if m:
        window = int(m.group(1))
        if window >= 1:
            return trailing_model(window)
    raise ValueError(f"unknown model {name!r}")


def default_models(snapshot: Snapshot | None = None) -> list[ModelSpec]:
    """Default model space; foot traffic joins once patterns data is loaded."""
    models = [uniform_model(), population_model(), trailing_model(14)]
    if snapshot is not None and snapshot.regions(Metric.VISITS_MONTHLY):
        models.append(foot_traffic_model())
    return models


@dataclass(frozen=True)
class BeliefState:
    """Normalized plausibility weights over an ordered model set."""

    models: tuple[ModelSpec, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.models) != len(self.weights):
            raise ValueError("models and weights length mismatch")
        if not self.models:
            raise ValueError("belief requires at least one model")
        if any(w < EPS_FLOOR for w in self.weights):
            raise ValueError(f"belief weight below floor {EPS_FLOOR}")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"belief weights sum to {total}, not 1")

    @classmethod
    def uniform(cls, models: Sequence[ModelSpec]) -> "BeliefState":
        models = tuple(models)
        if not models:
            raise ValueError("at least one model required")
        return cls(models, tuple(1.0 / len(models) for _ in models))

    def weight_of(self, name: str) -> float:
        for model, w in zip(self.models, self.weights):
            if model.name == name:
                return w
        raise KeyError(name)


def kl_divergence(posterior: Sequence[float], prior: Sequence[float]) -> float:
    """KL(posterior || prior) in bits; non-negative by Gibbs' inequality."""
    p = [float(x) for x in posterior]
    q = [float(x) for x in prior]
    if len(p) != len(q):
        raise ValueError("distributions differ in length")
    for dist in (p, q):
        if any(not math.isfinite(x) or x < EPS_FLOOR for x in dist):
            raise ValueError(f"distribution entries must be finite and >= {EPS_FLOOR}")
        total = math.fsum(dist)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"distribution sums to {total}, not 1")
    bits = math.fsum(pi * math.log2(pi / qi) for pi, qi in zip(p, q))
    return max(bits, 0.0)


def bayes_update(prior: BeliefState, likelihoods: Sequence[float]) -> BeliefState:
    """Posterior ∝ prior × likelihood, floored and renormalized."""
    if len(likelihoods) != len(prior.models):
        raise ValueError("likelihood vector length does not match model count")
    ls = []
    for l in likelihoods:
        l = float(l)
        if not math.isfinite(l) or l <= 0.0:
            raise ValueError("likelihoods must be finite and positive")
        ls.append(max(l, EPS_FLOOR))
    products = [w * l for w, l in zip(prior.weights, ls)]
    total = math.fsum(products)
    weights = tuple(max(p / total, EPS_FLOOR) for p in products)
    return BeliefState(prior.models, weights)


def likelihood(observed_count: float, expected_rate: float, population: float) -> float:
    """Unnormalized model likelihood of one regional observation."""
    if population <= 0:
        raise ValueError("population must be positive")
    p_hat = min(max(expected_rate, EPS_P), 1.0 - EPS_P)
    sigma = math.sqrt(p_hat * (1.0 - p_hat) / population)
    z = (observed_count / population - p_hat) / sigma
    return max(math.exp(-0.5 * z * z), EPS_FLOOR)


class FrameEntry:
    """Per-region surprise for one date."""

    __slots__ = ("fips", "observed_rate", "consensus_expected_rate",
                 "surprise_bits", "signed_surprise")

    def __init__(self, fips: str, observed_rate: float, consensus_expected_rate: float,
                 surprise_bits: float, signed_surprise: float):
        self.fips = fips
        self.observed_rate = observed_rate
        self.consensus_expected_rate = consensus_expected_rate
        self.surprise_bits = surprise_bits
        self.signed_surprise = signed_surprise

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (f"FrameEntry({self.fips}, obs={self.observed_rate:.6g}, "
                f"exp={self.consensus_expected_rate:.6g}, "
                f"signed={self.signed_surprise:.6g})")


class SurpriseFrame:
    """Per-region signed surprise for one date and metric.

    Entries are materialized on demand from column arrays so long runs over
    thousands of regions stay cheap.
    """

    __slots__ = ("date", "metric", "models", "regions",
                 "observed", "expected", "surprise", "signed")

    def __init__(self, date: dt.date, metric: Metric, models: tuple[str, ...],
                 regions: tuple[str, ...], observed: np.ndarray, expected: np.ndarray,
                 surprise: np.ndarray, signed: np.ndarray):
        self.date = date
        self.metric = metric
        self.models = models
        self.regions = regions
        self.observed = observed
        self.expected = expected
        self.surprise = surprise
        self.signed = signed

    def __len__(self) -> int:
        return len(self.regions)

    def entries(self) -> list[FrameEntry]:
        return [FrameEntry(fips, float(o), float(e), float(s), float(g))
                for fips, o, e, s, g in zip(self.regions, self.observed,
                                            self.expected, self.surprise, self.signed)]

    def entry(self, fips: str) -> FrameEntry:
        i = self.regions.index(fips)
        return FrameEntry(fips, float(self.observed[i]), float(self.expected[i]),
                          float(self.surprise[i]), float(self.signed[i]))

    def to_json_obj(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "metric": self.metric.value,
            "models": list(self.models),
            "entries": [
                {"fips": fips,
                 "observed": clean_float(float(o)),
                 "expected": clean_float(float(e)),
                 "surprise": clean_float(float(s)),
                 "signed": clean_float(float(g))}
                for fips, o, e, s, g in zip(self.regions, self.observed,
                                            self.expected, self.surprise, self.signed)
            ],
        }

    def to_csv_rows(self) -> Iterator[list]:
        for fips, o, e, s, g in zip(self.regions, self.observed, self.expected,
                                    self.surprise, self.signed):
            yield [self.date.isoformat(), self.metric.value, fips,
                   repr(clean_float(float(o))), repr(clean_float(float(e))),
                   repr(clean_float(float(s))), repr(clean_float(float(g)))]


class _Panel:
    """Zero-filled daily (or monthly) counts for the regions in scope.

    Regions are held in sorted FIPS order, which makes every aggregate
    independent of input order; sums over regions use exact compensated
    summation (math.fsum).
    """

    def __init__(self, metric: Metric, regions: list[str], pops: np.ndarray,
                 dates: list[dt.date], start_index: int, counts: np.ndarray,
                 month_visits: dict[str, np.ndarray], excluded: list[str]):
        self.metric = metric
        self.regions = tuple(regions)
        self.pops = pops
        self.dates = dates
        self.start_index = start_index
        self.counts = counts
        self.rates = counts / pops[None, :] if len(regions) else counts
        self.rate_csum = np.cumsum(self.rates, axis=0) if len(dates) else self.rates
        self.month_visits = month_visits
        self.excluded = excluded
        self.pop_total = math.fsum(pops) if len(regions) else 0.0

    @property
    def output_dates(self) -> list[dt.date]:
        return self.dates[self.start_index:]

    def expected_rates_at(self, model: ModelSpec, i: int) -> np.ndarray | None:
        """Per-region expected rate vector at date index i; None = abstain."""
        n = len(self.regions)
        if n == 0:
            return None
        total = math.fsum(self.counts[i])
        if model.kind is ModelKind.UNIFORM:
            return (total / n) / self.pops
        if model.kind is ModelKind.POPULATION_PROPORTIONAL:
            return np.full(n, total / self.pop_total)
        if model.kind is ModelKind.FOOT_TRAFFIC_PROPORTIONAL:
            visits = self.month_visits.get(self.dates[i].strftime("%Y-%m"))
            if visits is None:
                return None
            visit_total = math.fsum(visits)
            if visit_total <= 0:
                return None
            return total * (visits / visit_total) / self.pops
        if model.kind is ModelKind.TRAILING_BASE_RATE:
            if i == 0:
                return None
            lo = max(0, i - int(model.window or 1))
            span = i - lo
            high = self.rate_csum[i - 1]
            low = self.rate_csum[lo - 1] if lo > 0 else 0.0
            return (high - low) / span
        raise AssertionError(f"unhandled model kind {model.kind}")


def _build_panel(snapshot: Snapshot, metric: Metric, start: dt.date, end: dt.date,
                 lookback: int, need_visits: bool = True) -> _Panel:
    if metric not in SURPRISE_METRICS:
        raise ValueError(
            f"surprise is computed on daily or monthly rates, not {metric.value}")
    level = snapshot.metric_level(metric)
    in_scope: list[str] = []
    excluded: list[str] = []
    for region in snapshot.regions(metric):
        if len(region) != level:
            continue
        if snapshot.population(region) is None:
            excluded.append(region)
        else:
            in_scope.append(region)
    in_scope.sort()
    pops = np.asarray([float(snapshot.population(r)) for r in in_scope])

    bounds = snapshot.date_bounds(metric)
    if bounds is None or start > end:
        return _Panel(metric, in_scope, pops, [], 0,
                      np.zeros((0, len(in_scope))), {}, excluded)
    clip_start = max(start, bounds[0])
    clip_end = min(end, bounds[1])
    if clip_start > clip_end:
        return _Panel(metric, in_scope, pops, [], 0,
                      np.zeros((0, len(in_scope))), {}, excluded)

    if metric is Metric.VISITS_MONTHLY:
        all_ords = sorted({int(o) for region in in_scope
                           for o in (snapshot.arrays(region, metric) or ((), ()))[0]})
        panel_ords = [o for o in all_ords if o <= clip_end.toordinal()]
        dates = [dt.date.fromordinal(o) for o in panel_ords]
        start_index = len([d for d in dates if d < clip_start])
    else:
        panel_start = max(bounds[0], clip_start - dt.timedelta(days=lookback))
        dates = [panel_start + dt.timedelta(days=k)
                 for k in range((clip_end - panel_start).days + 1)]
        start_index = (clip_start - panel_start).days

    index_of = {d.toordinal(): k for k, d in enumerate(dates)}
    counts = np.zeros((len(dates), len(in_scope)))
    for col, region in enumerate(in_scope):
        arrs = snapshot.arrays(region, metric)
        if arrs is None:
            continue
        ords, vals = arrs
        for o, v in zip(ords, vals):
            k = index_of.get(int(o))
            if k is not None:
                counts[k, col] = v

    month_visits: dict[str, np.ndarray] = {}
    if need_visits:
        for month in sorted({d.strftime("%Y-%m") for d in dates}):
            first = dt.date(int(month[:4]), int(month[5:]), 1)
            visits = [snapshot.value_at(r, Metric.VISITS_MONTHLY, first) for r in in_scope]
            if any(v is not None for v in visits):
                month_visits[month] = np.asarray([v or 0.0 for v in visits])

    return _Panel(metric, in_scope, pops, dates, start_index, counts,
                  month_visits, excluded)


def _max_lookback(models: Iterable[ModelSpec]) -> int:
    return max((m.window or 0 for m in models), default=0)


def _needs_visits(models: Iterable[ModelSpec]) -> bool:
    return any(m.kind is ModelKind.FOOT_TRAFFIC_PROPORTIONAL for m in models)


def _step(panel: _Panel, i: int, belief: BeliefState) -> tuple[SurpriseFrame, BeliefState]:
    """One date: per-region posteriors and surprise, then the global update."""
    n = len(panel.regions)
    date = panel.dates[i]
    model_names = tuple(m.name for m in belief.models)
    if n == 0:
        empty = np.zeros(0)
        return SurpriseFrame(date, panel.metric, model_names, (), empty, empty,
                             empty, empty), belief

    n_models = len(belief.models)
    weights = np.asarray(belief.weights)
    likelihoods = np.ones((n_models, n))
    expected: list[np.ndarray | None] = []
    observed = panel.rates[i]
    for m, model in enumerate(belief.models):
        rates = panel.expected_rates_at(model, i)
        expected.append(rates)
        if rates is None:
            continue  # abstaining model: uninformative likelihood 1
        p_hat = np.clip(rates, EPS_P, 1.0 - EPS_P)
        sigma = np.sqrt(p_hat * (1.0 - p_hat) / panel.pops)
        z = (observed - p_hat) / sigma
        likelihoods[m] = np.maximum(np.exp(-0.5 * z * z), EPS_FLOOR)

    # per-region posterior and KL surprise against the shared prior
    posterior = likelihoods.T * weights[None, :]
    posterior /= posterior.sum(axis=1)[:, None]
    posterior = np.maximum(posterior, EPS_FLOOR)
    bits = np.sum(posterior * np.log2(posterior / weights[None, :]), axis=1)
    bits = np.maximum(bits, 0.0)

    # consensus expectation over non-abstaining models, used only for the sign
    active = [m for m, e in enumerate(expected) if e is not None]
    if active:
        active_weight = math.fsum(belief.weights[m] for m in active)
        consensus = np.zeros(n)
        for m in active:
            consensus += (belief.weights[m] / active_weight) * expected[m]
    else:
        consensus = observed.copy()  # no expectation: zero deviation by definition

    deviation = observed - consensus
    signed = np.sign(deviation) * bits
    signed[signed == 0.0] = 0.0  # normalize -0.0

    # global update from the geometric mean of regional likelihoods
    log_l = np.log(likelihoods)
    tempered = [math.exp(math.fsum(log_l[m]) / n) for m in range(n_models)]
    new_belief = bayes_update(belief, tempered)

    frame = SurpriseFrame(date, panel.metric, model_names, panel.regions,
                          _ro(observed.copy()), _ro(consensus), _ro(bits), _ro(signed))
    return frame, new_belief


def _ro(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def expected_rates(model: ModelSpec, date: dt.date, metric: Metric,
                   snapshot: Snapshot) -> dict[str, float] | None:
    """Per-region expected per-capita rate for one date; None if the model
    abstains (missing foot-traffic month, or no history for a trailing model).
    """
    panel = _build_panel(snapshot, metric, date, date, _max_lookback([model]),
                     need_visits=_needs_visits([model]))
    if not panel.output_dates:
        return {}
    i = panel.start_index
    rates = panel.expected_rates_at(model, i)
    if rates is None:
        return None
    return {region: float(rate) for region, rate in zip(panel.regions, rates)}


def compute_surprise_frame(date: dt.date, metric: Metric, belief: BeliefState,
                           snapshot: Snapshot) -> tuple[SurpriseFrame, BeliefState]:
    """Surprise frame for one date plus the advanced belief state."""
    panel = _build_panel(snapshot, metric, date, date, _max_lookback(belief.models),
                     need_visits=_needs_visits(belief.models))
    if panel.excluded:
        logger.warning("%d region(s) excluded for missing population: %s",
                       len(panel.excluded), ", ".join(panel.excluded[:10]))
    if not panel.output_dates:
        empty = np.zeros(0)
        frame = SurpriseFrame(date, metric, tuple(m.name for m in belief.models),
                              (), empty, empty, empty, empty)
        return frame, belief
    return _step(panel, panel.start_index, belief)


def surprise_steps(metric: Metric, start: dt.date, end: dt.date,
                   models: Sequence[ModelSpec],
                   snapshot: Snapshot) -> Iterator[tuple[SurpriseFrame, BeliefState]]:
    """Sequential frames over [start, end] clipped to the data range.

    Beliefs initialize uniform at the first date; each date's posterior is
    the next date's prior.  Yields (frame, belief after the frame's update).
    """
    if start > end:
        raise ValueError(f"start {start} is after end {end}")
    if not models:
        raise ValueError("at least one model required")
    panel = _build_panel(snapshot, metric, start, end, _max_lookback(models),
                     need_visits=_needs_visits(models))
    if panel.excluded:
        logger.warning("%d region(s) excluded for missing population: %s",
                       len(panel.excluded), ", ".join(panel.excluded[:10]))
    belief = BeliefState.uniform(models)
    for i in range(panel.start_index, len(panel.dates)):
        frame, belief = _step(panel, i, belief)
        yield frame, belief


def run_surprise_range(metric: Metric, start: dt.date, end: dt.date,
                       models: Sequence[ModelSpec],
                       snapshot: Snapshot) -> list[SurpriseFrame]:
    """Deterministic list of frames for [start, end] ∩ loaded data."""
    return [frame for frame, _ in surprise_steps(metric, start, end, models, snapshot)]
