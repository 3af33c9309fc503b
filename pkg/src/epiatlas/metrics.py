"""Metric kinds stored and served by the pipeline.

Cumulative metrics are stored exactly as ingested; daily metrics are
derived views (first value kept, then consecutive differences).  The
`per_capita` and `rolling7` qualifiers are applied at query time, never
stored.
"""
from __future__ import annotations

from enum import Enum


class Metric(str, Enum):
    CASES_CUM = "cases_cum"
    DEATHS_CUM = "deaths_cum"
    CASES_DAILY = "cases_daily"
    DEATHS_DAILY = "deaths_daily"
    VAX_DOSES_CUM = "vax_doses_cum"
    VAX_FULL_CUM = "vax_full_cum"
    VAX_DOSES_DAILY = "vax_doses_daily"
    VAX_FULL_DAILY = "vax_full_daily"
    VISITS_MONTHLY = "visits_monthly"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


CUMULATIVE = frozenset({
    Metric.CASES_CUM, Metric.DEATHS_CUM,
    Metric.VAX_DOSES_CUM, Metric.VAX_FULL_CUM,
})

# daily metric -> the cumulative metric it is derived from
DAILY_SOURCE = {
    Metric.CASES_DAILY: Metric.CASES_CUM,
    Metric.DEATHS_DAILY: Metric.DEATHS_CUM,
    Metric.VAX_DOSES_DAILY: Metric.VAX_DOSES_CUM,
    Metric.VAX_FULL_DAILY: Metric.VAX_FULL_CUM,
}

DAILY_OF = {cum: daily for daily, cum in DAILY_SOURCE.items()}

# metrics the rolling7 qualifier may be applied to (daily or monthly)
SMOOTHABLE = frozenset(DAILY_SOURCE) | {Metric.VISITS_MONTHLY}

# metrics surprise frames are computed on (daily or monthly rates)
SURPRISE_METRICS = frozenset(DAILY_SOURCE) | {Metric.VISITS_MONTHLY}


def parse_metric(name: str) -> Metric:
    try:
        return Metric(name)
    except ValueError:
        valid = ", ".join(m.value for m in Metric)
        raise ValueError(f"unknown metric {name!r}; expected one of: {valid}") from None
