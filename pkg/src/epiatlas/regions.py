"""FIPS region identifiers, state lookup tables, and census region groups.

FIPS codes are the universal join key: 2-digit strings for states,
5-digit zero-padded strings for counties (state code as prefix).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

COUNTY_FIPS_RE = re.compile(r"^[0-9]{5}$")
STATE_FIPS_RE = re.compile(r"^[0-9]{2}$")


@dataclass(frozen=True)
class StateInfo:
    fips: str
    postal: str
    name: str


# 50 states + DC + the territories that appear in public county-level feeds.
_STATES = (
    ("01", "AL", "Alabama"), ("02", "AK", "Alaska"), ("04", "AZ", "Arizona"),
    ("05", "AR", "Arkansas"), ("06", "CA", "California"), ("08", "CO", "Colorado"),
    ("09", "CT", "Connecticut"), ("10", "DE", "Delaware"),
    ("11", "DC", "District of Columbia"), ("12", "FL", "Florida"),
    ("13", "GA", "Georgia"), ("15", "HI", "Hawaii"), ("16", "ID", "Idaho"),
    ("17", "IL", "Illinois"), ("18", "IN", "Indiana"), ("19", "IA", "Iowa"),
    ("20", "KS", "Kansas"), ("21", "KY", "Kentucky"), ("22", "LA", "Louisiana"),
    ("23", "ME", "Maine"), ("24", "MD", "Maryland"), ("25", "MA", "Massachusetts"),
    ("26", "MI", "Michigan"), ("27", "MN", "Minnesota"), ("28", "MS", "Mississippi"),
    ("29", "MO", "Missouri"), ("30", "MT", "Montana"), ("31", "NE", "Nebraska"),
    ("32", "NV", "Nevada"), ("33", "NH", "New Hampshire"), ("34", "NJ", "New Jersey"),
    ("35", "NM", "New Mexico"), ("36", "NY", "New York"),
    ("37", "NC", "North Carolina"), ("38", "ND", "North Dakota"), ("39", "OH", "Ohio"),
    ("40", "OK", "Oklahoma"), ("41", "OR", "Oregon"), ("42", "PA", "Pennsylvania"),
    ("44", "RI", "Rhode Island"), ("45", "SC", "South Carolina"),
    ("46", "SD", "South Dakota"), ("47", "TN", "Tennessee"), ("48", "TX", "Texas"),
    ("49", "UT", "Utah"), ("50", "VT", "Vermont"), ("51", "VA", "Virginia"),
    ("53", "WA", "Washington"), ("54", "WV", "West Virginia"),
    ("55", "WI", "Wisconsin"), ("56", "WY", "Wyoming"),
    ("60", "AS", "American Samoa"), ("66", "GU", "Guam"),
    ("69", "MP", "Northern Mariana Islands"), ("72", "PR", "Puerto Rico"),
    ("78", "VI", "Virgin Islands"),
)

STATE_BY_FIPS = {f: StateInfo(f, p, n) for f, p, n in _STATES}
STATE_BY_POSTAL = {p: StateInfo(f, p, n) for f, p, n in _STATES}
_STATE_BY_NAME = {n.casefold(): StateInfo(f, p, n) for f, p, n in _STATES}

# Census Bureau regions; the dashboard's "East" is the Census Northeast.
REGION_GROUPS: dict[str, frozenset[str]] = {
    "West": frozenset({"AZ", "CO", "ID", "MT", "NV", "NM", "UT", "WY",
                       "AK", "CA", "HI", "OR", "WA"}),
    "Midwest": frozenset({"IL", "IN", "MI", "OH", "WI",
                          "IA", "KS", "MN", "MO", "NE", "ND", "SD"}),
    "South": frozenset({"DE", "FL", "GA", "MD", "NC", "SC", "VA", "DC", "WV",
                        "AL", "KY", "MS", "TN", "AR", "LA", "OK", "TX"}),
    "East": frozenset({"CT", "ME", "MA", "NH", "RI", "VT", "NJ", "NY", "PA"}),
}


@dataclass(frozen=True)
class Region:
    """A spatial unit keyed by FIPS, with optional name and population."""

    fips: str
    name: str = ""
    population: int | None = None


def lookup_state(text: str) -> StateInfo | None:
    """Resolve a state from postal code, full name, or 2-digit FIPS."""
    t = text.strip()
    if not t:
        return None
    if len(t) == 2 and t.upper() in STATE_BY_POSTAL:
        return STATE_BY_POSTAL[t.upper()]
    if STATE_FIPS_RE.match(t):
        return STATE_BY_FIPS.get(t)
    return _STATE_BY_NAME.get(t.casefold())


def is_county_fips(fips: str) -> bool:
    return bool(COUNTY_FIPS_RE.match(fips))


def is_state_fips(fips: str) -> bool:
    return bool(STATE_FIPS_RE.match(fips))


def normalize_fips(text: str, width: int) -> str | None:
    """Zero-pad a numeric FIPS fragment to `width`; None if not plain digits."""
    t = text.strip()
    if not t.isdigit() or len(t) > width:
        return None
    return t.zfill(width)


def state_of(fips: str) -> str:
    """2-digit state prefix of a county (or state) code."""
    return fips[:2]


def group_of_state(postal: str) -> str | None:
    for group, members in REGION_GROUPS.items():
        if postal in members:
            return group
    return None
