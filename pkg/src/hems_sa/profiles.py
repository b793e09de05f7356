"""Hourly time series: CSV ingestion, PV conversion, curve shifting and the netload oracle.

All power values are hourly means, so a value in W is also the energy in Wh
delivered over that hour.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ._validation import N_HOURS, check_fraction, check_hourly
from .exceptions import DataError, MalformedFile, OffsetTooLarge

BUY_PRICE = 0.2977  # EUR/kWh
SELL_PRICE = 0.1231  # EUR/kWh
PERFORMANCE_RATIO = 0.15

UNITS = {
    "consumption": "W",
    "irradiance": "W/m2",
    "generation": "W",
    "buy_price": "EUR/kWh",
    "sell_price": "EUR/kWh",
}

MAX_SHIFT = 12

# positive_netload_after(bundled consumption, bundled generation at 44 m2, 16),
# frozen from a direct summation over the shipped CSVs
BUNDLED_NETLOAD_AFTER_16 = 13126.52  # Wh
BUNDLED_PANEL_AREA = 44.0  # m2


@dataclass(frozen=True)
class HourlyProfile:
    """24 hourly values of one quantity; ``values[0]`` is hour 1."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in UNITS:
            raise DataError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "values", check_hourly(self.values, self.kind))

    @property
    def unit(self) -> str:
        return UNITS[self.kind]

    def at(self, hour: int) -> float:
        """Value at 1-based `hour`."""
        if not 1 <= hour <= N_HOURS:
            raise IndexError(f"hour {hour} outside 1..{N_HOURS}")
        return float(self.values[hour - 1])

    def with_values(self, values) -> "HourlyProfile":
        return HourlyProfile(values, self.kind)

    @classmethod
    def constant(cls, value: float, kind: str) -> "HourlyProfile":
        return cls(np.full(N_HOURS, float(value)), kind)

    def __eq__(self, other):
        if not isinstance(other, HourlyProfile):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.kind, self.values.tobytes()))


@dataclass(frozen=True)
class PanelSpec:
    area: float  # m2
    performance_ratio: float = PERFORMANCE_RATIO

    def __post_init__(self):
        if not (math.isfinite(self.area) and self.area > 0):
            raise DataError(f"panel area must be > 0, got {self.area}")
        check_fraction(self.performance_ratio, "performance_ratio")


@dataclass(frozen=True)
class PricingScheme:
    buy: HourlyProfile
    sell: HourlyProfile

    def __post_init__(self):
        if self.buy.kind != "buy_price" or self.sell.kind != "sell_price":
            raise DataError("pricing profiles must have kinds buy_price and sell_price")

    @classmethod
    def flat(cls, buy: float = BUY_PRICE, sell: float = SELL_PRICE) -> "PricingScheme":
        return cls(HourlyProfile.constant(buy, "buy_price"), HourlyProfile.constant(sell, "sell_price"))


def load_profile(path, kind: str) -> HourlyProfile:
    """Read a header-less ``hour,value`` CSV with hours 1..24."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedFile(f"{path}: not UTF-8 text") from exc

    rows = [row for row in csv.reader(text.splitlines()) if row and any(c.strip() for c in row)]
    if len(rows) != N_HOURS:
        raise MalformedFile(f"{path}: expected {N_HOURS} rows, found {len(rows)}")

    values = [None] * N_HOURS
    for lineno, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise MalformedFile(f"{path}:{lineno}: expected 'hour,value'")
        try:
            hour = int(row[0].strip())
            value = float(row[1].strip())
        except ValueError as exc:
            raise MalformedFile(f"{path}:{lineno}: non-numeric field") from exc
        if not 1 <= hour <= N_HOURS:
            raise MalformedFile(f"{path}:{lineno}: hour {hour} outside 1..{N_HOURS}")
        if values[hour - 1] is not None:
            raise MalformedFile(f"{path}:{lineno}: duplicate hour {hour}")
        if not math.isfinite(value):
            raise MalformedFile(f"{path}:{lineno}: non-finite value")
        values[hour - 1] = value
    # 24 rows with no duplicates covers every hour, so no gap check is needed.
    return HourlyProfile(np.array(values), kind)


def save_profile(profile: HourlyProfile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for hour, value in enumerate(profile.values, start=1):
            fh.write(f"{hour},{float(value)!r}\n")


def bundled_profile_path(name: str) -> Path:
    """Path of a CSV or JSON file shipped in ``hems_sa/data``."""
    return Path(str(resources.files("hems_sa") / "data" / name))


def bundled_profiles() -> tuple[HourlyProfile, HourlyProfile]:
    """The synthetic (consumption, irradiance) pair shipped with the package."""
    return (
        load_profile(bundled_profile_path("consumption.csv"), "consumption"),
        load_profile(bundled_profile_path("irradiance.csv"), "irradiance"),
    )


def irradiance_to_power(irr: HourlyProfile, panel: PanelSpec) -> HourlyProfile:
    if irr.kind != "irradiance":
        raise DataError(f"expected an irradiance profile, got {irr.kind}")
    return HourlyProfile(irr.values * panel.area * panel.performance_ratio, "generation")


def shift_profile(p: HourlyProfile, offset: int) -> HourlyProfile:
    """Shift a profile by `offset` hours; negative moves the curve earlier.

    Hours whose source lies outside the day are filled with 0.
    """
    offset = int(offset)
    if abs(offset) > MAX_SHIFT:
        raise OffsetTooLarge(f"|offset| must be <= {MAX_SHIFT}, got {offset}")
    out = np.zeros(N_HOURS)
    if offset >= 0:
        out[offset:] = p.values[: N_HOURS - offset]
    else:
        out[:offset] = p.values[-offset:]
    return p.with_values(out)


def positive_netload_after(consumption: HourlyProfile, generation: HourlyProfile, cutoff_hour: int) -> float:
    """Energy (Wh) of consumption not covered by generation in hours after `cutoff_hour`."""
    if not 0 <= cutoff_hour <= N_HOURS:
        raise DataError(f"cutoff_hour must lie in 0..{N_HOURS}, got {cutoff_hour}")
    shortfall = np.maximum(consumption.values - generation.values, 0.0)
    # accumulate from hour 24 backwards so the result is exactly monotone in cutoff_hour
    suffix = np.concatenate([np.cumsum(shortfall[::-1])[::-1], [0.0]])
    return float(suffix[cutoff_hour])


def last_generation_hour(generation: HourlyProfile) -> int:
    """Last 1-based hour with nonzero generation (0 if the profile is all zero)."""
    nz = np.flatnonzero(generation.values > 0)
    return int(nz[-1]) + 1 if nz.size else 0


def last_surplus_hour(consumption: HourlyProfile, generation: HourlyProfile) -> int:
    """Last 1-based hour where generation exceeds consumption (0 if none).

    A battery filled from PV surplus can only serve deficits after this hour,
    so ``positive_netload_after(consumption, generation, last_surplus_hour(...))``
    bounds the capacity the day-ahead plan can use.
    """
    nz = np.flatnonzero(generation.values > consumption.values)
    return int(nz[-1]) + 1 if nz.size else 0
