"""Integer-picosecond time, drifting clocks and the clock-error budget."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ClockDomain

TICKS_PER_SECOND = 10**12
SECONDS_PER_DAY = 86_400
TICKS_PER_DAY = SECONDS_PER_DAY * TICKS_PER_SECOND
SPEED_OF_LIGHT = 299_792_458.0

_LIMIT = 2**63


@dataclass(frozen=True, order=True)
class Instant:
    """Picoseconds since the scenario epoch."""

    ticks: int

    def __post_init__(self):
        t = int(self.ticks)
        if not -_LIMIT < t < _LIMIT:
            raise OverflowError(f"instant {t} ps outside signed 64-bit range")
        object.__setattr__(self, "ticks", t)

    @classmethod
    def from_seconds(cls, s) -> "Instant":
        # repr() keeps decimal literals such as 1e-6 exact before rounding
        frac = Fraction(repr(s)) if isinstance(s, float) else Fraction(s)
        return cls(round(frac * TICKS_PER_SECOND))

    @property
    def seconds(self) -> float:
        return self.ticks / TICKS_PER_SECOND

    def shifted(self, ticks: int) -> "Instant":
        return Instant(self.ticks + int(ticks))

    def __sub__(self, other: "Instant") -> int:
        return self.ticks - other.ticks


def elapsed_days(since: Instant, until: Instant) -> float:
    return (until.ticks - since.ticks) / TICKS_PER_DAY


@dataclass(frozen=True)
class ClockModel:
    """Affine worst-case clock: constant offset plus linear drift.

    ``drift_rate`` is a magnitude in seconds per day; the sign is supplied per
    read so one model covers both fast and slow clocks.
    """

    initial_offset: float = 0.0
    drift_rate: float = 0.0
    last_sync: Instant = Instant(0)
    validity_period: float = 30.0

    def __post_init__(self):
        if self.drift_rate < 0:
            raise ValueError("drift_rate is a magnitude and must be >= 0")
        if not self.validity_period > 0:
            raise ValueError("validity_period must be > 0 days")


PERFECT_CLOCK = ClockModel(validity_period=1e6)


def read(clock: ClockModel, true_time: Instant, drift_sign: int = 1) -> Instant:
    """Reading of ``clock`` at ``true_time``, rounded to the nearest tick."""
    if drift_sign not in (1, -1):
        raise ValueError("drift_sign must be +1 or -1")
    elapsed = true_time.ticks - clock.last_sync.ticks
    if elapsed < 0:
        raise ClockDomain(f"read {elapsed} ps before last sync")
    # rate [s/day] * elapsed [ps] / 86400 [s/day] gives the drift in ps.
    drift = drift_sign * clock.drift_rate * elapsed / SECONDS_PER_DAY
    return Instant(true_time.ticks + round(clock.initial_offset * TICKS_PER_SECOND + drift))


def accumulated_position_error(delta_t: float, T: float, c: float) -> float:
    """Position error (m) accumulated by a clock drifting ``delta_t`` s/day
    over ``T`` days, at signal speed ``c``."""
    return c * (delta_t * T)


def expired(clock: ClockModel, true_time: Instant) -> bool:
    """True once strictly more than ``validity_period`` days have elapsed."""
    limit = Fraction(repr(float(clock.validity_period))) * TICKS_PER_DAY
    return (true_time.ticks - clock.last_sync.ticks) > limit
