"""Physical model of one control area and the SISO design plant.

The design plant is the transfer function from the supplementary control
signal of one area to its area control error (ACE), with the neighboring
area frozen and the tie-line feedback into the swing equation treated as a
disturbance. That choice is what makes the decentralized per-area CDM
design well posed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .poly import Polynomial


@dataclass(frozen=True)
class AreaParams:
    """Constants of one control area.

    M is the 2H inertia coefficient, so the swing equation reads
    M * d(df)/dt = dPm - dPl - D*df - dPtie.
    """

    D: float  # load damping (pu/Hz)
    M: float  # 2H inertia (pu*s)
    R: float  # droop (Hz/pu)
    Tg: float  # governor time constant (s)
    Tt: float  # turbine time constant (s)

    def __post_init__(self):
        for name in ("D", "M", "R", "Tg", "Tt"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"AreaParams.{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class TieLine:
    T12: float  # synchronizing coefficient (pu/Hz)

    def __post_init__(self):
        if not (self.T12 > 0.0 and math.isfinite(self.T12)):
            raise ValueError(f"TieLine.T12 must be positive and finite, got {self.T12}")


@dataclass(frozen=True)
class NonlinearityConfig:
    """Generation rate constraint and governor dead band settings.

    grc_rate is the max |d(dPm)/dt| in pu/s; math.inf disables it.
    gdb_width is the total dead-band width in pu; 0 disables it.
    gdb_mode selects a static dead zone ("deadzone") or the classical
    describing-function backlash approximation ("backlash").
    """

    grc_rate: float = 0.1 / 60.0  # 10% per minute
    gdb_width: float = 0.05
    gdb_mode: str = "deadzone"

    def __post_init__(self):
        if not self.grc_rate > 0.0:
            raise ValueError("grc_rate must be > 0 (use math.inf to disable)")
        if self.gdb_width < 0.0:
            raise ValueError("gdb_width must be >= 0")
        if self.gdb_mode not in ("deadzone", "backlash"):
            raise ValueError(f"unknown gdb_mode {self.gdb_mode!r}")


@dataclass(frozen=True)
class DesignPlant:
    """SISO design plant: control signal -> ACE, as N(s)/Dp(s)."""

    N: Polynomial  # numerator, degree 1
    Dp: Polynomial  # denominator, degree 4, free integrator (Dp(0) = 0)


def frequency_bias(area: AreaParams) -> float:
    """Frequency bias coefficient B = D + 1/R (pu/Hz)."""
    return area.D + 1.0 / area.R


def derive_design_plant(area: AreaParams, tie: TieLine) -> DesignPlant:
    """Design plant of one area against a frozen neighbor.

    N(s)  = B*s + 2*pi*T12
    Dp(s) = s * [ M*Tg*Tt*s^3 + (M*(Tg+Tt) + D*Tg*Tt)*s^2
                  + (M + D*(Tg+Tt))*s + (D + 1/R) ]
    which is s*[(M*s + D)*(Tg*s + 1)*(Tt*s + 1) + 1/R] expanded.
    """
    b = frequency_bias(area)
    n = Polynomial([2.0 * math.pi * tie.T12, b])
    d4 = area.M * area.Tg * area.Tt
    d3 = area.M * (area.Tg + area.Tt) + area.D * area.Tg * area.Tt
    d2 = area.M + area.D * (area.Tg + area.Tt)
    d1 = area.D + 1.0 / area.R
    dp = Polynomial([0.0, d1, d2, d3, d4])
    return DesignPlant(N=n, Dp=dp)
