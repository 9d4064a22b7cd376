"""Velocity control laws mapping target offset and distance to (v, w).

Angular velocity is parabolic in the horizontal pixel offset dx: the output
grows with dx^2 up to the platform limit, signed by which side of the frame
the target is on.  Linear velocity is piecewise affine in the measured
distance d, split into three regions:

* d > uplim_m        — drive forward along a line through two calibration
                       points, saturating at max_linear;
* lowlim_m < d <= uplim_m, or d == 0
                     — hold zero (the safe band; 0 also encodes "no depth
                       reading" and must stop the robot);
* 0 < d <= lowlim_m  — back away along a second line, saturating at
                       min_linear.

The jumps at the band edges are deliberate: restarting from the band at a
useful speed keeps a slow-walking target from escaping the frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import TargetOffset

Point = tuple[float, float]  # (distance_m, velocity_mps)


def line_params(p1: Point, p2: Point) -> tuple[float, float]:
    """Slope and intercept of the line through two (distance, velocity) points."""
    d1, v1 = p1
    d2, v2 = p2
    if d1 == d2:
        raise ValueError(f"line points share distance {d1}; slope undefined")
    m = (v2 - v1) / (d2 - d1)
    return m, v1 - m * d1


@dataclass(frozen=True)
class ControllerConfig:
    """All tunables of the two control laws; defaults are the platform values.

    The affine segments are stored as the calibration point pairs they were
    measured from and converted to slope/intercept on access, so nothing is
    transcribed by hand.
    """

    max_angular: float = 1.8          # rad/s
    min_angular: float = -1.8         # rad/s, must equal -max_angular
    max_linear: float = 0.26          # m/s
    min_linear: float = -0.26         # m/s
    half_frame: int = 320             # px, dx denominator
    uplim_m: float = 1.9              # safe band upper edge, m
    lowlim_m: float = 1.7             # safe band lower edge, m
    line1: tuple[Point, Point] = ((1.0, 0.23), (3.0, 0.26))     # forward region
    line2: tuple[Point, Point] = ((1.0, -0.23), (0.3, -0.26))   # backward region
    camera_min_m: float = 0.105       # depth sensor lower range, m

    def __post_init__(self):
        if self.min_angular != -self.max_angular:
            raise ValueError(
                f"min_angular must equal -max_angular, got {self.min_angular} "
                f"vs {-self.max_angular}"
            )
        if self.max_linear <= self.min_linear:
            raise ValueError("max_linear must exceed min_linear")
        if self.half_frame <= 0:
            raise ValueError(f"half_frame must be positive, got {self.half_frame}")
        if not 0 < self.lowlim_m < self.uplim_m:
            raise ValueError(
                f"lowlim_m must satisfy 0 < lowlim_m < uplim_m, got "
                f"lowlim_m={self.lowlim_m}, uplim_m={self.uplim_m}"
            )
        if line_params(*self.line1)[0] <= 0:
            raise ValueError(f"line1 slope must be positive, got points {self.line1}")
        if line_params(*self.line2)[0] <= 0:
            raise ValueError(f"line2 slope must be positive, got points {self.line2}")
        if self.camera_min_m >= self.lowlim_m:
            raise ValueError(
                f"camera_min_m ({self.camera_min_m}) must be below lowlim_m "
                f"({self.lowlim_m})"
            )

    @property
    def m1(self) -> float:
        return line_params(*self.line1)[0]

    @property
    def q1(self) -> float:
        return line_params(*self.line1)[1]

    @property
    def m2(self) -> float:
        return line_params(*self.line2)[0]

    @property
    def q2(self) -> float:
        return line_params(*self.line2)[1]


@dataclass(frozen=True)
class VelocityCommand:
    """Unicycle command: forward linear velocity and z-axis angular velocity."""

    linear: float   # m/s
    angular: float  # rad/s

    def is_stop(self) -> bool:
        return self.linear == 0.0 and self.angular == 0.0


STOP = VelocityCommand(0.0, 0.0)


def angular_velocity(dx: int, cfg: ControllerConfig) -> float:
    """Parabolic steering: sign(dx) * limit * dx^2 / half_frame^2, clamped."""
    if abs(dx) > cfg.half_frame:
        raise ValueError(f"|dx| = {abs(dx)} exceeds half frame {cfg.half_frame}")
    scale = (dx * dx) / (cfg.half_frame * cfg.half_frame)
    raw = cfg.max_angular * scale if dx >= 0 else cfg.min_angular * scale
    return min(cfg.max_angular, max(cfg.min_angular, raw))


def linear_velocity(d_m: float, cfg: ControllerConfig) -> float:
    """Three-region distance law; see the module docstring for the regions."""
    if not math.isfinite(d_m) or d_m < 0:
        raise ValueError(f"distance must be finite and non-negative, got {d_m}")
    if d_m == 0.0:
        return 0.0
    if d_m > cfg.uplim_m:
        raw = d_m * cfg.m1 + cfg.q1
    elif d_m > cfg.lowlim_m:
        return 0.0
    else:
        raw = d_m * cfg.m2 + cfg.q2
    return min(cfg.max_linear, max(cfg.min_linear, raw))


def compute_command(offset: TargetOffset, cfg: ControllerConfig) -> VelocityCommand:
    """Combine both laws into one command for a localized target."""
    return VelocityCommand(
        linear=linear_velocity(offset.distance_m, cfg),
        angular=angular_velocity(offset.x_p, cfg),
    )
