"""Desk-scale world model: unicycle kinematics, a synthetic RGB-D camera
and an imperfect detector.

Persons are billboards (vertical rectangles of configurable size) projected
through a pinhole model onto the image plane.  The depth map is synthesized
geometrically: open space reads the sensor's maximum range, each visible
person stamps its centroid range (mm) over its box, nearer persons
overwriting farther ones.  That is all the controller ever reads, so no
finer rendering is needed.

Column convention: a person to the robot's left (positive bearing) projects
toward column 0, so the centered-frame offset x_p comes out positive and
the angular law turns left, as it must.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import VelocityCommand
from .geometry import DEPTH_MAX_MM, BoundingBox, Detection, DepthMap

TWO_PI = 2.0 * math.pi

# Below this the arc integrator would divide by ~0; straight-line advance
# is exact to under 1e-9 * dt radians of heading.
OMEGA_EPS = 1e-9


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    return math.pi - (math.pi - theta) % TWO_PI


@dataclass(frozen=True)
class Pose2D:
    """Planar pose; heading is normalized to (-pi, pi] at construction."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.x, self.y, self.theta))):
            raise ValueError(f"pose must be finite, got {self}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


def step_robot(pose: Pose2D, cmd: VelocityCommand, dt_s: float) -> Pose2D:
    """Integrate the unicycle exactly over one step.

    Constant (v, w) over dt traces a circular arc of radius v/w; the closed
    form below is exact for any dt, so traces do not depend on tick rate.
    """
    if not dt_s > 0:
        raise ValueError(f"dt_s must be positive, got {dt_s}")
    if not (math.isfinite(cmd.linear) and math.isfinite(cmd.angular)):
        raise ValueError(f"command must be finite, got {cmd}")
    v, w = cmd.linear, cmd.angular
    if abs(w) < OMEGA_EPS:
        return Pose2D(
            x=pose.x + v * dt_s * math.cos(pose.theta),
            y=pose.y + v * dt_s * math.sin(pose.theta),
            theta=pose.theta,
        )
    theta1 = pose.theta + w * dt_s
    return Pose2D(
        x=pose.x + (v / w) * (math.sin(theta1) - math.sin(pose.theta)),
        y=pose.y - (v / w) * (math.cos(theta1) - math.cos(pose.theta)),
        theta=theta1,
    )


@dataclass(frozen=True)
class CameraModel:
    """Forward-facing pinhole RGB-D camera mounted on the robot."""

    width: int = 640
    height: int = 480
    horizontal_fov: float = 1.204   # rad, ~69 deg
    depth_min_m: float = 0.105
    depth_max_m: float = 8.0
    mount_height_m: float = 0.2

    def __post_init__(self):
        if not 0 < self.horizontal_fov < math.pi:
            raise ValueError(f"horizontal_fov must be in (0, pi), got {self.horizontal_fov}")
        if self.depth_min_m >= self.depth_max_m:
            raise ValueError("depth_min_m must be below depth_max_m")
        if self.width < 2 or self.height < 2:
            raise ValueError(f"camera frame must be at least 2x2, got {self.width}x{self.height}")

    @property
    def focal_px(self) -> float:
        return (self.width / 2.0) / math.tan(self.horizontal_fov / 2.0)


@dataclass(frozen=True)
class PersonModel:
    """A person to render: billboard size plus scripted motion.

    Motion comes from ``trajectory`` — (time_s, x, y) waypoints interpolated
    linearly, holding the end positions outside the timed range — or, when
    no waypoints are given, from walking at ``speed_mps`` along the initial
    heading.
    """

    pose: Pose2D
    height_m: float = 1.7
    width_m: float = 0.5
    trajectory: tuple[tuple[float, float, float], ...] = ()
    speed_mps: float = 0.0

    def __post_init__(self):
        if self.speed_mps < 0:
            raise ValueError(f"speed_mps must be non-negative, got {self.speed_mps}")
        if self.height_m <= 0 or self.width_m <= 0:
            raise ValueError("person dimensions must be positive")
        times = [wp[0] for wp in self.trajectory]
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError(f"waypoint times must be strictly increasing, got {times}")


def person_position(person: PersonModel, t: float) -> Pose2D:
    """Person pose at simulation time t."""
    if person.trajectory:
        wps = person.trajectory
        if t <= wps[0][0]:
            return Pose2D(wps[0][1], wps[0][2], person.pose.theta)
        if t >= wps[-1][0]:
            return Pose2D(wps[-1][1], wps[-1][2], person.pose.theta)
        for (t0, x0, y0), (t1, x1, y1) in zip(wps, wps[1:]):
            if t0 <= t < t1:
                a = (t - t0) / (t1 - t0)
                return Pose2D(x0 + a * (x1 - x0), y0 + a * (y1 - y0), person.pose.theta)
        raise AssertionError("unreachable: waypoint times are strictly increasing")
    p = person.pose
    return Pose2D(
        p.x + person.speed_mps * t * math.cos(p.theta),
        p.y + person.speed_mps * t * math.sin(p.theta),
        p.theta,
    )


def bearing_to_column(bearing: float, cam: CameraModel) -> float:
    """Project a horizontal bearing (rad, positive left) to an image column.

    Bearing +fov/2 maps to column 0, -fov/2 to column ``width``; the result
    is unclamped so callers can see where out-of-frame points would land.
    """
    return (cam.width / 2.0) * (1.0 - math.tan(bearing) / math.tan(cam.horizontal_fov / 2.0))


def render(
    camera_pose: Pose2D, cam: CameraModel, persons: list[PersonModel]
) -> tuple[list[BoundingBox], DepthMap]:
    """Ground-truth boxes and depth map for the given camera pose.

    Every person inside the horizontal FOV and depth range yields one box
    candidate; the depth map starts at max range and visible persons stamp
    their centroid range over their box, nearest last.
    """
    values = np.full((cam.height, cam.width), DEPTH_MAX_MM, dtype=np.uint16)
    visible: list[tuple[float, BoundingBox, int]] = []  # (range, box, mm)

    for person in persons:
        dx = person.pose.x - camera_pose.x
        dy = person.pose.y - camera_pose.y
        rng = math.hypot(dx, dy)
        if not cam.depth_min_m <= rng <= cam.depth_max_m:
            continue
        bearing = wrap_angle(math.atan2(dy, dx) - camera_pose.theta)
        if abs(bearing) > cam.horizontal_fov / 2.0:
            continue
        u = bearing_to_column(bearing, cam)
        u = min(cam.width - 1.0, max(0.0, u))
        bw = int(round(cam.focal_px * person.width_m / rng))
        bh = int(round(cam.focal_px * person.height_m / rng))
        bw = min(cam.width, max(4, bw))
        bh = min(cam.height, max(4, bh))
        bx = int(round(u - bw / 2.0))
        bx = min(cam.width - bw, max(0, bx))
        by = (cam.height - bh) // 2
        mm = min(DEPTH_MAX_MM, max(0, int(round(rng * 1000.0))))
        visible.append((rng, BoundingBox(bx, by, bw, bh), mm))

    # Paint far to near so the nearest person owns any overlap.
    for _, box, mm in sorted(visible, key=lambda item: -item[0]):
        values[box.y : box.y + box.h, box.x : box.x + box.w] = mm

    boxes = [box for _, box, _ in visible]
    return boxes, DepthMap(values=values)


@dataclass(frozen=True)
class DetectorModel:
    """Tunable imperfections layered on top of ground-truth boxes."""

    miss_rate: float = 0.0
    bbox_jitter_px: float = 0.0
    depth_noise_mm: float = 0.0
    false_person_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("miss_rate", "false_person_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        for name in ("bbox_jitter_px", "depth_noise_mm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")


def detect(
    truth: tuple[list[BoundingBox], DepthMap],
    model: DetectorModel,
    rng: np.random.Generator | None = None,
) -> list[Detection]:
    """Turn ground-truth boxes into imperfect detections.

    Each box is dropped with ``miss_rate``, survivors get Gaussian position
    jitter (clamped to the frame), and with ``false_person_rate`` one
    spurious box lands at a uniform frame location.  All draws come from
    ``rng`` when given (the scenario loop passes its shared generator);
    otherwise a generator seeded with ``rng_seed`` makes the call
    self-deterministic.
    """
    if rng is None:
        rng = np.random.default_rng(model.rng_seed)
    boxes, depth = truth
    width, height = depth.width, depth.height
    out: list[Detection] = []

    for box in boxes:
        if rng.uniform() < model.miss_rate:
            continue
        jx, jy = rng.normal(0.0, model.bbox_jitter_px, size=2)
        x = min(width - box.w, max(0, int(round(box.x + jx))))
        y = min(height - box.h, max(0, int(round(box.y + jy))))
        conf = float(rng.uniform(0.5, 1.0))
        out.append(Detection(bbox=BoundingBox(x, y, box.w, box.h), confidence=conf))

    if rng.uniform() < model.false_person_rate:
        bw = max(4, width // 8)
        bh = max(4, height // 3)
        x = int(rng.integers(0, width - bw + 1))
        y = int(rng.integers(0, height - bh + 1))
        conf = float(rng.uniform(0.5, 1.0))
        out.append(Detection(bbox=BoundingBox(x, y, bw, bh), confidence=conf))

    return out
