"""Scenario files: strict JSON loading and validation.

A scenario file is a JSON object mirroring the configuration dataclasses
(controller, follower, camera, persons, detector).  Every section and field
is optional and defaults to the platform values, but unknown keys are hard
errors — a typo in a sweep must fail loudly, not silently run the default.
Validation failures always name the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .control import ControllerConfig
from .follower import FollowerConfig
from .sim import CameraModel, DetectorModel, PersonModel, Pose2D


class ScenarioError(ValueError):
    """Invalid scenario content; ``field`` is the dotted path of the culprit."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    duration_s: float = 30.0
    tick_rate_hz: float = 20.0
    seed: int = 0
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    follower: FollowerConfig = field(default_factory=FollowerConfig)
    camera: CameraModel = field(default_factory=CameraModel)
    persons: tuple[PersonModel, ...] = ()
    detector: DetectorModel = field(default_factory=DetectorModel)

    def __post_init__(self):
        if not self.name:
            raise ScenarioError("name", "must be a non-empty string")
        if self.duration_s <= 0:
            raise ScenarioError("duration_s", f"must be positive, got {self.duration_s}")
        min_rate = 2.0 / self.follower.command_period_s
        if self.tick_rate_hz < min_rate:
            raise ScenarioError(
                "tick_rate_hz",
                f"must be at least twice the publish rate "
                f"({min_rate:g} Hz for command_period_s="
                f"{self.follower.command_period_s:g}), got {self.tick_rate_hz}",
            )


def _require_mapping(data, path: str) -> dict:
    if not isinstance(data, dict):
        raise ScenarioError(path, f"expected an object, got {type(data).__name__}")
    return data


def _reject_unknown(data: dict, allowed: set[str], path: str) -> None:
    for key in data:
        if key not in allowed:
            raise ScenarioError(f"{path}.{key}" if path else key, "unknown key")


def _number(data: dict, key: str, default: float, path: str) -> float:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}" if path else key, f"expected a number, got {value!r}")
    return float(value)


def _integer(data: dict, key: str, default: int, path: str) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}.{key}" if path else key, f"expected an integer, got {value!r}")
    return value


def _point_pair(data: dict, key: str, default, path: str):
    value = data.get(key)
    if value is None:
        return default
    full = f"{path}.{key}"
    if (
        not isinstance(value, list)
        or len(value) != 2
        or any(not isinstance(p, list) or len(p) != 2 for p in value)
    ):
        raise ScenarioError(full, "expected two [distance, velocity] points")
    try:
        return tuple((float(p[0]), float(p[1])) for p in value)
    except (TypeError, ValueError):
        raise ScenarioError(full, f"points must be numeric, got {value!r}") from None


def controller_from_dict(data: dict, path: str = "controller") -> ControllerConfig:
    data = _require_mapping(data, path)
    defaults = ControllerConfig()
    _reject_unknown(
        data,
        {
            "max_angular", "min_angular", "max_linear", "min_linear",
            "half_frame", "uplim_m", "lowlim_m", "line1", "line2", "camera_min_m",
        },
        path,
    )
    max_angular = _number(data, "max_angular", defaults.max_angular, path)
    max_linear = _number(data, "max_linear", defaults.max_linear, path)
    try:
        return ControllerConfig(
            max_angular=max_angular,
            min_angular=_number(data, "min_angular", -max_angular, path),
            max_linear=max_linear,
            min_linear=_number(data, "min_linear", -max_linear, path),
            half_frame=_integer(data, "half_frame", defaults.half_frame, path),
            uplim_m=_number(data, "uplim_m", defaults.uplim_m, path),
            lowlim_m=_number(data, "lowlim_m", defaults.lowlim_m, path),
            line1=_point_pair(data, "line1", defaults.line1, path),
            line2=_point_pair(data, "line2", defaults.line2, path),
            camera_min_m=_number(data, "camera_min_m", defaults.camera_min_m, path),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def _follower_from_dict(data: dict, path: str = "follower") -> FollowerConfig:
    data = _require_mapping(data, path)
    defaults = FollowerConfig()
    names = ("lost_timeout_s", "multi_person_confirm_s", "lockout_pause_s", "command_period_s")
    _reject_unknown(data, set(names), path)
    kwargs = {n: _number(data, n, getattr(defaults, n), path) for n in names}
    try:
        return FollowerConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def _camera_from_dict(data: dict, path: str = "camera") -> CameraModel:
    data = _require_mapping(data, path)
    defaults = CameraModel()
    _reject_unknown(
        data,
        {"width", "height", "horizontal_fov", "depth_min_m", "depth_max_m", "mount_height_m"},
        path,
    )
    try:
        return CameraModel(
            width=_integer(data, "width", defaults.width, path),
            height=_integer(data, "height", defaults.height, path),
            horizontal_fov=_number(data, "horizontal_fov", defaults.horizontal_fov, path),
            depth_min_m=_number(data, "depth_min_m", defaults.depth_min_m, path),
            depth_max_m=_number(data, "depth_max_m", defaults.depth_max_m, path),
            mount_height_m=_number(data, "mount_height_m", defaults.mount_height_m, path),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def _pose_from_dict(data: dict, path: str) -> Pose2D:
    data = _require_mapping(data, path)
    _reject_unknown(data, {"x", "y", "theta"}, path)
    return Pose2D(
        x=_number(data, "x", 0.0, path),
        y=_number(data, "y", 0.0, path),
        theta=_number(data, "theta", 0.0, path),
    )


def _trajectory(data: dict, path: str) -> tuple[tuple[float, float, float], ...]:
    value = data.get("trajectory", [])
    full = f"{path}.trajectory"
    if not isinstance(value, list):
        raise ScenarioError(full, f"expected a list of [t, x, y] waypoints, got {value!r}")
    out = []
    for i, wp in enumerate(value):
        if not isinstance(wp, list) or len(wp) != 3:
            raise ScenarioError(f"{full}[{i}]", f"expected [t, x, y], got {wp!r}")
        try:
            out.append(tuple(float(c) for c in wp))
        except (TypeError, ValueError):
            raise ScenarioError(f"{full}[{i}]", f"waypoint must be numeric, got {wp!r}") from None
    return tuple(out)


def _person_from_dict(data: dict, path: str) -> PersonModel:
    data = _require_mapping(data, path)
    defaults = PersonModel(pose=Pose2D(0, 0, 0))
    _reject_unknown(data, {"pose", "height_m", "width_m", "trajectory", "speed_mps"}, path)
    try:
        return PersonModel(
            pose=_pose_from_dict(data.get("pose", {}), f"{path}.pose"),
            height_m=_number(data, "height_m", defaults.height_m, path),
            width_m=_number(data, "width_m", defaults.width_m, path),
            trajectory=_trajectory(data, path),
            speed_mps=_number(data, "speed_mps", defaults.speed_mps, path),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def _detector_from_dict(data: dict, path: str = "detector") -> DetectorModel:
    data = _require_mapping(data, path)
    defaults = DetectorModel()
    _reject_unknown(
        data,
        {"miss_rate", "bbox_jitter_px", "depth_noise_mm", "false_person_rate", "rng_seed"},
        path,
    )
    try:
        return DetectorModel(
            miss_rate=_number(data, "miss_rate", defaults.miss_rate, path),
            bbox_jitter_px=_number(data, "bbox_jitter_px", defaults.bbox_jitter_px, path),
            depth_noise_mm=_number(data, "depth_noise_mm", defaults.depth_noise_mm, path),
            false_person_rate=_number(data, "false_person_rate", defaults.false_person_rate, path),
            rng_seed=_integer(data, "rng_seed", defaults.rng_seed, path),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from parsed JSON."""
    data = _require_mapping(data, "scenario")
    _reject_unknown(
        data,
        {
            "name", "duration_s", "tick_rate_hz", "seed",
            "controller", "follower", "camera", "persons", "detector",
        },
        "",
    )
    name = data.get("name", "scenario")
    if not isinstance(name, str):
        raise ScenarioError("name", f"expected a string, got {name!r}")
    persons_raw = data.get("persons", [])
    if not isinstance(persons_raw, list):
        raise ScenarioError("persons", f"expected a list, got {persons_raw!r}")
    persons = tuple(
        _person_from_dict(p, f"persons[{i}]") for i, p in enumerate(persons_raw)
    )
    return ScenarioConfig(
        name=name,
        duration_s=_number(data, "duration_s", 30.0, ""),
        tick_rate_hz=_number(data, "tick_rate_hz", 20.0, ""),
        seed=_integer(data, "seed", 0, ""),
        controller=controller_from_dict(data.get("controller", {})),
        follower=_follower_from_dict(data.get("follower", {})),
        camera=_camera_from_dict(data.get("camera", {})),
        persons=persons,
        detector=_detector_from_dict(data.get("detector", {})),
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    path = Path(path)
    if not path.is_file():
        raise ScenarioError("path", f"scenario file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("path", f"invalid JSON in {path}: {exc}") from None
    return scenario_from_dict(data)
