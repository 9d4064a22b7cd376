"""Closed-loop scenario execution and the per-tick trace it produces.

Each tick runs the full pipeline in a fixed order: move persons, render
the camera view, corrupt it through the detector model, advance the
follower, then integrate the robot on the *published* command.  One shared
RNG seeded from the scenario drives every stochastic draw, so a scenario
file fully determines its outputs, byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .control import STOP, VelocityCommand
from .follower import FollowerState, TickInput, tick
from .geometry import FrameGeometry, bbox_center, locate_target
from .scenario import ScenarioConfig
from .sim import Pose2D, detect, person_position, render, step_robot

EVENT_LOST_STOP = "lost_stop"
EVENT_LOCKOUT = "lockout_engaged"


@dataclass(frozen=True)
class TraceRow:
    """State of one tick: poses at tick start, what the detector and
    follower did during it."""

    tick: int
    t_s: float
    robot: Pose2D
    persons: tuple[Pose2D, ...]
    n_detections: int
    dx_px: int | None          # only when exactly one detection was processed
    depth_m: float | None
    cmd: VelocityCommand       # internally computed this tick
    pub: VelocityCommand       # actually sent to the robot
    timer_s: float
    lockout_s: float
    multi_person: bool
    event: str                 # "", "lost_stop" or "lockout_engaged"
    target_distance_m: float | None  # ground truth, robot to persons[0]


@dataclass(frozen=True)
class SimulationTrace:
    scenario: ScenarioConfig
    rows: tuple[TraceRow, ...]
    final_robot_pose: Pose2D
    final_person_poses: tuple[Pose2D, ...]
    dt_s: float

    def csv_text(self) -> str:
        """Render the trace as CSV; column order is fixed (see README)."""
        n_persons = len(self.scenario.persons)
        header = ["tick", "t_s", "robot_x_m", "robot_y_m", "robot_theta_rad"]
        for i in range(n_persons):
            header += [f"person{i}_x_m", f"person{i}_y_m"]
        header += [
            "n_detections", "dx_px", "depth_m",
            "cmd_linear_mps", "cmd_angular_radps",
            "pub_linear_mps", "pub_angular_radps",
            "timer_s", "lockout_s", "multi_person", "event", "target_distance_m",
        ]
        lines = [",".join(header)]
        for r in self.rows:
            cells = [r.tick, r.t_s, r.robot.x, r.robot.y, r.robot.theta]
            for p in r.persons:
                cells += [p.x, p.y]
            cells += [
                r.n_detections, r.dx_px, r.depth_m,
                r.cmd.linear, r.cmd.angular,
                r.pub.linear, r.pub.angular,
                r.timer_s, r.lockout_s, int(r.multi_person), r.event,
                r.target_distance_m,
            ]
            lines.append(",".join(_fmt(c) for c in cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.csv_text())


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_scenario(scn: ScenarioConfig) -> SimulationTrace:
    """Run one scenario to completion and return the full trace."""
    dt = 1.0 / scn.tick_rate_hz
    n_ticks = int(round(scn.duration_s * scn.tick_rate_hz))
    geom = FrameGeometry(scn.camera.width, scn.camera.height)
    rng = np.random.default_rng(scn.seed)

    robot = Pose2D(0.0, 0.0, 0.0)
    state = FollowerState.initial()
    rows: list[TraceRow] = []

    for i in range(n_ticks):
        t = i * dt
        person_poses = tuple(person_position(p, t) for p in scn.persons)
        movable = [
            p for p, pose in zip(scn.persons, person_poses)
        ]  # keep person order stable for rendering
        boxes, depth = render(
            robot,
            scn.camera,
            [
                PersonAt(pose=pose, model=model)
                for model, pose in zip(scn.persons, person_poses)
            ],
        )
        detections = detect((boxes, depth), scn.detector, rng)
        if scn.detector.depth_noise_mm > 0:
            _perturb_depth(depth, detections, scn.detector.depth_noise_mm, rng)

        pre = state
        state, published = tick(
            state,
            TickInput(detections=tuple(detections), depth=depth, dt_s=dt),
            scn.controller,
            scn.follower,
            geom,
        )

        dx_px = None
        depth_m = None
        if pre.lockout_remaining_s == 0.0 and len(detections) == 1:
            offset = locate_target(detections[0], depth, geom)
            dx_px, depth_m = offset.x_p, offset.distance_m

        event = ""
        if pre.lockout_remaining_s == 0.0:
            if state.lockout_remaining_s > 0.0:
                event = EVENT_LOCKOUT
            elif (
                len(detections) == 0
                and state.timer_s == 0.0
                and pre.last_command != STOP
            ):
                # A lost-target timeout only resets the timer on an N=0 tick;
                # count it as a stop only if it actually halted motion.
                event = EVENT_LOST_STOP

        target_distance = None
        if person_poses:
            target_distance = math.hypot(
                person_poses[0].x - robot.x, person_poses[0].y - robot.y
            )

        rows.append(
            TraceRow(
                tick=i,
                t_s=t,
                robot=robot,
                persons=person_poses,
                n_detections=len(detections),
                dx_px=dx_px,
                depth_m=depth_m,
                cmd=state.last_command,
                pub=published,
                timer_s=state.timer_s,
                lockout_s=state.lockout_remaining_s,
                multi_person=state.multi_person_flag,
                event=event,
                target_distance_m=target_distance,
            )
        )

        robot = step_robot(robot, published, dt)

    t_end = n_ticks * dt
    final_persons = tuple(person_position(p, t_end) for p in scn.persons)
    return SimulationTrace(
        scenario=scn,
        rows=tuple(rows),
        final_robot_pose=robot,
        final_person_poses=final_persons,
        dt_s=dt,
    )


def PersonAt(pose, model):
    """Person model relocated to the given pose for rendering."""
    from dataclasses import replace

    return replace(model, pose=pose, trajectory=(), speed_mps=0.0)


def _perturb_depth(depth, detections, std_mm: float, rng: np.random.Generator) -> None:
    """Add range noise at each detection's center pixel, where the
    controller will read; one draw per detection, in detection order."""
    for det in detections:
        x_bb, y_bb = bbox_center(det.bbox)
        if not (0 <= x_bb < depth.width and 0 <= y_bb < depth.height):
            continue
        noisy = int(depth.values[y_bb, x_bb]) + rng.normal(0.0, std_mm)
        depth.values[y_bb, x_bb] = min(depth.max_range_mm, max(0, int(round(noisy))))
