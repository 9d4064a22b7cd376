"""Per-tick detection handling: the state machine around the controller.

Each tick classifies the detector output by count and reacts:

* no detection   — keep driving on the last command (the target may be
                   briefly occluded); once nothing has been seen for longer
                   than ``lost_timeout_s``, stop.
* one detection  — localize it and run the controller; the lost-target
                   timer resets.
* several people — coast while a shared timer debounces the situation; if
                   it persists past ``multi_person_confirm_s``, stop and
                   ignore all detections for ``lockout_pause_s``.

Commands are computed every tick but published at a fixed slower rate
(``command_period_s``) so the platform is not jerked around by per-frame
detector noise.  Stop commands bypass the throttle: a decision to stop is
never delayed.

The module owns no clock; callers supply elapsed time per tick, which keeps
simulation and tests fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .control import STOP, ControllerConfig, VelocityCommand, compute_command
from .geometry import Detection, DepthMap, FrameGeometry, locate_target


@dataclass(frozen=True)
class FollowerConfig:
    lost_timeout_s: float = 2.0           # coast budget with no detections
    multi_person_confirm_s: float = 1.0   # debounce before declaring a crowd
    lockout_pause_s: float = 5.0          # stop duration after a crowd
    command_period_s: float = 0.5         # publish period (2 Hz)

    def __post_init__(self):
        for name in (
            "lost_timeout_s",
            "multi_person_confirm_s",
            "lockout_pause_s",
            "command_period_s",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class FollowerState:
    """Mutable loop state, advanced functionally by :func:`tick`.

    ``last_command`` is the most recent internally computed command;
    ``published_command`` is what the robot was last told to do (they differ
    while the publish throttle is holding).
    """

    last_command: VelocityCommand = STOP
    published_command: VelocityCommand = STOP
    timer_s: float = 0.0                 # shared lost-target / debounce timer
    multi_person_flag: bool = False
    lockout_remaining_s: float = 0.0
    time_since_publish_s: float = 0.0
    tick_index: int = 0

    @classmethod
    def initial(cls) -> "FollowerState":
        return cls()


@dataclass(frozen=True)
class TickInput:
    detections: tuple[Detection, ...]
    depth: DepthMap
    dt_s: float


def reset(state: FollowerState | None = None) -> FollowerState:
    """Return the initialization-block state: zero command, timers, flags."""
    return FollowerState.initial()


def tick(
    state: FollowerState,
    tick_input: TickInput,
    ctrl: ControllerConfig,
    fcfg: FollowerConfig,
    geom: FrameGeometry,
) -> tuple[FollowerState, VelocityCommand]:
    """Advance one control tick; returns the new state and the published command.

    The returned command is what the robot should execute now: it only
    changes when the publish period has elapsed, except stops, which publish
    immediately.
    """
    dt = tick_input.dt_s
    if not dt > 0:
        raise ValueError(f"dt_s must be positive, got {dt}")

    timer = state.timer_s
    lockout = state.lockout_remaining_s
    flag = state.multi_person_flag

    if lockout > 0:
        # Paused after a multi-person event: ignore detections entirely.
        lockout = max(0.0, lockout - dt)
        if lockout == 0.0:
            flag = False
            timer = 0.0
        command = STOP
    else:
        n = len(tick_input.detections)
        if n == 0:
            command = state.last_command
            timer += dt
            if timer > fcfg.lost_timeout_s:
                timer = 0.0
                command = STOP
        elif n == 1:
            offset = locate_target(tick_input.detections[0], tick_input.depth, geom)
            command = compute_command(offset, ctrl)
            timer = 0.0
        else:
            timer += dt
            if timer > fcfg.multi_person_confirm_s:
                timer = 0.0
                command = STOP
                flag = True
                lockout = fcfg.lockout_pause_s
            else:
                command = state.last_command

    since_publish = state.time_since_publish_s + dt
    if command.is_stop() or since_publish >= fcfg.command_period_s:
        published = command
        since_publish = 0.0
    else:
        published = state.published_command

    new_state = replace(
        state,
        last_command=command,
        published_command=published,
        timer_s=timer,
        multi_person_flag=flag,
        lockout_remaining_s=lockout,
        time_since_publish_s=since_publish,
        tick_index=state.tick_index + 1,
    )
    return new_state, published
