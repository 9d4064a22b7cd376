"""Image-frame geometry: bounding boxes, frame centering and depth lookup.

Two pixel reference frames are used throughout:

* R0 — origin at the top-left pixel, x right, y down.  Detector output
  (bounding boxes) lives here.
* R1 — origin at the frame center pixel (x_c, y_c).  Offsets in R1 are
  positive when the target is left of / above center, which is the
  convention the angular controller expects.

For a 640x480 frame the center pixel is (319, 239).  Depth maps store one
integer millimeter distance per pixel; 0 means "no measurement".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEPTH_MIN_MM = 105
DEPTH_MAX_MM = 8000


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in R0 pixel coordinates (top-left corner + size)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError(f"bbox corner must be non-negative, got ({self.x}, {self.y})")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"bbox size must be positive, got {self.w}x{self.h}")

    def fits(self, width: int, height: int) -> bool:
        return self.x + self.w <= width and self.y + self.h <= height


@dataclass(frozen=True)
class Detection:
    """One detector hit: a box, its confidence and the predicted class."""

    bbox: BoundingBox
    confidence: float
    class_id: str = "person"

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class FrameGeometry:
    """Frame resolution plus the R1 origin pixel (x_c, y_c).

    The center pixel is defined as (width // 2 - 1, height // 2 - 1), which
    reproduces (319, 239) for the reference 640x480 resolution.
    """

    width: int
    height: int
    x_c: int = field(default=-1)
    y_c: int = field(default=-1)

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"frame must be at least 2x2, got {self.width}x{self.height}")
        # Fill center pixel from the resolution when not given explicitly.
        if self.x_c == -1:
            object.__setattr__(self, "x_c", self.width // 2 - 1)
        if self.y_c == -1:
            object.__setattr__(self, "y_c", self.height // 2 - 1)
        if self.x_c != self.width // 2 - 1 or self.y_c != self.height // 2 - 1:
            raise ValueError(
                f"center pixel ({self.x_c}, {self.y_c}) inconsistent with "
                f"{self.width}x{self.height} resolution"
            )


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel distance image in integer millimeters, RGB-resolution sized."""

    values: np.ndarray
    min_range_mm: int = DEPTH_MIN_MM
    max_range_mm: int = DEPTH_MAX_MM

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 2:
            raise ValueError(f"depth matrix must be 2-D, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > self.max_range_mm):
            raise ValueError(f"depth values must lie in [0, {self.max_range_mm}] mm")
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_text(cls, path: str | Path) -> "DepthMap":
        """Load the plain-text fixture format: first line "height width",
        then row-major integer millimeter values."""
        tokens = Path(path).read_text().split()
        if len(tokens) < 2:
            raise ValueError(f"{path}: expected 'height width' header")
        height, width = int(tokens[0]), int(tokens[1])
        cells = [int(t) for t in tokens[2:]]
        if len(cells) != height * width:
            raise ValueError(
                f"{path}: expected {height * width} depth values, got {len(cells)}"
            )
        arr = np.array(cells, dtype=np.uint16).reshape(height, width)
        return cls(values=arr)


@dataclass(frozen=True)
class TargetOffset:
    """Target location in R1 pixels plus its camera distance in meters."""

    x_p: int
    y_p: int
    distance_m: float


def _round_ties_to_zero(v: float) -> int:
    # round-half-toward-zero; bbox centers land on .0 or .5 exactly
    if v >= 0:
        return int(math.ceil(v - 0.5))
    return int(math.floor(v + 0.5))


def bbox_center(bbox: BoundingBox) -> tuple[int, int]:
    """Center pixel of a box in R0, rounded to integer (ties toward zero)."""
    return (
        _round_ties_to_zero(bbox.x + bbox.w / 2),
        _round_ties_to_zero(bbox.y + bbox.h / 2),
    )


def to_r1(center: tuple[int, int], geom: FrameGeometry) -> tuple[int, int]:
    """Re-express an R0 pixel as an offset from the frame center (R1)."""
    x_bb, y_bb = center
    return geom.x_c - x_bb, geom.y_c - y_bb


def depth_at(depth: DepthMap, x_bb: int, y_bb: int) -> float:
    """Distance in meters stored at pixel (x_bb, y_bb); 0.0 means no reading.

    Indices outside the matrix raise IndexError: an out-of-frame lookup is a
    caller bug and is never clamped.
    """
    if not (0 <= x_bb < depth.width and 0 <= y_bb < depth.height):
        raise IndexError(
            f"depth lookup ({x_bb}, {y_bb}) outside {depth.width}x{depth.height} matrix"
        )
    return int(depth.values[y_bb, x_bb]) / 1000.0


def locate_target(det: Detection, depth: DepthMap, geom: FrameGeometry) -> TargetOffset:
    """Full localization: bbox -> center -> R1 offset + depth at the center."""
    if depth.width != geom.width or depth.height != geom.height:
        raise ValueError(
            f"depth matrix {depth.width}x{depth.height} does not match "
            f"frame {geom.width}x{geom.height}"
        )
    if not det.bbox.fits(geom.width, geom.height):
        raise ValueError(f"bbox {det.bbox} exceeds {geom.width}x{geom.height} frame")
    x_bb, y_bb = bbox_center(det.bbox)
    x_p, y_p = to_r1((x_bb, y_bb), geom)
    return TargetOffset(x_p=x_p, y_p=y_p, distance_m=depth_at(depth, x_bb, y_bb))
