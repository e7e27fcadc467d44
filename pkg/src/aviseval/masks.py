"""Binary masks as column-major run lists, and the spatiotemporal IoU kernel.

A frame mask stores alternating background/foreground run lengths, starting
with a background run, over pixels visited in column-major order. This is the
uncompressed RLE layout used by COCO-style detection benchmarks, so prediction
files from those tools interoperate directly.

A track is a fixed-length sequence of optional frame masks; ``None`` means the
instance has no pixels in that frame (it is silent or off-screen). Comparisons
between tracks treat absent frames as empty masks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import accumulate
from typing import Iterable, Optional, Sequence

import numpy as np


class MaskError(ValueError):
    """Base class for mask construction and geometry failures."""


class RLECodecError(MaskError):
    pass


class GeometryError(MaskError):
    pass


def canonical_counts(counts: Iterable[int]) -> tuple[int, ...]:
    """Merge zero-length interior runs so only the leading run may be zero.

    Trailing zero runs are dropped. The result encodes the same pixels.
    """
    a = np.asarray(counts if isinstance(counts, (list, tuple, np.ndarray)) else list(counts), dtype=np.int64)
    if a.size == 0:
        return (0,)
    neg = np.flatnonzero(a < 0)
    if neg.size:
        raise RLECodecError(f"negative run length {a[neg[0]]} at index {neg[0]}")
    # run i has colour i % 2; dropping empty runs and summing same-colour
    # neighbours gives the canonical alternation starting with background.
    colour = np.arange(a.size) % 2
    keep = a > 0
    keep[0] = True
    a, colour = a[keep], colour[keep]
    starts = np.flatnonzero(np.r_[True, colour[1:] != colour[:-1]])
    return tuple(np.add.reduceat(a, starts).tolist())


@dataclass(frozen=True)
class FrameMask:
    """Run-length encoded binary mask for one frame.

    ``counts`` must already be canonical; use :meth:`from_counts` for raw
    input that may contain zero-length interior runs.
    """

    height: int
    width: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.height <= 0 or self.width <= 0:
            raise GeometryError(f"mask dimensions must be positive, got {self.height}x{self.width}")
        arr = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", tuple(arr.tolist()))
        total = int(arr.sum())
        if total != self.height * self.width:
            raise RLECodecError(
                f"run lengths sum to {total}, expected {self.height * self.width} "
                f"for a {self.height}x{self.width} mask"
            )
        if (arr < 0).any():
            raise RLECodecError("run lengths must be non-negative")
        if (arr[1:] == 0).any():
            raise RLECodecError("only the leading background run may be zero")

    @classmethod
    def from_counts(cls, height: int, width: int, counts: Iterable[int]) -> "FrameMask":
        canon = canonical_counts(counts)
        if height > 0 and width > 0 and sum(canon) == height * width:
            return cls._trusted(height, width, canon)
        return cls(height, width, canon)

    @classmethod
    def _trusted(cls, height: int, width: int, counts: tuple[int, ...]) -> "FrameMask":
        # skips validation; callers guarantee canonical counts of the right total
        mask = object.__new__(cls)
        object.__setattr__(mask, "height", height)
        object.__setattr__(mask, "width", width)
        object.__setattr__(mask, "counts", counts)
        return mask

    @classmethod
    def empty(cls, height: int, width: int) -> "FrameMask":
        return cls(height, width, (height * width,))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @cached_property
    def intervals(self) -> tuple[tuple[int, int], ...]:
        """Foreground runs as half-open ``(start, stop)`` offsets in column-major order."""
        ends = list(accumulate(self.counts))
        return tuple((ends[i - 1], ends[i]) for i in range(1, len(ends), 2))

    @cached_property
    def area(self) -> int:
        return sum(self.counts[1::2])

    def is_empty(self) -> bool:
        return self.area == 0

    @classmethod
    def from_intervals(
        cls, height: int, width: int, intervals: Iterable[tuple[int, int]]
    ) -> "FrameMask":
        counts: list[int] = []
        pos = 0
        for start, stop in intervals:
            if start < pos or stop < start:
                raise RLECodecError(f"intervals must be sorted and disjoint near offset {start}")
            counts.append(start - pos)
            counts.append(stop - start)
            pos = stop
        n = height * width
        if pos > n:
            raise RLECodecError(f"interval end {pos} exceeds {n} pixels")
        counts.append(n - pos)
        return cls.from_counts(height, width, counts)


def rle_decode(mask: FrameMask) -> np.ndarray:
    """Dense ``(height, width)`` boolean grid for ``mask``."""
    values = np.zeros(len(mask.counts), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, mask.counts)
    if flat.size != mask.height * mask.width:
        raise RLECodecError(f"run lengths sum to {flat.size}, expected {mask.height * mask.width}")
    return flat.reshape((mask.height, mask.width), order="F")


def rle_encode(grid: np.ndarray) -> FrameMask:
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.size == 0:
        raise GeometryError(f"expected a non-empty 2-D grid, got shape {grid.shape}")
    h, w = grid.shape
    flat = grid.astype(bool).ravel(order="F")
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return FrameMask._trusted(h, w, tuple(runs))


def _check_same_shape(a: FrameMask, b: FrameMask) -> None:
    if a.shape != b.shape:
        raise GeometryError(f"mask shapes differ: {a.shape} vs {b.shape}")


def _intersect_intervals(
    a: Sequence[tuple[int, int]], b: Sequence[tuple[int, int]]
) -> list[tuple[int, int]]:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _union_intervals(
    a: Sequence[tuple[int, int]], b: Sequence[tuple[int, int]]
) -> list[tuple[int, int]]:
    merged: list[list[int]] = []
    for start, stop in sorted([*a, *b]):
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], stop)
        else:
            merged.append([start, stop])
    return [(s, e) for s, e in merged]


def frame_area(a: FrameMask) -> int:
    return a.area


def frame_intersection_area(a: FrameMask, b: FrameMask) -> int:
    _check_same_shape(a, b)
    total = 0
    ia, ib = a.intervals, b.intervals
    i = j = 0
    while i < len(ia) and j < len(ib):
        lo = max(ia[i][0], ib[j][0])
        hi = min(ia[i][1], ib[j][1])
        if lo < hi:
            total += hi - lo
        if ia[i][1] <= ib[j][1]:
            i += 1
        else:
            j += 1
    return total


def frame_union_area(a: FrameMask, b: FrameMask) -> int:
    return a.area + b.area - frame_intersection_area(a, b)


def frame_intersection(a: FrameMask, b: FrameMask) -> FrameMask:
    _check_same_shape(a, b)
    return FrameMask.from_intervals(a.height, a.width, _intersect_intervals(a.intervals, b.intervals))


def frame_union(a: FrameMask, b: FrameMask) -> FrameMask:
    _check_same_shape(a, b)
    return FrameMask.from_intervals(a.height, a.width, _union_intervals(a.intervals, b.intervals))


@dataclass(frozen=True)
class MaskTrack:
    """Per-frame optional masks for one instance over a whole video.

    Explicit all-background masks are stored as ``None`` so that an absent
    frame and an empty frame compare equal.
    """

    masks: tuple[Optional[FrameMask], ...]
    frame_count: int = field(default=-1)

    def __post_init__(self) -> None:
        masks = tuple(None if (m is None or m.is_empty()) else m for m in self.masks)
        object.__setattr__(self, "masks", masks)
        if self.frame_count == -1:
            object.__setattr__(self, "frame_count", len(masks))
        if self.frame_count != len(masks):
            raise GeometryError(
                f"track has {len(masks)} frame slots but frame_count={self.frame_count}"
            )
        shapes = {m.shape for m in masks if m is not None}
        if len(shapes) > 1:
            raise GeometryError(f"track mixes frame shapes {sorted(shapes)}")

    @classmethod
    def from_frames(
        cls, frames: Sequence[Optional[FrameMask]], frame_count: Optional[int] = None
    ) -> "MaskTrack":
        """Build a track, padding with absent frames up to ``frame_count``."""
        frames = tuple(frames)
        if frame_count is not None:
            if len(frames) > frame_count:
                raise GeometryError(f"{len(frames)} frames exceed frame_count={frame_count}")
            frames = frames + (None,) * (frame_count - len(frames))
        return cls(frames)

    @property
    def shape(self) -> Optional[tuple[int, int]]:
        for m in self.masks:
            if m is not None:
                return m.shape
        return None

    @cached_property
    def support(self) -> tuple[int, ...]:
        """0-based frame indices carrying a non-empty mask."""
        return tuple(t for t, m in enumerate(self.masks) if m is not None)

    @property
    def sounding_interval(self) -> Optional[tuple[int, int]]:
        """Inclusive ``(first, last)`` frame hull of the support, or ``None``."""
        if not self.support:
            return None
        return (self.support[0], self.support[-1])

    @cached_property
    def total_area(self) -> int:
        return sum(m.area for m in self.masks if m is not None)

    def padded(self, extra: int) -> "MaskTrack":
        return MaskTrack(self.masks + (None,) * extra)


def spatiotemporal_overlap(gt: MaskTrack, hyp: MaskTrack) -> tuple[int, int]:
    """Summed per-frame ``(intersection, union)`` pixel counts of two tracks."""
    if gt.frame_count != hyp.frame_count:
        raise GeometryError(
            f"track lengths differ: {gt.frame_count} vs {hyp.frame_count} frames"
        )
    inter = union = 0
    for a, b in zip(gt.masks, hyp.masks):
        if a is None and b is None:
            continue
        if a is None:
            union += b.area
        elif b is None:
            union += a.area
        else:
            i = frame_intersection_area(a, b)
            inter += i
            union += a.area + b.area - i
    return inter, union


def spatiotemporal_iou(gt: MaskTrack, hyp: MaskTrack) -> float:
    """Summed intersection over summed union across all frames; 0 when both are empty."""
    inter, union = spatiotemporal_overlap(gt, hyp)
    if union == 0:
        return 0.0
    return inter / union
