"""Ground-truth and prediction documents: parsing, validation, statistics, conversion.

Ground-truth layout (one JSON document)::

    {
      "info": {...},
      "categories": [{"id", "name", "scenario"}],
      "videos": [{"id", "name", "width", "height", "frame_count", "fps",
                  "split", "file_names": [...]}],
      "annotations": [{"id", "video_id", "category_id",
                       "segmentations": [null | {"size": [h, w], "counts": [...]}]}]
    }

Predictions are a flat list of ``{"video_id", "category_id", "score",
"segmentations"}`` records. ``counts`` may be an integer run list or a
COCO-style compressed string; output always uses integer run lists.
"""
from __future__ import annotations

import io
import json
import os
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .masks import FrameMask, MaskError, MaskTrack, frame_union, rle_decode

SCENARIOS = ("music", "speaking", "animal", "machine", "panorama")
SPLITS = ("train", "test")
DEFAULT_SPLIT = "test"

Source = Union[str, os.PathLike, IO[str], Mapping[str, Any], Sequence[Any]]


# --------------------------------------------------------------------------
# compressed RLE strings


def rle_counts_to_string(counts: Sequence[int]) -> str:
    """COCO's text-safe RLE: 5-bit groups offset by 48, delta against counts[i-2]."""
    chars = []
    for i, x in enumerate(counts):
        x = int(x)
        if i > 2:
            x -= int(counts[i - 2])
        more = True
        while more:
            c = x & 0x1F
            x >>= 5
            more = (x != -1) if (c & 0x10) else (x != 0)
            if more:
                c |= 0x20
            chars.append(chr(c + 48))
    return "".join(chars)


def rle_string_to_counts(s: str) -> list[int]:
    counts: list[int] = []
    p = 0
    while p < len(s):
        x = 0
        k = 0
        more = True
        while more:
            if p >= len(s):
                raise ValueError("truncated compressed RLE string")
            c = ord(s[p]) - 48
            x |= (c & 0x1F) << (5 * k)
            more = bool(c & 0x20)
            p += 1
            k += 1
            if not more and (c & 0x10):
                x |= -1 << (5 * k)
        if len(counts) > 2:
            x += counts[-2]
        counts.append(x)
    return counts


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class CategoryDef:
    id: int
    name: str
    scenario: str


@dataclass(frozen=True)
class VideoMeta:
    id: int
    name: str
    width: int
    height: int
    frame_count: int
    fps: float
    split: str = DEFAULT_SPLIT
    file_names: tuple[str, ...] = ()
    # optional scene grouping used by the category x scenario incidence table
    scenario: Optional[str] = None

    @property
    def duration(self) -> float:
        return self.frame_count / self.fps


@dataclass(frozen=True)
class InstanceTrack:
    id: int
    video_id: int
    category_id: int
    track: MaskTrack


@dataclass(frozen=True)
class Hypothesis:
    """A predicted instance. ``id`` is its position in the prediction file."""

    id: int
    video_id: int
    category_id: int
    score: float
    track: MaskTrack


@dataclass(frozen=True)
class DatasetManifest:
    categories: tuple[CategoryDef, ...]
    videos: tuple[VideoMeta, ...]
    tracks: tuple[InstanceTrack, ...]
    info: Mapping[str, Any] = field(default_factory=dict)

    @cached_property
    def _videos_by_id(self) -> dict[int, VideoMeta]:
        return {v.id: v for v in self.videos}

    @cached_property
    def _categories_by_id(self) -> dict[int, CategoryDef]:
        return {c.id: c for c in self.categories}

    @cached_property
    def _tracks_by_video(self) -> dict[int, tuple[InstanceTrack, ...]]:
        grouped: dict[int, list[InstanceTrack]] = {v.id: [] for v in self.videos}
        for tr in self.tracks:
            grouped.setdefault(tr.video_id, []).append(tr)
        return {k: tuple(sorted(v, key=lambda t: t.id)) for k, v in grouped.items()}

    def video(self, video_id: int) -> VideoMeta:
        try:
            return self._videos_by_id[video_id]
        except KeyError:
            raise KeyError(f"unknown video id {video_id!r}") from None

    def category(self, category_id: int) -> CategoryDef:
        return self._categories_by_id[category_id]

    def has_category(self, category_id: int) -> bool:
        return category_id in self._categories_by_id

    def has_video(self, video_id: int) -> bool:
        return video_id in self._videos_by_id

    def tracks_for(self, video_id: int) -> tuple[InstanceTrack, ...]:
        self.video(video_id)
        return self._tracks_by_video.get(video_id, ())


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str  # syntax | schema | reference | geometry
    path: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"kind": self.kind, "path": self.path, "message": self.message}

    def __str__(self) -> str:
        return f"[{self.kind}] {self.path}: {self.message}"


class ValidationError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = len(self.violations) - 3
        super().__init__(head + (f" (+{more} more)" if more > 0 else ""))


def violation_report(violations: Sequence[Violation]) -> dict[str, Any]:
    return {"count": len(violations), "violations": [v.to_dict() for v in violations]}


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


class _Checker:
    def __init__(self) -> None:
        self.violations: list[Violation] = []

    def add(self, kind: str, path: str, message: str) -> None:
        self.violations.append(Violation(kind, path, message))

    def require(self, obj: Mapping[str, Any], key: str, path: str, check, expected: str) -> Any:
        if key not in obj:
            self.add("schema", f"{path}.{key}", "missing required field")
            return None
        value = obj[key]
        if not check(value):
            self.add("schema", f"{path}.{key}", f"expected {expected}, got {value!r}"[:200])
            return None
        return value

    def frame_mask(self, seg: Any, path: str, shape: Optional[tuple[int, int]]) -> Optional[FrameMask]:
        if seg is None:
            return None
        if not isinstance(seg, Mapping):
            self.add("schema", path, "expected null or an RLE object")
            return None
        size = seg.get("size")
        if not (isinstance(size, (list, tuple)) and len(size) == 2 and all(_is_int(s) and s > 0 for s in size)):
            self.add("schema", f"{path}.size", f"expected [height, width], got {size!r}")
            return None
        counts = seg.get("counts")
        if isinstance(counts, str):
            try:
                counts = rle_string_to_counts(counts)
            except ValueError as exc:
                self.add("geometry", f"{path}.counts", str(exc))
                return None
        elif not (isinstance(counts, (list, tuple)) and all(_is_int(c) for c in counts)):
            self.add("schema", f"{path}.counts", "expected a list of integers or an RLE string")
            return None
        h, w = size
        if shape is not None and (h, w) != shape:
            self.add("geometry", f"{path}.size", f"mask size {[h, w]} does not match video size {list(shape)}")
            return None
        try:
            return FrameMask.from_counts(h, w, counts)
        except MaskError as exc:
            self.add("geometry", f"{path}.counts", str(exc))
            return None

    def track(self, segs: Any, path: str, video: Optional[VideoMeta], allow_short: bool) -> Optional[MaskTrack]:
        if not isinstance(segs, list):
            self.add("schema", path, "expected a list of per-frame masks")
            return None
        shape = (video.height, video.width) if video is not None else None
        before = len(self.violations)
        frames = [self.frame_mask(s, f"{path}[{t}]", shape) for t, s in enumerate(segs)]
        if video is not None:
            T = video.frame_count
            if len(frames) > T or (len(frames) < T and not allow_short):
                self.add("geometry", path, f"track has {len(frames)} frames, video {video.id} has {T}")
        if len(self.violations) > before or video is None:
            return None
        return MaskTrack.from_frames(frames, video.frame_count)


def validate_ground_truth(doc: Any) -> tuple[Optional[DatasetManifest], list[Violation]]:
    """Check a parsed ground-truth document; returns the manifest only when clean."""
    ck = _Checker()
    if not isinstance(doc, Mapping):
        ck.add("schema", "$", "top level must be an object")
        return None, ck.violations
    info = doc.get("info", {})
    if not isinstance(info, Mapping):
        ck.add("schema", "info", "expected an object")
        info = {}
    for key in ("categories", "videos", "annotations"):
        if not isinstance(doc.get(key), list):
            ck.add("schema", key, "missing or not a list")
    if ck.violations:
        return None, ck.violations

    categories: list[CategoryDef] = []
    for i, c in enumerate(doc["categories"]):
        p = f"categories[{i}]"
        if not isinstance(c, Mapping):
            ck.add("schema", p, "expected an object")
            continue
        cid = ck.require(c, "id", p, lambda v: _is_int(v) and v > 0, "a positive integer")
        name = ck.require(c, "name", p, lambda v: isinstance(v, str), "a string")
        scen = ck.require(c, "scenario", p, lambda v: v in SCENARIOS, f"one of {list(SCENARIOS)}")
        if cid is not None and name is not None and scen is not None:
            categories.append(CategoryDef(cid, name, scen))
    ids = [c.id for c in categories]
    dupes = sorted(k for k, n in Counter(ids).items() if n > 1)
    for d in dupes:
        ck.add("schema", "categories", f"duplicate category id {d}")
    if not dupes and sorted(ids) != list(range(1, len(ids) + 1)) and len(categories) == len(doc["categories"]):
        ck.add("schema", "categories", f"category ids must be contiguous from 1, got {sorted(ids)}")
    cat_ids = set(ids)

    videos: list[VideoMeta] = []
    for i, v in enumerate(doc["videos"]):
        p = f"videos[{i}]"
        if not isinstance(v, Mapping):
            ck.add("schema", p, "expected an object")
            continue
        n0 = len(ck.violations)
        vid = ck.require(v, "id", p, _is_int, "an integer")
        name = ck.require(v, "name", p, lambda x: isinstance(x, str), "a string")
        width = ck.require(v, "width", p, lambda x: _is_int(x) and x > 0, "a positive integer")
        height = ck.require(v, "height", p, lambda x: _is_int(x) and x > 0, "a positive integer")
        T = ck.require(v, "frame_count", p, lambda x: _is_int(x) and x >= 0, "a non-negative integer")
        fps = ck.require(v, "fps", p, lambda x: _is_number(x) and x > 0, "a positive number")
        split = v.get("split", DEFAULT_SPLIT)
        if split not in SPLITS:
            ck.add("schema", f"{p}.split", f"expected one of {list(SPLITS)}, got {split!r}")
        scenario = v.get("scenario")
        if scenario is not None and scenario not in SCENARIOS:
            ck.add("schema", f"{p}.scenario", f"expected one of {list(SCENARIOS)}, got {scenario!r}")
        names = ck.require(
            v, "file_names", p, lambda x: isinstance(x, list) and all(isinstance(s, str) for s in x),
            "a list of strings",
        )
        if names is not None and T is not None and len(names) != T:
            ck.add("schema", f"{p}.file_names", f"{len(names)} file names for frame_count {T}")
        if len(ck.violations) == n0:
            videos.append(VideoMeta(vid, name, width, height, T, fps, split, tuple(names), scenario))
    for d in sorted(k for k, n in Counter(v.id for v in videos).items() if n > 1):
        ck.add("schema", "videos", f"duplicate video id {d}")
    video_by_id = {v.id: v for v in videos}

    tracks: list[InstanceTrack] = []
    for i, a in enumerate(doc["annotations"]):
        p = f"annotations[{i}]"
        if not isinstance(a, Mapping):
            ck.add("schema", p, "expected an object")
            continue
        n0 = len(ck.violations)
        aid = ck.require(a, "id", p, _is_int, "an integer")
        vid = ck.require(a, "video_id", p, _is_int, "an integer")
        cid = ck.require(a, "category_id", p, _is_int, "an integer")
        video = None
        if vid is not None:
            video = video_by_id.get(vid)
            if video is None:
                ck.add("reference", f"{p}.video_id", f"video_id {vid} does not exist")
        if cid is not None and cid not in cat_ids:
            ck.add("reference", f"{p}.category_id", f"category_id {cid} does not exist")
        if "segmentations" not in a:
            ck.add("schema", f"{p}.segmentations", "missing required field")
            continue
        track = ck.track(a["segmentations"], f"{p}.segmentations", video, allow_short=False)
        if track is not None and not track.support:
            ck.add("geometry", f"{p}.segmentations", "ground-truth track is empty in every frame")
        if len(ck.violations) == n0 and track is not None:
            tracks.append(InstanceTrack(aid, vid, cid, track))
    for d in sorted(k for k, n in Counter(t.id for t in tracks).items() if n > 1):
        ck.add("schema", "annotations", f"duplicate annotation id {d}")

    if ck.violations:
        return None, ck.violations
    manifest = DatasetManifest(
        tuple(sorted(categories, key=lambda c: c.id)), tuple(videos), tuple(tracks), dict(info)
    )
    return manifest, []


def validate_predictions(doc: Any, manifest: DatasetManifest) -> tuple[Optional[list[Hypothesis]], list[Violation]]:
    ck = _Checker()
    if not isinstance(doc, list):
        ck.add("schema", "$", "predictions must be a list of records")
        return None, ck.violations
    hyps: list[Hypothesis] = []
    for i, r in enumerate(doc):
        p = f"[{i}]"
        if not isinstance(r, Mapping):
            ck.add("schema", p, "expected an object")
            continue
        n0 = len(ck.violations)
        vid = ck.require(r, "video_id", p, _is_int, "an integer")
        cid = ck.require(r, "category_id", p, _is_int, "an integer")
        score = ck.require(r, "score", p, _is_number, "a number")
        if score is not None and not 0.0 <= score <= 1.0:
            ck.add("schema", f"{p}.score", f"score outside [0,1]: {score}")
        video = None
        if vid is not None:
            if manifest.has_video(vid):
                video = manifest.video(vid)
            else:
                ck.add("reference", f"{p}.video_id", f"video_id {vid} does not exist")
        if cid is not None and not manifest.has_category(cid):
            ck.add("reference", f"{p}.category_id", f"unknown category_id {cid}")
        if "segmentations" not in r:
            ck.add("schema", f"{p}.segmentations", "missing required field")
            continue
        track = ck.track(r["segmentations"], f"{p}.segmentations", video, allow_short=True)
        if len(ck.violations) == n0 and track is not None:
            hyps.append(Hypothesis(i, vid, cid, float(score), track))
    if ck.violations:
        return None, ck.violations
    return hyps, []


def _read_json(source: Source) -> Any:
    """Parse ``source``; raises ValidationError with a syntax violation on bad JSON."""
    if isinstance(source, (Mapping, list)):
        return source
    try:
        if isinstance(source, (str, os.PathLike)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            [Violation("syntax", f"line {exc.lineno}, column {exc.colno}", exc.msg)]
        ) from None


def load_ground_truth(source: Source) -> DatasetManifest:
    manifest, violations = validate_ground_truth(_read_json(source))
    if violations:
        raise ValidationError(violations)
    return manifest


def load_predictions(source: Source, manifest: DatasetManifest) -> list[Hypothesis]:
    hyps, violations = validate_predictions(_read_json(source), manifest)
    if violations:
        raise ValidationError(violations)
    return hyps


def parse_ground_truth(text: str) -> DatasetManifest:
    return load_ground_truth(io.StringIO(text))


# --------------------------------------------------------------------------
# serialization


def _dumps(doc: Any) -> str:
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n"


def _mask_doc(m: Optional[FrameMask]) -> Optional[dict[str, Any]]:
    if m is None:
        return None
    return {"size": [m.height, m.width], "counts": list(m.counts)}


def ground_truth_doc(manifest: DatasetManifest) -> dict[str, Any]:
    videos = []
    for v in manifest.videos:
        d: dict[str, Any] = {
            "id": v.id, "name": v.name, "width": v.width, "height": v.height,
            "frame_count": v.frame_count, "fps": v.fps, "split": v.split,
        }
        if v.scenario is not None:
            d["scenario"] = v.scenario
        d["file_names"] = list(v.file_names)
        videos.append(d)
    return {
        "info": dict(manifest.info),
        "categories": [{"id": c.id, "name": c.name, "scenario": c.scenario} for c in manifest.categories],
        "videos": videos,
        "annotations": [
            {
                "id": t.id, "video_id": t.video_id, "category_id": t.category_id,
                "segmentations": [_mask_doc(m) for m in t.track.masks],
            }
            for t in manifest.tracks
        ],
    }


def dump_ground_truth(manifest: DatasetManifest) -> str:
    return _dumps(ground_truth_doc(manifest))


def predictions_doc(hyps: Iterable[Hypothesis]) -> list[dict[str, Any]]:
    return [
        {
            "video_id": h.video_id, "category_id": h.category_id, "score": h.score,
            "segmentations": [_mask_doc(m) for m in h.track.masks],
        }
        for h in hyps
    ]


def dump_predictions(hyps: Iterable[Hypothesis]) -> str:
    return _dumps(predictions_doc(hyps))


def dump_document(doc: Any) -> str:
    """Serialize a report-style document with stable formatting."""
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


# --------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class DatasetStats:
    videos: int
    split_counts: dict[str, int]
    frames: int
    tracks: int
    masks: int
    mean_duration: Optional[float]
    # (category id, name, number of videos containing it), most frequent first
    category_histogram: tuple[tuple[int, str, int], ...]
    # category id -> scenario -> number of videos
    scenario_incidence: dict[int, dict[str, int]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "videos": self.videos,
            "splits": {s: self.split_counts.get(s, 0) for s in SPLITS},
            "frames": self.frames,
            "tracks": self.tracks,
            "masks": self.masks,
            "mean_duration_s": self.mean_duration,
            "category_histogram": [
                {"id": cid, "name": name, "videos": n} for cid, name, n in self.category_histogram
            ],
            "scenario_incidence": {
                str(cid): {s: row[s] for s in SCENARIOS} for cid, row in sorted(self.scenario_incidence.items())
            },
        }


def compute_stats(manifest: DatasetManifest) -> DatasetStats:
    videos = manifest.videos
    split_counts = {s: sum(1 for v in videos if v.split == s) for s in SPLITS}
    frames = sum(v.frame_count for v in videos)
    masks = sum(len(t.track.support) for t in manifest.tracks)
    mean_duration = (sum(v.duration for v in videos) / len(videos)) if videos else None

    cats_in_video: dict[int, set[int]] = {v.id: set() for v in videos}
    for t in manifest.tracks:
        cats_in_video[t.video_id].add(t.category_id)
    per_cat = Counter(c for cs in cats_in_video.values() for c in cs)
    hist = tuple(
        sorted(
            ((c.id, c.name, per_cat.get(c.id, 0)) for c in manifest.categories),
            key=lambda r: (-r[2], r[0]),
        )
    )
    incidence = {c.id: {s: 0 for s in SCENARIOS} for c in manifest.categories}
    for v in videos:
        for cid in cats_in_video[v.id]:
            scen = v.scenario or manifest.category(cid).scenario
            incidence[cid][scen] += 1
    return DatasetStats(len(videos), split_counts, frames, len(manifest.tracks), masks, mean_duration, hist, incidence)


# --------------------------------------------------------------------------
# AVSD / AVSS targets


def to_avsd(manifest: DatasetManifest, video_id: int) -> list[FrameMask]:
    """Per-frame binary saliency masks: the union of every instance present."""
    video = manifest.video(video_id)
    frames = [FrameMask.empty(video.height, video.width) for _ in range(video.frame_count)]
    for tr in manifest.tracks_for(video_id):
        for t, m in enumerate(tr.track.masks):
            if m is not None:
                frames[t] = frame_union(frames[t], m)
    return frames


def to_avss(manifest: DatasetManifest, video_id: int) -> list[np.ndarray]:
    """Per-frame semantic label maps; background is 0.

    Where instances overlap, the track with the higher id wins.
    """
    video = manifest.video(video_id)
    maps = [np.zeros((video.height, video.width), dtype=np.int32) for _ in range(video.frame_count)]
    for tr in manifest.tracks_for(video_id):  # ascending id
        for t, m in enumerate(tr.track.masks):
            if m is not None:
                maps[t][rle_decode(m)] = tr.category_id
    return maps
