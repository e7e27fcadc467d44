"""Seeded synthetic scenes, prediction perturbations, and a brute-force reference evaluator.

Scenes are small videos of moving rectangles or ellipses. Shapes never leave
the grid, so every mask area has a closed form. ``reference_evaluate`` is a
deliberately naive re-implementation of the metrics on dense pixel grids with
exact fractions; it shares only the report container types with
:mod:`aviseval.evaluator`.
"""
from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np
from scipy import ndimage

from .dataset import SCENARIOS, SPLITS, CategoryDef, DatasetManifest, Hypothesis, InstanceTrack, VideoMeta
from .evaluator import NO_INSTANCES, NO_VIDEOS, CategoryResult, EvalConfig, MetricsReport, threshold_key
from .masks import FrameMask, MaskTrack, rle_decode, rle_encode

GENERATOR_NAME = "aviseval.synth"
MAX_REFERENCE_VIDEOS = 50
MAX_REFERENCE_INSTANCES = 6
SCORE_GRID = 10_000


class SynthError(ValueError):
    pass


class EmptyTrackWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SceneSpec:
    seed: int = 0
    videos: int = 2
    frames: int = 5
    height: int = 16
    width: int = 16
    instances: int = 2
    categories: int = 3
    interval: tuple[int, int] = (1, 5)  # min/max sounding-interval length
    shapes: tuple[str, ...] = ("rect",)
    # True: every shape covers the centre pixel and every interval covers the
    # middle frame, so all instances overlap there.
    overlap: bool = False
    moving: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "interval", tuple(int(x) for x in self.interval))
        object.__setattr__(self, "shapes", tuple(self.shapes))
        for name in ("videos", "frames", "instances", "categories"):
            if getattr(self, name) <= 0:
                raise SynthError(f"{name} must be positive")
        if self.height < 8 or self.width < 8:
            raise SynthError(f"grid must be at least 8x8, got {self.height}x{self.width}")
        lo, hi = self.interval
        if not 1 <= lo <= hi <= self.frames:
            raise SynthError(f"interval range {self.interval} does not fit in 1..{self.frames}")
        bad = set(self.shapes) - {"rect", "ellipse"}
        if not self.shapes or bad:
            raise SynthError(f"unknown shape family {sorted(bad) or '(none)'}")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SceneSpec":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise SynthError(f"unknown scene spec fields {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["interval"] = list(self.interval)
        d["shapes"] = list(self.shapes)
        return d


# --------------------------------------------------------------------------
# rasterization


def rect_grid(h: int, w: int, top: int, left: int, rh: int, rw: int) -> np.ndarray:
    g = np.zeros((h, w), dtype=bool)
    g[max(top, 0):max(top + rh, 0), max(left, 0):max(left + rw, 0)] = True
    return g


def ellipse_grid(h: int, w: int, cy: int, cx: int, ry: int, rx: int) -> np.ndarray:
    """Pixels whose centres satisfy (dy/ry)^2 + (dx/rx)^2 <= 1, in integer arithmetic."""
    yy, xx = np.mgrid[0:h, 0:w]
    dy, dx = yy - cy, xx - cx
    return dy * dy * rx * rx + dx * dx * ry * ry <= rx * rx * ry * ry


def ellipse_area(ry: int, rx: int) -> int:
    """Lattice-point count of an unclipped ellipse with integer centre."""
    return sum(2 * math.isqrt((rx * rx * (ry * ry - dy * dy)) // (ry * ry)) + 1 for dy in range(-ry, ry + 1))


@dataclass(frozen=True)
class _Placement:
    shape: str
    size: tuple[int, int]  # (rh, rw) for rect, (ry, rx) for ellipse
    origin: tuple[int, int]  # top-left for rect, centre for ellipse
    velocity: tuple[int, int]
    start: int
    length: int

    def extent(self) -> tuple[int, int]:
        if self.shape == "rect":
            return self.size
        return (2 * self.size[0] + 1, 2 * self.size[1] + 1)

    def area(self) -> int:
        if self.shape == "rect":
            return self.size[0] * self.size[1]
        return ellipse_area(*self.size)

    def grid(self, h: int, w: int, step: int) -> np.ndarray:
        y = self.origin[0] + self.velocity[0] * step
        x = self.origin[1] + self.velocity[1] * step
        if self.shape == "rect":
            return rect_grid(h, w, y, x, *self.size)
        return ellipse_grid(h, w, y, x, *self.size)


def _place(rng: np.random.Generator, spec: SceneSpec, cell: Optional[tuple[int, int, int, int]]) -> _Placement:
    """Draw one shape. ``cell`` = (top, left, height, width) confines it; None = forced-overlap mode."""
    T, H, W = spec.frames, spec.height, spec.width
    shape = str(rng.choice(spec.shapes))
    lo, hi = spec.interval
    if spec.overlap:
        mid = T // 2
        length = int(rng.integers(lo, hi + 1))
        start = int(rng.integers(max(0, mid - length + 1), min(mid, T - length) + 1))
    else:
        length = int(rng.integers(lo, hi + 1))
        start = int(rng.integers(0, T - length + 1))

    if cell is None:
        cy, cx = H // 2, W // 2
        if shape == "rect":
            rh = int(rng.integers(2, max(3, H // 2) + 1))
            rw = int(rng.integers(2, max(3, W // 2) + 1))
            top = int(rng.integers(max(0, cy - rh + 1), min(cy, H - rh) + 1))
            left = int(rng.integers(max(0, cx - rw + 1), min(cx, W - rw) + 1))
            return _Placement(shape, (rh, rw), (top, left), (0, 0), start, length)
        ry = int(rng.integers(1, max(2, H // 4) + 1))
        rx = int(rng.integers(1, max(2, W // 4) + 1))
        # offsets of at most half a semi-axis keep the centre pixel inside
        oy = cy + int(rng.integers(-(ry // 2), ry // 2 + 1))
        ox = cx + int(rng.integers(-(rx // 2), rx // 2 + 1))
        return _Placement(shape, (ry, rx), (oy, ox), (0, 0), start, length)

    top0, left0, ch, cw = cell
    if shape == "rect":
        rh = int(rng.integers(2, max(2, ch // 2) + 1))
        rw = int(rng.integers(2, max(2, cw // 2) + 1))
        ext = (rh, rw)
        size = (rh, rw)
    else:
        ry = int(rng.integers(1, max(1, (ch - 1) // 4) + 1))
        rx = int(rng.integers(1, max(1, (cw - 1) // 4) + 1))
        ext = (2 * ry + 1, 2 * rx + 1)
        size = (ry, rx)
    # choose a velocity the whole trajectory can afford inside the cell
    steps = length - 1
    vel = []
    for axis in (0, 1):
        room = (ch, cw)[axis] - ext[axis]
        v = int(rng.integers(-1, 2)) if spec.moving else 0
        if abs(v) * steps > room:
            v = 0
        vel.append(v)
    pos = []
    for axis in (0, 1):
        room = (ch, cw)[axis] - ext[axis]
        travel = abs(vel[axis]) * steps
        off = int(rng.integers(0, room - travel + 1))
        if vel[axis] < 0:
            off += travel
        pos.append(off + (top0, left0)[axis])
    if shape == "ellipse":
        pos = [pos[0] + size[0], pos[1] + size[1]]
    return _Placement(shape, size, (pos[0], pos[1]), (vel[0], vel[1]), start, length)


def _cells(spec: SceneSpec) -> list[tuple[int, int, int, int]]:
    """Split the grid into at least ``instances`` disjoint cells of >= 4x4 pixels."""
    n = spec.instances
    best = None
    for rows in range(1, n + 1):
        cols = math.ceil(n / rows)
        ch, cw = spec.height // rows, spec.width // cols
        if ch >= 4 and cw >= 4:
            score = min(ch, cw)
            if best is None or score > best[0]:
                best = (score, rows, cols, ch, cw)
    if best is None:
        raise SynthError(
            f"{n} disjoint instances cannot fit on a {spec.height}x{spec.width} grid"
        )
    _, rows, cols, ch, cw = best
    return [(r * ch, c * cw, ch, cw) for r in range(rows) for c in range(cols)][:n]


def generate(spec: SceneSpec) -> tuple[DatasetManifest, list[Hypothesis]]:
    """Build a manifest and exact-copy oracle predictions (score 1.0) from ``spec``.

    ``manifest.info["totals"]`` carries the generator's own bookkeeping
    (videos, splits, frames, tracks, masks) computed from the drawn intervals.
    """
    rng = np.random.default_rng(spec.seed)
    H, W, T = spec.height, spec.width, spec.frames
    categories = tuple(
        CategoryDef(i + 1, f"class_{i + 1:02d}", SCENARIOS[i % len(SCENARIOS)]) for i in range(spec.categories)
    )
    cells = None if spec.overlap else _cells(spec)
    videos, tracks = [], []
    masks_total = 0
    next_track = 1
    for v in range(spec.videos):
        vid = v + 1
        split = SPLITS[int(rng.integers(0, 2))]
        scenario = SCENARIOS[int(rng.integers(0, len(SCENARIOS)))]
        videos.append(
            VideoMeta(
                vid, f"synth_{spec.seed}_{vid:03d}", W, H, T, 1, split,
                tuple(f"{vid:03d}/{t:05d}.jpg" for t in range(T)), scenario,
            )
        )
        order = rng.permutation(spec.instances) if cells else range(spec.instances)
        for k in order:
            cat = int(rng.integers(1, spec.categories + 1))
            pl = _place(rng, spec, None if cells is None else cells[int(k)])
            frames: list[Optional[FrameMask]] = [None] * T
            for step in range(pl.length):
                frames[pl.start + step] = rle_encode(pl.grid(H, W, step))
            masks_total += pl.length
            tracks.append(InstanceTrack(next_track, vid, cat, MaskTrack(tuple(frames))))
            next_track += 1
    info = {
        "generator": GENERATOR_NAME,
        "spec": spec.to_dict(),
        "totals": {
            "videos": spec.videos,
            "splits": {s: sum(1 for v in videos if v.split == s) for s in SPLITS},
            "frames": spec.videos * T,
            "tracks": spec.videos * spec.instances,
            "masks": masks_total,
        },
    }
    manifest = DatasetManifest(categories, tuple(videos), tuple(tracks), info)
    oracle = [Hypothesis(i, t.video_id, t.category_id, 1.0, t.track) for i, t in enumerate(tracks)]
    return manifest, oracle


# --------------------------------------------------------------------------
# perturbations


PERTURBATION_KINDS = (
    "shift", "dilate", "erode", "truncate_interval", "score_noise", "flip_category", "drop", "duplicate", "rescore",
)


@dataclass(frozen=True)
class PerturbationOp:
    """One edit applied to a subset of hypotheses.

    ``targets`` selects hypotheses by position in the input list; otherwise
    each hypothesis is hit independently with probability ``fraction``.
    """

    kind: str
    params: tuple[float, ...] = ()
    fraction: float = 1.0
    targets: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in PERTURBATION_KINDS:
            raise SynthError(f"unknown perturbation {self.kind!r}")
        object.__setattr__(self, "params", tuple(self.params))
        need = {"shift": 2, "dilate": 1, "erode": 1, "truncate_interval": 1, "score_noise": 1}.get(self.kind, 0)
        if len(self.params) != need:
            raise SynthError(f"{self.kind} takes {need} parameter(s), got {len(self.params)}")
        if self.kind in ("dilate", "erode", "truncate_interval") and self.params[0] < 0:
            raise SynthError(f"{self.kind} parameter must be non-negative")
        if not 0.0 <= self.fraction <= 1.0:
            raise SynthError("fraction must lie in [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "PerturbationOp":
        """``kind[:p1,p2][@fraction]``, e.g. ``shift:1,0@0.5`` or ``flip_category@0.25``."""
        fraction = 1.0
        if "@" in text:
            text, frac = text.split("@", 1)
            fraction = float(frac)
        kind, _, args = text.partition(":")
        params = tuple(float(a) for a in args.split(",")) if args else ()
        return cls(kind.strip(), params, fraction)


def _shift_grid(g: np.ndarray, dx: int, dy: int) -> np.ndarray:
    out = np.zeros_like(g)
    h, w = g.shape
    ys, yd = (slice(0, h - dy), slice(dy, h)) if dy >= 0 else (slice(-dy, h), slice(0, h + dy))
    xs, xd = (slice(0, w - dx), slice(dx, w)) if dx >= 0 else (slice(-dx, w), slice(0, w + dx))
    if abs(dy) < h and abs(dx) < w:
        out[yd, xd] = g[ys, xs]
    return out


def _map_frames(track: MaskTrack, fn) -> MaskTrack:
    frames = []
    for m in track.masks:
        if m is None:
            frames.append(None)
            continue
        frames.append(rle_encode(fn(rle_decode(m))))
    return MaskTrack(tuple(frames))


def _unique_scores(hyps: list[Hypothesis]) -> list[Hypothesis]:
    """Move colliding scores to the nearest free slot on the 1/SCORE_GRID grid (lower first)."""
    used: set[int] = set()
    out = []
    for h in hyps:
        q = min(SCORE_GRID - 1, max(1, round(h.score * SCORE_GRID)))
        for d in range(SCORE_GRID):
            cand = [q - d, q + d] if d else [q]
            free = [c for c in cand if 1 <= c < SCORE_GRID and c not in used]
            if free:
                q = free[0]
                break
        else:
            raise SynthError("score grid exhausted")
        used.add(q)
        out.append(replace(h, score=q / SCORE_GRID))
    return out


def perturb(
    hyps: Sequence[Hypothesis],
    ops: Sequence[PerturbationOp],
    seed: int,
    num_categories: Optional[int] = None,
    allow_ties: bool = False,
) -> list[Hypothesis]:
    """Apply ``ops`` in order. Output ids are renumbered 0..n-1 in list order.

    Unless ``allow_ties`` is set, any score-changing op leaves all scores
    distinct (quantized to 1/10000).
    """
    rng = np.random.default_rng(seed)
    cur = list(hyps)
    touched_scores = False
    for op in ops:
        if op.targets is not None:
            hit = set(op.targets)
            chosen = [i in hit for i in range(len(cur))]
        else:
            chosen = (rng.random(len(cur)) < op.fraction).tolist()
        nxt: list[Hypothesis] = []
        for i, h in enumerate(cur):
            if not chosen[i]:
                nxt.append(h)
                continue
            k = op.kind
            if k == "shift":
                dx, dy = int(op.params[0]), int(op.params[1])
                nxt.append(replace(h, track=_map_frames(h.track, lambda g: _shift_grid(g, dx, dy))))
            elif k in ("dilate", "erode"):
                r = int(op.params[0])
                if r == 0:
                    nxt.append(h)
                    continue
                st = np.ones((2 * r + 1, 2 * r + 1), dtype=bool)
                fn = ndimage.binary_dilation if k == "dilate" else ndimage.binary_erosion
                nxt.append(replace(h, track=_map_frames(h.track, lambda g: fn(g, structure=st))))
            elif k == "truncate_interval":
                n = int(op.params[0])
                support = h.track.support
                drop = set(support[len(support) - n:]) if n else set()
                frames = tuple(None if t in drop else m for t, m in enumerate(h.track.masks))
                nxt.append(replace(h, track=MaskTrack(frames)))
            elif k == "score_noise":
                s = float(np.clip(h.score + rng.normal(0.0, op.params[0]), 0.0, 1.0))
                nxt.append(replace(h, score=s))
                touched_scores = True
            elif k == "rescore":
                nxt.append(replace(h, score=float(rng.integers(1, SCORE_GRID)) / SCORE_GRID))
                touched_scores = True
            elif k == "flip_category":
                if not num_categories or num_categories < 2:
                    raise SynthError("flip_category needs num_categories >= 2")
                nxt.append(replace(h, category_id=h.category_id % num_categories + 1))
            elif k == "drop":
                continue
            elif k == "duplicate":
                nxt.append(h)
                nxt.append(replace(h, score=h.score * 0.9))
                touched_scores = True
        cur = nxt
    for h in cur:
        if not h.track.support:
            warnings.warn(f"hypothesis for video {h.video_id} is empty in every frame", EmptyTrackWarning)
    if touched_scores and not allow_ties:
        cur = _unique_scores(cur)
    return [replace(h, id=i) for i, h in enumerate(cur)]


# --------------------------------------------------------------------------
# brute-force reference evaluator


def _dense(mask: Optional[FrameMask], shape: tuple[int, int]) -> np.ndarray:
    """Decode by walking runs pixel by pixel; intentionally independent of the codec."""
    h, w = shape
    flat = [False] * (h * w)
    if mask is not None:
        pos = 0
        value = False
        for c in mask.counts:
            for p in range(pos, pos + c):
                flat[p] = value
            pos += c
            value = not value
    grid = np.zeros((h, w), dtype=bool)
    for p, v in enumerate(flat):
        if v:
            grid[p % h, p // h] = True
    return grid


def _dense_track(track: MaskTrack, shape: tuple[int, int]) -> np.ndarray:
    return np.stack([_dense(m, shape) for m in track.masks]) if track.masks else np.zeros((0, *shape), bool)


def dense_iou(a: np.ndarray, b: np.ndarray) -> Fraction:
    """Spatiotemporal IoU of two dense ``(T, h, w)`` stacks as an exact fraction."""
    inter = int(np.logical_and(a, b).sum())
    union = int(np.logical_or(a, b).sum())
    return Fraction(inter, union) if union else Fraction(0)


def _replay(gt_ids, hyp_list, ious, threshold: Fraction) -> dict[int, Optional[int]]:
    """Score-ordered greedy replay; returns hyp id -> matched gt id."""
    taken: set[int] = set()
    out: dict[int, Optional[int]] = {}
    for h in sorted(hyp_list, key=lambda h: (-h.score, h.id)):
        best = None
        best_iou = None
        for g in sorted(gt_ids):
            if g in taken:
                continue
            iou = ious[(h.id, g)]
            if iou >= threshold and (best_iou is None or iou > best_iou):
                best, best_iou = g, iou
        if best is not None:
            taken.add(best)
        out[h.id] = best
    return out


def _reference_ap(flags: list[bool], n_gt: int, recall_points: int) -> Fraction:
    precisions = []
    recalls = []
    tp = fp = 0
    for f in flags:
        tp += f
        fp += not f
        precisions.append(Fraction(tp, tp + fp))
        recalls.append(Fraction(tp, n_gt))
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    total = Fraction(0)
    for k in range(recall_points):
        level = Fraction(k, recall_points - 1)
        for r, p in zip(recalls, precisions):
            if r >= level:
                total += p
                break
    return total / recall_points


def reference_evaluate(
    manifest: DatasetManifest, hyps: Sequence[Hypothesis], config: Optional[EvalConfig] = None
) -> MetricsReport:
    config = config or EvalConfig()
    if len(manifest.videos) > MAX_REFERENCE_VIDEOS:
        raise SynthError(f"reference evaluator is limited to {MAX_REFERENCE_VIDEOS} videos")
    for v in manifest.videos:
        if len(manifest.tracks_for(v.id)) > MAX_REFERENCE_INSTANCES:
            raise SynthError(f"reference evaluator is limited to {MAX_REFERENCE_INSTANCES} instances per video")
    if config.score_floor is not None:
        hyps = [h for h in hyps if h.score > config.score_floor]
    thresholds = [Fraction(repr(t)) for t in config.iou_thresholds]

    dense_gt = {}
    for t in manifest.tracks:
        v = manifest.video(t.video_id)
        dense_gt[t.id] = _dense_track(t.track, (v.height, v.width))
    ious: dict[tuple[int, int], Fraction] = {}
    for h in hyps:
        v = manifest.video(h.video_id)
        dh = _dense_track(h.track, (v.height, v.width))
        for t in manifest.tracks_for(h.video_id):
            if t.category_id == h.category_id:
                ious[(h.id, t.id)] = dense_iou(dense_gt[t.id], dh)

    n_gt: dict[int, int] = defaultdict(int)
    for t in manifest.tracks:
        n_gt[t.category_id] += 1

    def run(hyp_subset, cat, thr):
        matched: dict[int, Optional[int]] = {}
        for v in manifest.videos:
            gts = [t.id for t in manifest.tracks_for(v.id) if t.category_id == cat]
            hs = [h for h in hyp_subset if h.video_id == v.id and h.category_id == cat]
            matched.update(_replay(gts, hs, ious, thr))
        return matched

    ap_table: dict[tuple[int, int], Fraction] = {}
    recall_table: dict[tuple[int, int, int], Fraction] = {}
    for c in manifest.categories:
        if not n_gt.get(c.id):
            continue
        for ti, thr in enumerate(thresholds):
            matched = run(hyps, c.id, thr)
            ranked = sorted((h for h in hyps if h.category_id == c.id), key=lambda h: (-h.score, h.id))
            flags = [matched[h.id] is not None for h in ranked]
            ap_table[(c.id, ti)] = _reference_ap(flags, n_gt[c.id], config.recall_points)
            for k in config.ar_caps:
                kept = []
                for v in manifest.videos:
                    in_video = [h for h in hyps if h.video_id == v.id]
                    if config.ar_scope == "video":
                        kept += sorted(in_video, key=lambda h: (-h.score, h.id))[:k]
                    else:
                        for cc in manifest.categories:
                            group = [h for h in in_video if h.category_id == cc.id]
                            kept += sorted(group, key=lambda h: (-h.score, h.id))[:k]
                m = run(kept, c.id, thr)
                recall_table[(k, c.id, ti)] = Fraction(sum(1 for g in m.values() if g is not None), n_gt[c.id])

    present = [c.id for c in manifest.categories if n_gt.get(c.id)]
    nt = len(thresholds)

    def pct(x: Fraction) -> float:
        return float(x * 100)

    def cell_mean(values: list[Fraction]) -> Optional[float]:
        return pct(sum(values, Fraction(0)) / len(values)) if values else None

    def ap_at(value: float) -> Optional[float]:
        for ti, t in enumerate(config.iou_thresholds):
            if abs(t - value) < 1e-9:
                return cell_mean([ap_table[(c, ti)] for c in present])
        return None

    diagnostics = []
    if not manifest.videos:
        diagnostics.append(NO_VIDEOS)
    elif not present:
        diagnostics.append(NO_INSTANCES)
    return MetricsReport(
        ap=cell_mean([ap_table[(c, ti)] for c in present for ti in range(nt)]),
        ap50=ap_at(0.5),
        ap75=ap_at(0.75),
        ar={k: cell_mean([recall_table[(k, c, ti)] for c in present for ti in range(nt)]) for k in config.ar_caps},
        ap_per_threshold={
            threshold_key(t): cell_mean([ap_table[(c, ti)] for c in present])
            for ti, t in enumerate(config.iou_thresholds)
        },
        per_category=tuple(
            CategoryResult(c.id, c.name, n_gt.get(c.id, 0), cell_mean([ap_table[(c.id, ti)] for ti in range(nt)]) if n_gt.get(c.id) else None)
            for c in manifest.categories
        ),
        config=config,
        videos=len(manifest.videos),
        instances=len(manifest.tracks),
        hypotheses=len(hyps),
        diagnostics=tuple(diagnostics),
    )


# --------------------------------------------------------------------------
# standard desk-scale suite

SUITE_OPS = (
    PerturbationOp("shift", (1, 0), 0.3),
    PerturbationOp("dilate", (1,), 0.15),
    PerturbationOp("erode", (1,), 0.1),
    PerturbationOp("truncate_interval", (2,), 0.25),
    PerturbationOp("flip_category", (), 0.15),
    PerturbationOp("duplicate", (), 0.2),
    PerturbationOp("drop", (), 0.1),
    PerturbationOp("rescore"),
)


def suite_spec(seed: int) -> SceneSpec:
    """Scene ``seed`` of the standard suite: 64x64, up to 20 frames, up to 6 instances per video."""
    rng = np.random.default_rng([seed, 0x5EED])
    frames = int(rng.integers(4, 21))
    return SceneSpec(
        seed=seed,
        videos=int(rng.integers(1, 5)),
        frames=frames,
        height=64,
        width=64,
        instances=int(rng.integers(1, MAX_REFERENCE_INSTANCES + 1)),
        categories=int(rng.integers(2, 5)),
        interval=(1, frames),
        shapes=("rect", "ellipse"),
        overlap=bool(seed % 3 == 0),
    )


def synthetic_suite(n: int = 50, ops: Sequence[PerturbationOp] = SUITE_OPS):
    """Yield ``(spec, manifest, degraded hypotheses)`` for seeds ``0..n-1``."""
    for seed in range(n):
        spec = suite_spec(seed)
        manifest, oracle = generate(spec)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptyTrackWarning)
            hyps = perturb(oracle, ops, seed=seed, num_categories=spec.categories)
        yield spec, manifest, hyps
