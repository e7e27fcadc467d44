"""AP / AR for video instance segmentation over spatiotemporal mask IoU.

Protocol
--------
* Per (video, category, IoU threshold), hypotheses are visited by descending
  score (ties: ascending hypothesis id). Each takes the still-unmatched
  ground-truth track with the highest IoU at or above the threshold (ties:
  ascending track id); otherwise it is a false positive.
* Per (category, threshold), results are pooled over videos and ranked the
  same way. Precision is sampled at ``recall_points`` evenly spaced recall
  levels on [0, 1] after taking the right-running maximum; AP is the mean of
  the samples.
* AP averages over thresholds and over categories that have ground truth.
* AR@k keeps the k best-scoring hypotheses of each video (across categories
  by default) and averages the resulting recall over thresholds and
  categories.

Report values are computed with exact rational arithmetic and converted to
float percentages only at the end, so two implementations following the same
protocol produce bit-identical reports.
"""
from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .dataset import DatasetManifest, Hypothesis, InstanceTrack
from .masks import MaskTrack, spatiotemporal_iou, spatiotemporal_overlap

DEFAULT_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))

NO_VIDEOS = "no annotated videos; all metrics absent"
NO_INSTANCES = "no ground-truth instances; all metrics absent"

PROTOCOL = (
    "greedy matching by descending score (ties: ascending id), best unmatched IoU first, "
    "one ground truth per hypothesis; {r}-point right-max interpolated PR; "
    "AR@k caps hypotheses per {scope} and averages over IoU thresholds"
)


@dataclass(frozen=True)
class EvalConfig:
    iou_thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    recall_points: int = 101
    ar_caps: tuple[int, ...] = (1, 10)
    score_floor: Optional[float] = None
    # "video": top-k over all categories of a video; "category": per video and category
    ar_scope: str = "video"

    def __post_init__(self) -> None:
        th = tuple(float(t) for t in self.iou_thresholds)
        object.__setattr__(self, "iou_thresholds", th)
        object.__setattr__(self, "ar_caps", tuple(int(k) for k in self.ar_caps))
        if not th:
            raise ValueError("at least one IoU threshold is required")
        if any(not 0.0 < t <= 1.0 for t in th):
            raise ValueError(f"IoU thresholds must lie in (0, 1], got {th}")
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError(f"IoU thresholds must be strictly increasing, got {th}")
        if self.recall_points < 2:
            raise ValueError("recall_points must be at least 2")
        if any(k <= 0 for k in self.ar_caps):
            raise ValueError(f"AR caps must be positive, got {self.ar_caps}")
        if self.ar_scope not in ("video", "category"):
            raise ValueError(f"ar_scope must be 'video' or 'category', got {self.ar_scope!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "iou_thresholds": list(self.iou_thresholds),
            "recall_points": self.recall_points,
            "ar_caps": list(self.ar_caps),
            "ar_scope": self.ar_scope,
            "score_floor": self.score_floor,
        }


def parse_thresholds(spec: str) -> tuple[float, ...]:
    """``"0.5:0.95:0.05"`` -> inclusive range; a comma list is also accepted."""
    if ":" not in spec:
        return tuple(float(x) for x in spec.split(","))
    start, stop, step = (Decimal(x) for x in spec.split(":"))
    if step <= 0:
        raise ValueError("threshold step must be positive")
    out = []
    t = start
    while t <= stop:
        out.append(float(t))
        t += step
    return tuple(out)


def threshold_key(t: float) -> str:
    return f"{t:.2f}" if round(t, 2) == t else repr(t)


# --------------------------------------------------------------------------
# matching


@dataclass(frozen=True)
class MatchRecord:
    hyp_id: int
    score: float
    gt_id: Optional[int]
    iou: float

    @property
    def is_tp(self) -> bool:
        return self.gt_id is not None


def _score_order(hyps: Sequence[Hypothesis]) -> list[int]:
    return sorted(range(len(hyps)), key=lambda i: (-hyps[i].score, hyps[i].id))


def _greedy(order: Sequence[int], ious: np.ndarray, threshold: float) -> list[int]:
    """Matched ground-truth column per hypothesis row (-1 for none), visiting rows in ``order``."""
    n_hyp, n_gt = ious.shape
    taken = np.zeros(n_gt, dtype=bool)
    out = [-1] * n_hyp
    for h in order:
        if n_gt == 0:
            break
        row = np.where(taken, -1.0, ious[h])
        g = int(np.argmax(row))  # first maximum -> lowest gt index on ties
        if row[g] >= threshold:
            taken[g] = True
            out[h] = g
    return out


def match(
    gts: Sequence[InstanceTrack],
    hyps: Sequence[Hypothesis],
    threshold: float,
    iou_fn: Callable[[MaskTrack, MaskTrack], float] = spatiotemporal_iou,
) -> list[MatchRecord]:
    """Greedy matching for one video and category; records come back in score order.

    ``iou_fn(gt_track, hyp_track)`` supplies the overlap; it defaults to the
    spatiotemporal IoU kernel.
    """
    gts = sorted(gts, key=lambda g: g.id)
    ious = np.array([[iou_fn(g.track, h.track) for g in gts] for h in hyps], dtype=float)
    ious = ious.reshape(len(hyps), len(gts))
    order = _score_order(hyps)
    assigned = _greedy(order, ious, threshold)
    records = []
    for h in order:
        g = assigned[h]
        records.append(
            MatchRecord(
                hyps[h].id, hyps[h].score, gts[g].id if g >= 0 else None,
                float(ious[h, g]) if g >= 0 else (float(ious[h].max()) if len(gts) else 0.0),
            )
        )
    return records


# --------------------------------------------------------------------------
# precision / recall


@dataclass(frozen=True)
class PRCurve:
    recall: tuple[Fraction, ...]  # the sampled recall levels
    precision: tuple[Fraction, ...]  # interpolated precision at each level
    max_recall: Fraction

    @property
    def ap(self) -> Fraction:
        return sum(self.precision, Fraction(0)) / len(self.precision)


def _ranked(records: Iterable[MatchRecord]) -> list[MatchRecord]:
    return sorted(records, key=lambda r: (-r.score, r.hyp_id))


def _curve_from_flags(tp: np.ndarray, n_gt: int, recall_points: int) -> PRCurve:
    R = recall_points - 1
    levels = tuple(Fraction(k, R) for k in range(recall_points))
    if tp.size == 0:
        return PRCurve(levels, (Fraction(0),) * recall_points, Fraction(0))
    tp_cum = np.cumsum(tp, dtype=np.int64)
    fp_cum = np.cumsum(~tp, dtype=np.int64)
    prec = tp_cum / (tp_cum + fp_cum)
    # right-running maximum; keep the index of the record that attains it so
    # the exact fraction can be recovered
    env = np.maximum.accumulate(prec[::-1])[::-1]
    records = np.flatnonzero(prec == env)
    # first detection whose recall reaches level k: tp_cum * R >= k * n_gt
    reach = np.searchsorted(tp_cum * R, np.arange(recall_points, dtype=np.int64) * n_gt, side="left")
    precision = []
    for i in reach.tolist():
        if i >= tp.size:
            precision.append(Fraction(0))
            continue
        j = int(records[np.searchsorted(records, i)])
        precision.append(Fraction(int(tp_cum[j]), int(tp_cum[j] + fp_cum[j])))
    return PRCurve(levels, tuple(precision), Fraction(int(tp_cum[-1]), n_gt))


def pr_curve(records: Iterable[MatchRecord], n_gt: int, recall_points: int = 101) -> Optional[PRCurve]:
    """Interpolated PR samples for records pooled over videos; ``None`` when ``n_gt == 0``."""
    if n_gt == 0:
        return None
    ranked = _ranked(records)
    tp = np.array([r.is_tp for r in ranked], dtype=bool)
    return _curve_from_flags(tp, n_gt, recall_points)


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class CategoryResult:
    id: int
    name: str
    instances: int
    ap: Optional[float]


@dataclass(frozen=True)
class MetricsReport:
    """Percent-scale metrics; ``None`` marks a metric that could not be computed."""

    ap: Optional[float]
    ap50: Optional[float]
    ap75: Optional[float]
    ar: dict[int, Optional[float]]
    ap_per_threshold: dict[str, Optional[float]] = field(default_factory=dict)
    per_category: tuple[CategoryResult, ...] = ()
    config: EvalConfig = field(default_factory=EvalConfig)
    videos: int = 0
    instances: int = 0
    hypotheses: int = 0
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        metrics: dict[str, Any] = {"AP": self.ap, "AP50": self.ap50, "AP75": self.ap75}
        for k in sorted(self.ar):
            metrics[f"AR@{k}"] = self.ar[k]
        return {
            "protocol": PROTOCOL.format(r=self.config.recall_points, scope=self.config.ar_scope),
            "config": self.config.to_dict(),
            "counts": {
                "videos": self.videos,
                "instances": self.instances,
                "hypotheses": self.hypotheses,
                "categories_evaluated": sum(1 for c in self.per_category if c.ap is not None),
            },
            "metrics": metrics,
            "ap_per_threshold": dict(self.ap_per_threshold),
            "per_category": [
                {"id": c.id, "name": c.name, "instances": c.instances, "AP": c.ap} for c in self.per_category
            ],
            "diagnostics": list(self.diagnostics),
        }

    def headline(self) -> dict[str, Optional[float]]:
        out = {"AP": self.ap, "AP50": self.ap50, "AP75": self.ap75}
        for k in sorted(self.ar):
            out[f"AR{k}"] = self.ar[k]
        return out


def format_table(rows: Sequence[tuple[str, MetricsReport]]) -> str:
    """Plain-text table with one row per labelled report (AP, AP50, AP75, AR columns)."""
    if not rows:
        return ""
    cols = list(rows[0][1].headline())
    label_w = max(8, *(len(label) for label, _ in rows))
    widths = [max(6, len(c)) for c in cols]

    def fmt(v: Optional[float]) -> str:
        return "-" if v is None else f"{v:.1f}"

    lines = [
        f"{'Method':<{label_w}} | " + " ".join(f"{c:>{w}}" for c, w in zip(cols, widths)),
        "-" * (label_w + 3 + sum(widths) + len(widths) - 1),
    ]
    for label, rep in rows:
        vals = rep.headline()
        lines.append(f"{label:<{label_w}} | " + " ".join(f"{fmt(vals.get(c)):>{w}}" for c, w in zip(cols, widths)))
    return "\n".join(lines)


def _pct(x: Optional[Fraction]) -> Optional[float]:
    return None if x is None else float(x * 100)


def _mean(xs: Sequence[Fraction]) -> Optional[Fraction]:
    return sum(xs, Fraction(0)) / len(xs) if xs else None


def _threshold_index(thresholds: Sequence[float], value: float) -> Optional[int]:
    for i, t in enumerate(thresholds):
        if abs(t - value) < 1e-9:
            return i
    return None


def assemble_report(
    manifest: DatasetManifest,
    config: EvalConfig,
    ap_table: Mapping[tuple[int, int], Fraction],
    recall_table: Mapping[tuple[int, int, int], Fraction],
    n_gt: Mapping[int, int],
    n_hyps: int,
) -> MetricsReport:
    """Average exact per-(category, threshold) values into a report.

    ``ap_table[(cat, ti)]`` and ``recall_table[(cap, cat, ti)]`` must cover every
    category with ground truth. Shared by every evaluator implementation.
    """
    th = config.iou_thresholds
    present = [c.id for c in manifest.categories if n_gt.get(c.id, 0) > 0]
    diagnostics = []
    if not manifest.videos:
        diagnostics.append(NO_VIDEOS)
    elif not present:
        diagnostics.append(NO_INSTANCES)

    per_thr = [_mean([ap_table[(c, ti)] for c in present]) for ti in range(len(th))]
    ap = _mean([x for x in per_thr if x is not None]) if present else None

    def at(value: float) -> Optional[float]:
        i = _threshold_index(th, value)
        return None if i is None or not present else _pct(per_thr[i])

    ar = {}
    for k in config.ar_caps:
        vals = [recall_table[(k, c, ti)] for c in present for ti in range(len(th))]
        ar[k] = _pct(_mean(vals)) if present else None

    per_category = tuple(
        CategoryResult(
            c.id, c.name, n_gt.get(c.id, 0),
            _pct(_mean([ap_table[(c.id, ti)] for ti in range(len(th))])) if n_gt.get(c.id, 0) else None,
        )
        for c in manifest.categories
    )
    return MetricsReport(
        ap=_pct(ap),
        ap50=at(0.5),
        ap75=at(0.75),
        ar=ar,
        ap_per_threshold={threshold_key(t): (_pct(per_thr[i]) if present else None) for i, t in enumerate(th)},
        per_category=per_category,
        config=config,
        videos=len(manifest.videos),
        instances=sum(n_gt.values()),
        hypotheses=n_hyps,
        diagnostics=tuple(diagnostics),
    )


# --------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class _VideoUnit:
    video_id: int
    gts: tuple[InstanceTrack, ...]
    hyps: tuple[Hypothesis, ...]
    thresholds: tuple[float, ...]


@dataclass(frozen=True)
class _VideoResult:
    video_id: int
    # (category, threshold index) -> [(hyp id, score, is_tp)]
    outcomes: dict[tuple[int, int], list[tuple[int, float, bool]]]


def _evaluate_video(unit: _VideoUnit) -> _VideoResult:
    by_cat_gt: dict[int, list[InstanceTrack]] = defaultdict(list)
    by_cat_hyp: dict[int, list[Hypothesis]] = defaultdict(list)
    for g in unit.gts:
        by_cat_gt[g.category_id].append(g)
    for h in unit.hyps:
        by_cat_hyp[h.category_id].append(h)
    outcomes = {}
    for cat in sorted(by_cat_hyp):
        gts = sorted(by_cat_gt.get(cat, []), key=lambda g: g.id)
        hyps = by_cat_hyp[cat]
        ious = np.zeros((len(hyps), len(gts)))
        for i, h in enumerate(hyps):
            for j, g in enumerate(gts):
                inter, union = spatiotemporal_overlap(g.track, h.track)
                ious[i, j] = inter / union if union else 0.0
        order = _score_order(hyps)
        for ti, thr in enumerate(unit.thresholds):
            assigned = _greedy(order, ious, thr)
            outcomes[(cat, ti)] = [(hyps[h].id, hyps[h].score, assigned[h] >= 0) for h in order]
    return _VideoResult(unit.video_id, outcomes)


def evaluate(
    manifest: DatasetManifest,
    hypotheses: Sequence[Hypothesis],
    config: Optional[EvalConfig] = None,
    workers: int = 1,
) -> MetricsReport:
    """Score ``hypotheses`` against ``manifest``.

    ``workers > 1`` spreads the per-video IoU and matching work over a process
    pool; the report does not depend on it.
    """
    config = config or EvalConfig()
    hyps = [h for h in hypotheses if config.score_floor is None or h.score > config.score_floor]
    th = config.iou_thresholds

    hyps_by_video: dict[int, list[Hypothesis]] = defaultdict(list)
    for h in hyps:
        hyps_by_video[h.video_id].append(h)
    units = [
        _VideoUnit(v.id, manifest.tracks_for(v.id), tuple(hyps_by_video.get(v.id, ())), th)
        for v in sorted(manifest.videos, key=lambda v: v.id)
    ]
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_video, units, chunksize=max(1, len(units) // (4 * workers))))
    else:
        results = [_evaluate_video(u) for u in units]

    n_gt: dict[int, int] = defaultdict(int)
    for t in manifest.tracks:
        n_gt[t.category_id] += 1

    # rank of every hypothesis inside its AR group
    rank: dict[int, int] = {}
    groups: dict[Any, list[Hypothesis]] = defaultdict(list)
    for h in hyps:
        key = h.video_id if config.ar_scope == "video" else (h.video_id, h.category_id)
        groups[key].append(h)
    for members in groups.values():
        for r, h in enumerate(sorted(members, key=lambda h: (-h.score, h.id))):
            rank[h.id] = r

    pooled: dict[tuple[int, int], list[tuple[int, float, bool]]] = defaultdict(list)
    for res in results:
        for key, rows in res.outcomes.items():
            pooled[key].extend(rows)

    ap_table: dict[tuple[int, int], Fraction] = {}
    recall_table: dict[tuple[int, int, int], Fraction] = {}
    for cat in (c.id for c in manifest.categories):
        if n_gt.get(cat, 0) == 0:
            continue
        for ti in range(len(th)):
            rows = sorted(pooled.get((cat, ti), []), key=lambda r: (-r[1], r[0]))
            tp = np.array([r[2] for r in rows], dtype=bool)
            ap_table[(cat, ti)] = _curve_from_flags(tp, n_gt[cat], config.recall_points).ap
            for k in config.ar_caps:
                hits = sum(1 for hid, _, is_tp in rows if is_tp and rank[hid] < k)
                recall_table[(k, cat, ti)] = Fraction(hits, n_gt[cat])

    return assemble_report(manifest, config, ap_table, recall_table, n_gt, len(hyps))
