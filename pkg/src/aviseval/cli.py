"""``aviseval`` command line.

Exit codes: 0 success, 1 validation failures, 2 usage or I/O error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import Optional, Sequence

from . import dataset as ds
from .evaluator import EvalConfig, evaluate, format_table, parse_thresholds
from .masks import rle_encode
from .synth import PerturbationOp, SceneSpec, SynthError, generate, perturb

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _read_doc(path: str):
    try:
        return ds._read_json(path), []
    except ds.ValidationError as exc:
        return None, exc.violations


def _load_pair(gt_path: str, pred_path: Optional[str]):
    """Validate ground truth and (optionally) predictions, collecting every violation."""
    violations: list[ds.Violation] = []
    doc, errs = _read_doc(gt_path)
    violations += [ds.Violation(v.kind, f"gt:{v.path}", v.message) for v in errs]
    manifest = None
    if doc is not None:
        manifest, errs = ds.validate_ground_truth(doc)
        violations += [ds.Violation(v.kind, f"gt:{v.path}", v.message) for v in errs]
    hyps = None
    if pred_path is not None:
        pdoc, errs = _read_doc(pred_path)
        violations += [ds.Violation(v.kind, f"pred:{v.path}", v.message) for v in errs]
        if pdoc is not None and manifest is not None:
            hyps, errs = ds.validate_predictions(pdoc, manifest)
            violations += [ds.Violation(v.kind, f"pred:{v.path}", v.message) for v in errs]
    return manifest, hyps, violations


def cmd_validate(args) -> int:
    _, _, violations = _load_pair(args.gt, args.pred)
    sys.stdout.write(ds.dump_document(ds.violation_report(violations)))
    return EXIT_INVALID if violations else EXIT_OK


def cmd_stats(args) -> int:
    manifest, _, violations = _load_pair(args.gt, None)
    if violations:
        sys.stdout.write(ds.dump_document(ds.violation_report(violations)))
        return EXIT_INVALID
    text = ds.dump_document(ds.compute_stats(manifest).to_dict())
    if args.out:
        _write(Path(args.out), text)
    sys.stdout.write(text)
    return EXIT_OK


def _eval_config(args) -> EvalConfig:
    try:
        return EvalConfig(
            iou_thresholds=parse_thresholds(args.thresholds),
            ar_caps=tuple(int(k) for k in args.ar_caps.split(",")),
            score_floor=args.score_floor,
            ar_scope=args.ar_scope,
        )
    except (ValueError, ArithmeticError) as exc:
        raise UsageError(str(exc)) from None


def cmd_eval(args) -> int:
    config = _eval_config(args)
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    manifest, hyps, violations = _load_pair(args.gt, args.pred)
    if violations:
        sys.stdout.write(ds.dump_document(ds.violation_report(violations)))
        return EXIT_INVALID
    report = evaluate(manifest, hyps, config, workers=args.workers)
    if args.out:
        _write(Path(args.out), ds.dump_document(report.to_dict()))
    print(format_table([(args.label, report)]))
    for d in report.diagnostics:
        print(f"note: {d}", file=sys.stderr)
    return EXIT_OK


def cmd_convert(args) -> int:
    manifest, _, violations = _load_pair(args.gt, None)
    if violations:
        sys.stdout.write(ds.dump_document(ds.violation_report(violations)))
        return EXIT_INVALID
    if not manifest.has_video(args.video):
        raise UsageError(f"unknown video id {args.video}")
    video = manifest.video(args.video)
    frames = []
    if args.task == "avsd":
        for name, m in zip(video.file_names, ds.to_avsd(manifest, video.id)):
            frames.append({"file_name": name, "size": [m.height, m.width], "counts": list(m.counts)})
    else:
        cats = [c.id for c in manifest.categories]
        for name, labels in zip(video.file_names, ds.to_avss(manifest, video.id)):
            segments = [
                {"category_id": c, "size": [video.height, video.width], "counts": list(rle_encode(labels == c).counts)}
                for c in cats
                if (labels == c).any()
            ]
            frames.append({"file_name": name, "segments": segments})
    doc = {"task": args.task, "video_id": video.id, "video_name": video.name, "frames": frames}
    out = Path(args.out) / f"{video.id}_{args.task}.json"
    _write(out, ds.dump_document(doc))
    print(out)
    return EXIT_OK


def cmd_synth(args) -> int:
    fields: dict = {}
    if args.spec:
        try:
            fields.update(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad scene spec: {exc}") from None
    for name in ("videos", "frames", "height", "width", "instances", "categories"):
        value = getattr(args, name)
        if value is not None:
            fields[name] = value
    if args.shapes:
        fields["shapes"] = args.shapes.split(",")
    if args.overlap:
        fields["overlap"] = True
    if args.seed is not None:
        fields["seed"] = args.seed
    try:
        spec = SceneSpec.from_dict(fields)
        manifest, oracle = generate(spec)
        ops = [PerturbationOp.parse(p) for p in args.perturb or []]
        out = Path(args.out)
        _write(out / "gt.json", ds.dump_ground_truth(manifest))
        _write(out / "oracle.json", ds.dump_predictions(oracle))
        if ops:
            preds = perturb(oracle, ops, seed=spec.seed, num_categories=spec.categories)
            _write(out / "pred.json", ds.dump_predictions(preds))
    except (SynthError, TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aviseval", description="Audio-visual instance segmentation benchmark tools.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check ground truth (and predictions) and list every violation")
    v.add_argument("--gt", required=True)
    v.add_argument("--pred")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("stats", help="dataset statistics")
    s.add_argument("--gt", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    e = sub.add_parser("eval", help="compute AP / AR")
    e.add_argument("--gt", required=True)
    e.add_argument("--pred", required=True)
    e.add_argument("--thresholds", default="0.5:0.95:0.05", help="start:stop:step or a comma list")
    e.add_argument("--ar-caps", default="1,10")
    e.add_argument("--ar-scope", choices=("video", "category"), default="video")
    e.add_argument("--score-floor", type=float, default=None, help="keep only hypotheses scoring above this")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--label", default="predictions")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("convert", help="derive AVSD or AVSS targets for one video")
    c.add_argument("--gt", required=True)
    c.add_argument("--task", choices=("avsd", "avss"), required=True)
    c.add_argument("--video", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_convert)

    y = sub.add_parser("synth", help="generate a synthetic scene")
    y.add_argument("--seed", type=int)
    y.add_argument("--spec", help="JSON scene spec; flags override its fields")
    y.add_argument("--out", required=True)
    for name in ("videos", "frames", "height", "width", "instances", "categories"):
        y.add_argument(f"--{name}", type=int)
    y.add_argument("--shapes", help="comma list of rect, ellipse")
    y.add_argument("--overlap", action="store_true")
    y.add_argument("--perturb", action="append", help="kind[:params][@fraction], repeatable; writes pred.json")
    y.set_defaults(func=cmd_synth)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
