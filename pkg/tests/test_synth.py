import warnings
from fractions import Fraction

import numpy as np
import pytest

from aviseval import dataset as ds
from aviseval.evaluator import EvalConfig, evaluate
from aviseval.masks import MaskTrack, rle_decode, rle_encode, spatiotemporal_iou, spatiotemporal_overlap
from aviseval.synth import (
    EmptyTrackWarning,
    PerturbationOp,
    SceneSpec,
    SynthError,
    dense_iou,
    ellipse_area,
    ellipse_grid,
    generate,
    perturb,
    reference_evaluate,
)

from conftest import square, track_of


def test_generation_is_deterministic():
    spec = SceneSpec(seed=7, videos=2, frames=5, height=16, width=16, instances=2)
    a, oa = generate(spec)
    b, ob = generate(spec)
    assert ds.dump_ground_truth(a) == ds.dump_ground_truth(b)
    assert ds.dump_predictions(oa) == ds.dump_predictions(ob)
    assert ds.dump_ground_truth(generate(SceneSpec(seed=8))[0]) != ds.dump_ground_truth(a)


def test_generated_manifest_validates():
    m, oracle = generate(SceneSpec(seed=7, videos=3, instances=4, shapes=("rect", "ellipse")))
    doc = ds.ground_truth_doc(m)
    loaded, violations = ds.validate_ground_truth(doc)
    assert violations == []
    _, violations = ds.validate_predictions(ds.predictions_doc(oracle), loaded)
    assert violations == []


def test_oracle_is_exact_copy():
    m, oracle = generate(SceneSpec(seed=2, videos=2, instances=3))
    assert len(oracle) == len(m.tracks)
    for h, t in zip(oracle, m.tracks):
        assert h.score == 1.0 and h.track == t.track and h.category_id == t.category_id


def test_every_track_has_support():
    for seed in range(10):
        m, _ = generate(SceneSpec(seed=seed, videos=3, frames=7, instances=5, interval=(1, 7), overlap=seed % 2 == 0))
        assert all(t.track.support for t in m.tracks)


def test_interval_lengths_respected():
    m, _ = generate(SceneSpec(seed=3, videos=4, frames=10, instances=3, interval=(2, 4)))
    for t in m.tracks:
        first, last = t.track.sounding_interval
        assert 2 <= last - first + 1 <= 4
        assert len(t.track.support) == last - first + 1


def _bbox(g):
    ys, xs = np.nonzero(g)
    return ys.min(), ys.max(), xs.min(), xs.max()


def test_rectangle_areas_are_closed_form():
    m, _ = generate(SceneSpec(seed=1, videos=3, frames=6, height=32, width=32, instances=4, shapes=("rect",)))
    for t in m.tracks:
        areas = set()
        for mk in t.track.masks:
            if mk is None:
                continue
            g = rle_decode(mk)
            y0, y1, x0, x1 = _bbox(g)
            # a placed rectangle fills its bounding box exactly
            assert mk.area == (y1 - y0 + 1) * (x1 - x0 + 1)
            areas.add(mk.area)
        assert len(areas) == 1  # motion never clips the shape


def test_ellipse_areas_are_closed_form():
    m, _ = generate(SceneSpec(seed=4, videos=3, frames=6, height=40, width=40, instances=4, shapes=("ellipse",)))
    for t in m.tracks:
        for mk in t.track.masks:
            if mk is None:
                continue
            y0, y1, x0, x1 = _bbox(rle_decode(mk))
            ry, rx = (y1 - y0) // 2, (x1 - x0) // 2
            assert mk.area == ellipse_area(ry, rx)


def test_ellipse_area_formula_against_raster():
    for ry in range(1, 7):
        for rx in range(1, 7):
            assert ellipse_grid(20, 20, 10, 10, ry, rx).sum() == ellipse_area(ry, rx)


def test_overlap_mode_forces_overlap():
    spec = SceneSpec(seed=5, videos=2, frames=5, instances=3, overlap=True, shapes=("rect", "ellipse"))
    m, _ = generate(spec)
    mid = spec.frames // 2
    for v in m.videos:
        for t in m.tracks_for(v.id):
            assert rle_decode(t.track.masks[mid])[spec.height // 2, spec.width // 2]


def test_infeasible_and_invalid_specs():
    with pytest.raises(SynthError):
        generate(SceneSpec(height=8, width=8, instances=5))
    with pytest.raises(SynthError):
        SceneSpec(height=7)
    with pytest.raises(SynthError):
        SceneSpec(frames=3, interval=(1, 4))
    with pytest.raises(SynthError):
        SceneSpec(shapes=("triangle",))
    with pytest.raises(SynthError):
        SceneSpec.from_dict({"seed": 1, "colour": "red"})


# perturbations ------------------------------------------------------------------


def test_shift_zero_is_identity():
    m, oracle = generate(SceneSpec(seed=3, videos=2, instances=3))
    out = perturb(oracle, [PerturbationOp("shift", (0, 0))], seed=0)
    assert [h.track for h in out] == [h.track for h in oracle]


def test_shift_of_square_gives_iou_point_six():
    g = square(16, 16, 4, 4, 4)
    track = track_of([g, g], [1, 2], 4)
    h = ds.Hypothesis(0, 1, 1, 1.0, track)
    (shifted,) = perturb([h], [PerturbationOp("shift", (1, 0))], seed=0)
    # dense oracle on one frame: 12 shared pixels, 20 in the union
    a, b = rle_decode(track.masks[1]), rle_decode(shifted.track.masks[1])
    assert (int((a & b).sum()), int((a | b).sum())) == (12, 20)
    assert spatiotemporal_overlap(track, shifted.track) == (24, 40)
    assert spatiotemporal_iou(track, shifted.track) == 0.6


def test_truncate_interval_shortens_support():
    g = square(16, 16, 2, 2, 3)
    h = ds.Hypothesis(0, 1, 1, 1.0, track_of([g] * 5, [1, 2, 3, 4, 5], 7))
    (out,) = perturb([h], [PerturbationOp("truncate_interval", (2,))], seed=0)
    assert out.track.support == (1, 2, 3)


def test_truncating_everything_warns_but_keeps_hypothesis():
    g = square(16, 16, 2, 2, 3)
    h = ds.Hypothesis(0, 1, 1, 1.0, track_of([g], [0], 2))
    with pytest.warns(EmptyTrackWarning):
        out = perturb([h], [PerturbationOp("truncate_interval", (3,))], seed=0)
    assert len(out) == 1 and not out[0].track.support


def test_shift_off_grid_warns():
    g = square(16, 16, 2, 2, 3)
    h = ds.Hypothesis(0, 1, 1, 1.0, track_of([g], [0], 1))
    with pytest.warns(EmptyTrackWarning):
        (out,) = perturb([h], [PerturbationOp("shift", (20, 0))], seed=0)
    assert out.track.total_area == 0


def test_dilate_and_erode():
    g = square(16, 16, 4, 4, 4)
    h = ds.Hypothesis(0, 1, 1, 1.0, track_of([g], [0], 1))
    (d,) = perturb([h], [PerturbationOp("dilate", (1,))], seed=0)
    (e,) = perturb([h], [PerturbationOp("erode", (1,))], seed=0)
    assert d.track.total_area == 36 and e.track.total_area == 4


def test_metadata_ops_leave_masks_alone():
    m, oracle = generate(SceneSpec(seed=6, videos=2, instances=3, categories=4))
    out = perturb(oracle, [PerturbationOp("score_noise", (0.2,)), PerturbationOp("flip_category")], seed=1, num_categories=4)
    assert [h.track for h in out] == [h.track for h in oracle]
    assert all(a.category_id != b.category_id for a, b in zip(out, oracle))
    assert len({h.score for h in out}) == len(out)


def test_geometric_ops_leave_metadata_alone():
    m, oracle = generate(SceneSpec(seed=6, videos=2, instances=3))
    out = perturb(oracle, [PerturbationOp("shift", (1, 1)), PerturbationOp("dilate", (1,))], seed=1)
    assert [(h.score, h.category_id, h.video_id) for h in out] == [(h.score, h.category_id, h.video_id) for h in oracle]


def test_drop_and_duplicate():
    _, oracle = generate(SceneSpec(seed=6, videos=2, instances=3))
    assert perturb(oracle, [PerturbationOp("drop", targets=(0, 2))], seed=0) == [
        h.__class__(i, h.video_id, h.category_id, h.score, h.track) for i, h in enumerate(oracle[1:2] + oracle[3:])
    ]
    dup = perturb(oracle, [PerturbationOp("duplicate", targets=(0,))], seed=0)
    assert len(dup) == len(oracle) + 1 and dup[1].track == dup[0].track
    assert [h.id for h in dup] == list(range(len(dup)))


def test_perturb_is_deterministic():
    _, oracle = generate(SceneSpec(seed=12, videos=3, instances=3))
    ops = [PerturbationOp.parse("shift:1,-1@0.5"), PerturbationOp.parse("score_noise:0.1"), PerturbationOp.parse("drop@0.2")]
    assert perturb(oracle, ops, seed=4) == perturb(oracle, ops, seed=4)


def test_op_parsing_and_validation():
    op = PerturbationOp.parse("shift:2,-1@0.25")
    assert (op.kind, op.params, op.fraction) == ("shift", (2.0, -1.0), 0.25)
    with pytest.raises(SynthError):
        PerturbationOp.parse("shift:1")
    with pytest.raises(SynthError):
        PerturbationOp("teleport")
    with pytest.raises(SynthError):
        perturb(generate(SceneSpec())[1], [PerturbationOp("flip_category")], seed=0)


def test_shrinking_overlap_never_raises_iou():
    m, oracle = generate(SceneSpec(seed=21, videos=3, frames=6, height=24, width=24, instances=3))
    for k in range(1, 4):
        near = perturb(oracle, [PerturbationOp("shift", (k - 1, 0))], seed=0)
        far = perturb(oracle, [PerturbationOp("shift", (k, 0))], seed=0)
        for g, a, b in zip(m.tracks, near, far):
            assert spatiotemporal_iou(g.track, b.track) <= spatiotemporal_iou(g.track, a.track)


# reference evaluator ------------------------------------------------------------


def test_reference_oracle_predictions():
    for seed in range(5):
        m, oracle = generate(SceneSpec(seed=seed, videos=3, instances=3))
        rep = reference_evaluate(m, oracle)
        assert rep.ap == 100.0


def test_reference_refuses_large_inputs():
    m, oracle = generate(SceneSpec(seed=0, videos=51, instances=1, frames=2, interval=(1, 2)))
    with pytest.raises(SynthError):
        reference_evaluate(m, oracle)
    m, oracle = generate(SceneSpec(seed=0, videos=1, instances=7, height=32, width=32))
    with pytest.raises(SynthError):
        reference_evaluate(m, oracle)


def test_dense_iou_is_exact():
    a = np.zeros((2, 4, 4), bool)
    b = np.zeros((2, 4, 4), bool)
    a[0, :2, :2] = a[1, :2, :2] = True
    b[1, :2, :2] = True
    assert dense_iou(a, b) == Fraction(4, 8)


def test_reference_matches_evaluator_on_a_degraded_suite():
    m, oracle = generate(SceneSpec(seed=31, videos=4, frames=8, height=32, width=32, instances=4, categories=2))
    ops = [PerturbationOp("shift", (1, 0), 0.5), PerturbationOp("flip_category", targets=(1,)), PerturbationOp("rescore")]
    hyps = perturb(oracle, ops, seed=2, num_categories=2)
    for cfg in (EvalConfig(), EvalConfig(ar_caps=(1, 2, 5)), EvalConfig(score_floor=0.4)):
        assert evaluate(m, hyps, cfg).to_dict() == reference_evaluate(m, hyps, cfg).to_dict()


def test_one_flipped_category_in_four():
    m, oracle = generate(SceneSpec(seed=13, videos=1, instances=4, categories=3, height=32, width=32))
    hyps = perturb(oracle, [PerturbationOp("flip_category", targets=(2,))], seed=0, num_categories=3)
    a, b = evaluate(m, hyps), reference_evaluate(m, hyps)
    assert a.to_dict() == b.to_dict()
    assert a.ap < 100.0
