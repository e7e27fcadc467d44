from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aviseval.masks import (
    FrameMask,
    GeometryError,
    MaskTrack,
    RLECodecError,
    canonical_counts,
    frame_area,
    frame_intersection,
    frame_intersection_area,
    frame_union,
    frame_union_area,
    rle_decode,
    rle_encode,
    spatiotemporal_iou,
    spatiotemporal_overlap,
)

from conftest import dense_from_counts, dense_overlap, dense_track, grids, square, track_of, track_pairs


def test_decode_all_foreground():
    assert rle_decode(FrameMask(2, 2, (0, 4))).all()


def test_decode_all_background():
    assert not rle_decode(FrameMask(2, 2, (4,))).any()


def test_decode_column_major():
    grid = rle_decode(FrameMask(2, 2, (1, 2, 1)))
    # column-major walk: (0,0), (1,0), (0,1), (1,1)
    assert [grid[0, 0], grid[1, 0], grid[0, 1], grid[1, 1]] == [0, 1, 1, 0]
    assert np.array_equal(grid, dense_from_counts(2, 2, [1, 2, 1]))


def test_encode_all_zero():
    assert rle_encode(np.zeros((3, 3))).counts == (9,)


def test_encode_checkerboard():
    # [[1,0],[0,1]] visited column-major is 1,0,0,1
    board = np.array([[1, 0], [0, 1]], dtype=bool)
    m = rle_encode(board)
    assert m.counts == (0, 1, 2, 1)
    assert np.array_equal(rle_decode(m), board)
    assert rle_encode(~board).counts == (1, 2, 1)


def test_encode_rejects_empty_grid():
    with pytest.raises(GeometryError):
        rle_encode(np.zeros((0, 3)))
    with pytest.raises(GeometryError):
        rle_encode(np.zeros(5))


def test_sum_mismatch_names_total():
    with pytest.raises(RLECodecError, match="sum to 5"):
        FrameMask(2, 2, (1, 4))


def test_interior_zero_rejected_but_canonicalized_by_from_counts():
    with pytest.raises(RLECodecError):
        FrameMask(2, 2, (1, 0, 3))
    assert FrameMask.from_counts(2, 2, (1, 0, 3)).counts == (4,)
    assert FrameMask.from_counts(2, 2, (0, 1, 0, 2, 1)).counts == (0, 3, 1)
    assert FrameMask.from_counts(2, 2, (2, 2, 0)).counts == (2, 2)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=12))
def test_canonical_counts_preserves_pixels(raw):
    n = sum(raw)
    if n == 0:
        return
    canon = canonical_counts(raw)
    assert np.array_equal(dense_from_counts(1, n, raw), dense_from_counts(1, n, canon))
    assert all(c > 0 for c in canon[1:])


def test_random_roundtrip(rng):
    for _ in range(1000):
        h, w = rng.integers(1, 20, size=2)
        g = rng.random((h, w)) < rng.random()
        assert np.array_equal(rle_decode(rle_encode(g)), g)


@given(grids())
def test_roundtrip_property(g):
    m = rle_encode(g)
    assert np.array_equal(rle_decode(m), g)
    assert np.array_equal(dense_from_counts(*g.shape, m.counts), g)
    assert m.area == int(g.sum())
    assert rle_encode(rle_decode(m)) == m


def test_identical_masks():
    a = rle_encode(square(6, 6, 1, 1, 3))
    assert frame_intersection_area(a, a) == frame_union_area(a, a) == frame_area(a) == 9


def test_disjoint_masks():
    a = rle_encode(square(6, 6, 0, 0, 2))
    b = rle_encode(square(6, 6, 3, 3, 3))
    assert frame_intersection_area(a, b) == 0
    assert frame_union_area(a, b) == 4 + 9


def test_offset_squares_on_4x4():
    a_grid, b_grid = square(4, 4, 0, 0, 2), square(4, 4, 0, 1, 2)
    assert dense_overlap(a_grid, b_grid) == (2, 6)
    a, b = rle_encode(a_grid), rle_encode(b_grid)
    assert (frame_intersection_area(a, b), frame_union_area(a, b)) == (2, 6)


def test_shape_mismatch():
    with pytest.raises(GeometryError):
        frame_intersection_area(FrameMask.empty(2, 2), FrameMask.empty(2, 3))


@given(grids(max_side=10), st.data())
def test_run_list_set_ops_match_dense(g, data):
    bits = data.draw(st.lists(st.booleans(), min_size=g.size, max_size=g.size))
    h = np.array(bits, bool).reshape(g.shape)
    a, b = rle_encode(g), rle_encode(h)
    inter, union = dense_overlap(g, h)
    assert frame_intersection_area(a, b) == inter
    assert frame_union_area(a, b) == union
    assert inter + union == a.area + b.area
    assert np.array_equal(rle_decode(frame_union(a, b)), g | h)
    assert np.array_equal(rle_decode(frame_intersection(a, b)), g & h)


def test_track_canonicalizes_empty_frames():
    t = MaskTrack((FrameMask.empty(3, 3), None, rle_encode(square(3, 3, 0, 0, 1))))
    assert t.masks[0] is None
    assert t.support == (2,)
    assert t.sounding_interval == (2, 2)
    assert t.total_area == 1


def test_track_rejects_mixed_shapes():
    with pytest.raises(GeometryError):
        MaskTrack((FrameMask(2, 2, (0, 4)), FrameMask(3, 3, (0, 9))))


def test_from_frames_pads():
    t = MaskTrack.from_frames([rle_encode(square(4, 4, 0, 0, 2))], frame_count=3)
    assert t.frame_count == 3 and t.masks[1:] == (None, None)
    with pytest.raises(GeometryError):
        MaskTrack.from_frames([None] * 4, frame_count=3)


def test_iou_identical():
    t = track_of([square(8, 8, 1, 1, 3)] * 2, [0, 1], 4)
    assert spatiotemporal_iou(t, t) == 1.0


def test_iou_temporally_disjoint():
    g = square(8, 8, 1, 1, 3)
    assert spatiotemporal_iou(track_of([g], [0], 3), track_of([g], [2], 3)) == 0.0


def test_iou_temporal_shift_is_one_third():
    g = square(4, 4, 0, 0, 2)
    gt = track_of([g, g], [0, 1], 3)
    pred = track_of([g, g], [1, 2], 3)
    # dense oracle: frame sums of |a&b| and |a|b|
    inter, union = dense_overlap(dense_track(gt, (4, 4)), dense_track(pred, (4, 4)))
    assert (inter, union) == (4, 12)
    assert spatiotemporal_overlap(gt, pred) == (4, 12)
    assert spatiotemporal_iou(gt, pred) == 4 / 12


def test_iou_spatial_shift_is_one_third():
    a, b = square(4, 4, 0, 0, 2), square(4, 4, 0, 1, 2)
    gt = track_of([a, a], [0, 1], 2)
    pred = track_of([b, b], [0, 1], 2)
    assert spatiotemporal_overlap(gt, pred) == (4, 12)
    assert Fraction(*spatiotemporal_overlap(gt, pred)) == Fraction(1, 3)


def test_iou_both_empty_is_zero():
    t = MaskTrack((None, None))
    assert spatiotemporal_iou(t, t) == 0.0


def test_iou_length_mismatch():
    with pytest.raises(GeometryError):
        spatiotemporal_iou(MaskTrack((None,)), MaskTrack((None, None)))


@settings(max_examples=200)
@given(track_pairs())
def test_iou_matches_dense_and_is_symmetric(pair):
    a, b, shape = pair
    da, db = dense_track(a, shape), dense_track(b, shape)
    assert spatiotemporal_overlap(a, b) == dense_overlap(da, db)
    assert spatiotemporal_iou(a, b) == spatiotemporal_iou(b, a)
    assert 0.0 <= spatiotemporal_iou(a, b) <= 1.0
    if a.total_area:
        assert spatiotemporal_iou(a, a) == 1.0


@given(track_pairs(), st.integers(1, 20))
def test_padding_invariance(pair, k):
    a, b, _ = pair
    assert spatiotemporal_overlap(a.padded(k), b.padded(k)) == spatiotemporal_overlap(a, b)


@given(track_pairs())
def test_containment_ratio(pair):
    a, b, _ = pair
    # make a contained in b frame by frame
    frames = []
    for ma, mb in zip(a.masks, b.masks):
        if ma is None or mb is None:
            frames.append(None)
        else:
            frames.append(frame_intersection(ma, mb))
    inner = MaskTrack(tuple(frames))
    if b.total_area == 0:
        return
    assert Fraction(*spatiotemporal_overlap(inner, b)) == Fraction(inner.total_area, b.total_area)
