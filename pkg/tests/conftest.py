import numpy as np
import pytest
from hypothesis import strategies as st

from aviseval.masks import FrameMask, MaskTrack, rle_encode


def dense_from_counts(h, w, counts):
    """Column-major run expansion written out by hand; the codec's test oracle."""
    flat = []
    value = 0
    for c in counts:
        flat.extend([value] * c)
        value = 1 - value
    grid = np.zeros((h, w), dtype=bool)
    for p, v in enumerate(flat):
        grid[p % h, p // h] = bool(v)
    return grid


def dense_track(track, shape):
    return np.stack([dense_from_counts(*shape, m.counts) if m is not None else np.zeros(shape, bool)
                     for m in track.masks])


def dense_overlap(a, b):
    return int((a & b).sum()), int((a | b).sum())


def square(h, w, top, left, size):
    g = np.zeros((h, w), dtype=bool)
    g[top:top + size, left:left + size] = True
    return g


def track_of(grids, present, frame_count):
    """Track with ``grids[i]`` at frame ``present[i]`` (0-based)."""
    frames = [None] * frame_count
    for g, t in zip(grids, present):
        frames[t] = rle_encode(g)
    return MaskTrack(tuple(frames))


@st.composite
def grids(draw, max_side=12):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    bits = draw(st.lists(st.booleans(), min_size=h * w, max_size=h * w))
    return np.array(bits, dtype=bool).reshape(h, w)


@st.composite
def track_pairs(draw, max_side=8, max_frames=5):
    h = draw(st.integers(1, max_side))
    w = draw(st.integers(1, max_side))
    T = draw(st.integers(1, max_frames))

    def one():
        frames = []
        for _ in range(T):
            if draw(st.booleans()):
                frames.append(None)
            else:
                bits = draw(st.lists(st.booleans(), min_size=h * w, max_size=h * w))
                frames.append(rle_encode(np.array(bits, bool).reshape(h, w)))
        return MaskTrack(tuple(frames))

    return one(), one(), (h, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# acceptance summary: one PASS/FAIL line per criterion ------------------------------

_criteria: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        prev = _criteria.get(name)
        if prev is None or status == "FAIL":
            _criteria[name] = status


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _criteria.items():
        terminalreporter.write_line(f"{status:4}  {name}")
