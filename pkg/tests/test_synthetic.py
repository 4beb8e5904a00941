import numpy as np
import pytest

from shotconv.synthetic import compose_sequence, procedural_clip
from shotconv.transitions import transition_labels


class TestProceduralClip:
    def test_deterministic(self):
        a = procedural_clip(3, 20)
        b = procedural_clip(3, 20)
        np.testing.assert_array_equal(a, b)

    def test_distinct_seeds_differ_clearly(self):
        # bound frozen from measurements on the synthesizer
        a = procedural_clip(1, 12)
        b = procedural_clip(2, 12)
        assert np.abs(a - b).mean() > 0.2

    def test_adjacent_frames_close(self):
        for seed in range(5):
            clip = procedural_clip(seed, 24)
            diffs = np.abs(np.diff(clip, axis=0)).mean(axis=(1, 2, 3))
            assert diffs.max() < 0.1

    def test_single_frame(self):
        clip = procedural_clip(0, 1)
        assert clip.shape == (1, 64, 64, 3)

    def test_range_and_dtype(self):
        clip = procedural_clip(9, 8)
        assert clip.dtype == np.float32
        assert clip.min() >= 0.0 and clip.max() <= 1.0

    def test_not_degenerate(self):
        clip = procedural_clip(4, 4)
        assert clip.std() > 0.05

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            procedural_clip(0, 0)


@pytest.fixture(scope="module")
def eval_clips():
    return [procedural_clip((100, i), 96) for i in range(4)]


class TestComposeSequence:
    def test_deterministic(self, eval_clips):
        a = compose_sequence(eval_clips, seed=5)
        b = compose_sequence(eval_clips, seed=5)
        np.testing.assert_array_equal(a.frames, b.frames)
        assert a.transitions == b.transitions

    def test_event_count(self, eval_clips):
        seq = compose_sequence(eval_clips, seed=1, n_transitions=5)
        assert len(seq.transitions) == 5
        assert len(seq.events) == 5

    def test_labels_are_exactly_the_zero_runs(self, eval_clips):
        seq = compose_sequence(eval_clips, seed=2, n_transitions=4)
        expected = np.ones(seq.total_frames, dtype=np.uint8)
        for start, end in seq.transitions:
            expected[start : end + 1] = 0
        np.testing.assert_array_equal(seq.labels, expected)

    def test_transitions_sorted_disjoint_with_margin(self, eval_clips):
        seq = compose_sequence(eval_clips, seed=3, n_transitions=6)
        prev_end = None
        for start, end in seq.transitions:
            assert 0 < start <= end < seq.total_frames - 5
            if prev_end is not None:
                assert start - prev_end >= 12  # at least one shot between events
            prev_end = end

    def test_frames_in_range(self, eval_clips):
        seq = compose_sequence(eval_clips, seed=4)
        assert seq.frames.dtype == np.float32
        assert seq.frames.min() >= 0.0 and seq.frames.max() <= 1.0

    def test_gradual_events_have_matching_run_lengths(self, eval_clips):
        seq = compose_sequence(eval_clips, seed=6, n_transitions=6)
        for event, (start, end) in zip(seq.events, seq.transitions):
            assert event["frames"] == (start, end)
            if event["kind"] in ("hard_cut", "crop_cut"):
                assert end == start
            else:
                assert end - start == event["duration"]

    def test_short_clips_rejected(self):
        with pytest.raises(ValueError, match="insufficient source frames"):
            compose_sequence([procedural_clip(0, 30)], seed=0)

    def test_window_labels_match_generator_rule(self, eval_clips):
        # a 10-frame window cut from the sequence obeys the same pairwise
        # label rule the snippet generators use
        seq = compose_sequence(eval_clips, seed=7, n_transitions=3)
        start, end = seq.transitions[0]
        lo = start - 3
        window_labels = seq.labels[lo : lo + 10]
        blended = end - start if end > start else 0
        expected = transition_labels(start - lo, blended)
        if blended == 0:
            expected = transition_labels(start - lo, 0)
        np.testing.assert_array_equal(window_labels, expected)
