import pytest

from meshscore.alignment import evaluate_alignment
from meshscore.errors import TransportError
from meshscore.rasterizer import RenderConfig
from meshscore.scoring import MockBackend

from helpers import make_cube_mesh


@pytest.fixture(scope="module")
def mesh():
    return make_cube_mesh(side=0.5, textured=True)


@pytest.fixture(scope="module")
def config():
    return RenderConfig(resolution=64, focal_lengths=(4.0, 6.0))


def test_produces_twelve_captions(mesh, config):
    backend = MockBackend(judge_score=4)
    result = evaluate_alignment(mesh, "a checkered cube", backend, config)
    assert len(result.view_captions) == 12
    assert all(c for c in result.view_captions)


def test_judge_normalization(mesh, config):
    prompt = "a checkered cube"
    for judge, expected in ((1, 0.0), (3, 50.0), (4, 75.0), (5, 100.0)):
        result = evaluate_alignment(mesh, prompt, MockBackend(judge_score=judge), config)
        assert result.judge_score == judge
        assert result.normalized == expected


def test_merged_caption_and_rouge(mesh, config):
    backend = MockBackend(merged_caption="a checkered cube floating", judge_score=4)
    result = evaluate_alignment(mesh, "a checkered cube", backend, config)
    assert result.merged_caption == "a checkered cube floating"
    assert result.rouge_recall == pytest.approx(1.0)  # prompt fully recalled
    assert result.rouge.precision == pytest.approx(3 / 4)


def test_deterministic_with_mocks(mesh, config):
    backend = MockBackend(judge_score=4)
    a = evaluate_alignment(mesh, "a checkered cube", backend, config)
    b = evaluate_alignment(mesh, "a checkered cube", backend, config)
    assert a == b


def test_scorer_drives_focal_choice(mesh, config):
    # without a scorer the coverage heuristic picks the frame nearest 0.4
    backend = MockBackend(judge_score=3)
    no_scorer = evaluate_alignment(mesh, "a cube", backend, config)
    with_scorer = evaluate_alignment(mesh, "a cube", backend, config, scorer=backend)
    assert len(no_scorer.view_captions) == len(with_scorer.view_captions) == 12


def test_cached_frames_reused(mesh, config):
    backend = MockBackend(judge_score=3)
    baseline = evaluate_alignment(mesh, "a cube", backend, config)

    from meshscore.geometry import build_view_graph, capture_locations
    from meshscore.rasterizer import multi_focal_capture

    graph = build_view_graph(0)
    poses = capture_locations(graph, 2.2)
    target = 0.4
    cached = {}
    for i, pose in enumerate(poses):
        frames = multi_focal_capture(mesh, pose, config)
        cached[i] = min(frames, key=lambda f: abs(f.coverage - target))
    reused = evaluate_alignment(mesh, "a cube", backend, config, cached_frames=cached)
    assert reused == baseline


def test_concurrent_captioning_matches_sequential(mesh, config):
    backend = MockBackend(judge_score=3)
    seq = evaluate_alignment(mesh, "a cube", backend, config, caption_workers=1)
    par = evaluate_alignment(mesh, "a cube", backend, config, caption_workers=6)
    assert par == seq


def test_backend_failure_carries_partial_captions(mesh, config):
    class FlakyBackend(MockBackend):
        def __init__(self):
            super().__init__()
            self.calls = 0

        def caption_image(self, image):
            self.calls += 1
            if self.calls > 7:
                raise TransportError("backend went away", attempts=3)
            return super().caption_image(image)

    with pytest.raises(TransportError) as info:
        evaluate_alignment(mesh, "a cube", FlakyBackend(), config)
    partial = info.value.partial["view_captions"]
    assert sum(c is not None for c in partial) == 7
    assert len(partial) == 12
