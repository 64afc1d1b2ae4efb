from __future__ import annotations

from typing import Sequence

import numpy as np
import pytest

from oudasim.stream_model import CropRecord, StreamHeader, SynthSpec, synth_stream


def make_record(
    frame: int = 0,
    cam: int = 0,
    bbox=(0.0, 0.0, 10.0, 20.0),
    conf: Sequence[float] | float = 1.0,
    feature: Sequence[float] = (1.0, 0.0),
    ts: int | None = None,
    gt: int | None = None,
    track: int | None = None,
) -> CropRecord:
    confs = [conf] * 17 if isinstance(conf, (int, float)) else list(conf)
    kps = tuple((float(i), float(i), float(c)) for i, c in enumerate(confs))
    return CropRecord(
        frame_index=frame,
        timestamp_ms=frame * 1000 if ts is None else ts,
        camera_id=cam,
        bbox=tuple(float(v) for v in bbox),
        keypoints=kps,
        feature=tuple(float(v) for v in feature),
        track_id=track,
        gt_identity=gt,
    )


@pytest.fixture
def rec():
    return make_record


@pytest.fixture(scope="session")
def desk_hour():
    """Synthetic hour: 10 identities over 8 cameras, 1 fps, well-separated clusters."""
    spec = SynthSpec(num_identities=10, crops_per_identity_rate=30.0,
                     camera_weights=(0.125,) * 8, rng_seed=7, fps=1.0)
    return synth_stream(spec)


def blobs(rng: np.random.Generator, centers: np.ndarray, per: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    pts = np.concatenate([c + rng.normal(0, sigma, (per, centers.shape[1])) for c in centers])
    labels = np.repeat(np.arange(len(centers)), per)
    return pts, labels


@pytest.fixture
def header2():
    return StreamHeader(num_cameras=2, feature_dim=2, fps=1.0, duration_ms=3_600_000)
