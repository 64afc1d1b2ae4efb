"""Crop stream records, the line-delimited stream format, and a seeded generator.

Each line of a stream file is one JSON object. The first line is the header::

    {"num_cameras": 8, "feature_dim": 64, "fps": 1.0, "duration_ms": 3600000}

and every following line is one detected person crop::

    {"frame": 120, "ts_ms": 120000, "cam": 3, "track": 30007,
     "bbox": [x, y, w, h], "kp": [[x, y, c], ... 17 ...],
     "feat": [d0, ..., dD-1], "gt": 7}

``track`` may be null and ``gt`` may be omitted.
"""

from __future__ import annotations

import heapq
import io
import json
import math
import os
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence, Union

import numpy as np

NUM_KEYPOINTS = 17

BBox = tuple[float, float, float, float]
Keypoint = tuple[float, float, float]

ByteSource = Union[bytes, str, "os.PathLike[str]", IO[bytes], IO[str]]


class StreamFormatError(ValueError):
    """Raised for malformed stream input; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class StreamSchemaError(StreamFormatError):
    """Raised when a line parses but violates the record schema."""


@dataclass(frozen=True)
class CropRecord:
    frame_index: int
    timestamp_ms: int
    camera_id: int
    bbox: BBox
    keypoints: tuple[Keypoint, ...]
    feature: tuple[float, ...]
    track_id: int | None = None
    gt_identity: int | None = None

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise StreamSchemaError(f"frame_index must be >= 0, got {self.frame_index}")
        if self.timestamp_ms < 0:
            raise StreamSchemaError(f"timestamp_ms must be >= 0, got {self.timestamp_ms}")
        if self.camera_id < 0:
            raise StreamSchemaError(f"camera_id must be >= 0, got {self.camera_id}")
        if len(self.bbox) != 4:
            raise StreamSchemaError("bbox must have 4 components (x, y, w, h)")
        if not (self.bbox[2] > 0 and self.bbox[3] > 0):
            raise StreamSchemaError(f"bbox width and height must be positive, got {self.bbox}")
        if len(self.keypoints) != NUM_KEYPOINTS:
            raise StreamSchemaError(
                f"expected {NUM_KEYPOINTS} keypoints, got {len(self.keypoints)}"
            )
        for kp in self.keypoints:
            if len(kp) != 3:
                raise StreamSchemaError("each keypoint must be an (x, y, confidence) triple")
            if not 0.0 <= kp[2] <= 1.0:
                raise StreamSchemaError(f"keypoint confidence {kp[2]} outside [0, 1]")

    def feature_array(self) -> np.ndarray:
        return np.asarray(self.feature, dtype=np.float64)

    def to_json(self) -> dict:
        obj = {
            "frame": self.frame_index,
            "ts_ms": self.timestamp_ms,
            "cam": self.camera_id,
            "track": self.track_id,
            "bbox": list(self.bbox),
            "kp": [list(kp) for kp in self.keypoints],
            "feat": list(self.feature),
        }
        if self.gt_identity is not None:
            obj["gt"] = self.gt_identity
        return obj


@dataclass(frozen=True)
class StreamHeader:
    num_cameras: int
    feature_dim: int
    fps: float
    duration_ms: int

    def __post_init__(self) -> None:
        if self.num_cameras < 1:
            raise StreamSchemaError(f"num_cameras must be >= 1, got {self.num_cameras}")
        if self.feature_dim < 2:
            raise StreamSchemaError(f"feature_dim must be >= 2, got {self.feature_dim}")
        if not self.fps > 0:
            raise StreamSchemaError(f"fps must be positive, got {self.fps}")
        if self.duration_ms < 0:
            raise StreamSchemaError(f"duration_ms must be >= 0, got {self.duration_ms}")

    def to_json(self) -> dict:
        return {
            "num_cameras": self.num_cameras,
            "feature_dim": self.feature_dim,
            "fps": self.fps,
            "duration_ms": self.duration_ms,
        }


def normalize_feature(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale ``v`` to unit L2 norm."""
    arr = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return arr / norm


def feature_matrix(records: Sequence[CropRecord], normalize: bool = True) -> np.ndarray:
    """Stack record features into an (n, D) array, L2-normalizing rows by default."""
    if not records:
        return np.zeros((0, 0))
    mat = np.asarray([r.feature for r in records], dtype=np.float64)
    if normalize:
        norms = np.linalg.norm(mat, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("cannot normalize a zero feature vector")
        mat = mat / norms
    return mat


# ---------------------------------------------------------------------------
# Serialization


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def serialize_stream(header: StreamHeader, records: Iterable[CropRecord]) -> bytes:
    lines = [_dumps(header.to_json())]
    lines.extend(_dumps(r.to_json()) for r in records)
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_stream(path: str | os.PathLike[str], header: StreamHeader,
                 records: Iterable[CropRecord]) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_stream(header, records))


def _iter_lines(source: ByteSource) -> Iterator[str]:
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
    else:
        for line in source:
            yield line.decode("utf-8") if isinstance(line, bytes) else line


def _require(obj: dict, key: str, lineno: int):
    if key not in obj:
        raise StreamSchemaError(f"missing key {key!r}", lineno)
    return obj[key]


def _parse_header(obj: dict, lineno: int) -> StreamHeader:
    try:
        return StreamHeader(
            num_cameras=int(_require(obj, "num_cameras", lineno)),
            feature_dim=int(_require(obj, "feature_dim", lineno)),
            fps=float(_require(obj, "fps", lineno)),
            duration_ms=int(_require(obj, "duration_ms", lineno)),
        )
    except StreamSchemaError as exc:
        if exc.lineno is None:
            raise StreamSchemaError(str(exc), lineno) from None
        raise


def _parse_record(obj: dict, header: StreamHeader, lineno: int) -> CropRecord:
    kp = _require(obj, "kp", lineno)
    if not isinstance(kp, list) or len(kp) != NUM_KEYPOINTS:
        n = len(kp) if isinstance(kp, list) else "non-list"
        raise StreamSchemaError(f"expected {NUM_KEYPOINTS} keypoints, got {n}", lineno)
    feat = _require(obj, "feat", lineno)
    if not isinstance(feat, list) or len(feat) != header.feature_dim:
        n = len(feat) if isinstance(feat, list) else "non-list"
        raise StreamSchemaError(
            f"feature length {n} does not match feature_dim {header.feature_dim}", lineno
        )
    bbox = _require(obj, "bbox", lineno)
    track = obj.get("track")
    gt = obj.get("gt")
    try:
        rec = CropRecord(
            frame_index=int(_require(obj, "frame", lineno)),
            timestamp_ms=int(_require(obj, "ts_ms", lineno)),
            camera_id=int(_require(obj, "cam", lineno)),
            bbox=tuple(float(v) for v in bbox),
            keypoints=tuple(tuple(float(v) for v in p) for p in kp),
            feature=tuple(float(v) for v in feat),
            track_id=None if track is None else int(track),
            gt_identity=None if gt is None else int(gt),
        )
    except StreamSchemaError as exc:
        raise StreamSchemaError(str(exc), lineno) from None
    except (TypeError, ValueError) as exc:
        raise StreamFormatError(f"bad field value: {exc}", lineno) from None
    if rec.camera_id >= header.num_cameras:
        raise StreamSchemaError(
            f"camera_id {rec.camera_id} >= num_cameras {header.num_cameras}", lineno
        )
    return rec


def parse_stream(source: ByteSource) -> tuple[StreamHeader, list[CropRecord]]:
    """Parse a line-delimited stream into its header and records, in file order."""
    header: StreamHeader | None = None
    records: list[CropRecord] = []
    last_ts: dict[int, int] = {}
    for lineno, line in enumerate(_iter_lines(source), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"malformed JSON: {exc.msg}", lineno) from None
        if not isinstance(obj, dict):
            raise StreamFormatError("expected a JSON object", lineno)
        if header is None:
            header = _parse_header(obj, lineno)
            continue
        rec = _parse_record(obj, header, lineno)
        prev = last_ts.get(rec.camera_id)
        if prev is not None and rec.timestamp_ms < prev:
            raise StreamSchemaError(
                f"timestamp {rec.timestamp_ms} decreases within camera {rec.camera_id}", lineno
            )
        last_ts[rec.camera_id] = rec.timestamp_ms
        records.append(rec)
    if header is None:
        raise StreamFormatError("missing header line", 1)
    return header, records


def merge_streams(
    streams: Sequence[tuple[StreamHeader, Sequence[CropRecord]]],
) -> tuple[StreamHeader, list[CropRecord]]:
    """Merge several (e.g. per-camera) streams into one, sorted globally by timestamp.

    Ties keep the order of ``streams``, so the merge is deterministic.
    """
    if not streams:
        raise ValueError("no streams to merge")
    dims = {h.feature_dim for h, _ in streams}
    if len(dims) != 1:
        raise StreamSchemaError(f"feature_dim differs between streams: {sorted(dims)}")
    fps = {h.fps for h, _ in streams}
    if len(fps) != 1:
        raise StreamSchemaError(f"fps differs between streams: {sorted(fps)}")
    header = StreamHeader(
        num_cameras=max(h.num_cameras for h, _ in streams),
        feature_dim=dims.pop(),
        fps=fps.pop(),
        duration_ms=max(h.duration_ms for h, _ in streams),
    )
    merged = list(heapq.merge(*(recs for _, recs in streams), key=lambda r: r.timestamp_ms))
    return header, merged


def load_streams(paths: Sequence[str | os.PathLike[str]]) -> tuple[StreamHeader, list[CropRecord]]:
    parsed = [parse_stream(p) for p in paths]
    if len(parsed) == 1:
        return parsed[0]
    return merge_streams(parsed)


# ---------------------------------------------------------------------------
# Synthetic streams

FRAME_WIDTH = 1920
FRAME_HEIGHT = 1080


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic crop stream.

    ``crops_per_identity_rate`` is the expected number of crops per identity per
    minute, summed over cameras, before any filtering. With ``arrival="regular"``
    every camera instead emits exactly one crop per frame and the rate is unused.
    Features are drawn around one unit-norm centroid per identity: the raw vector
    is ``separation * centroid + cluster_spread * z / sqrt(D)`` with ``z`` standard
    normal, then L2-normalized, so ``cluster_spread`` is the expected raw noise norm.
    """

    num_identities: int = 10
    crops_per_identity_rate: float = 30.0
    cluster_spread: float = 0.05
    separation: float = 1.0
    camera_weights: tuple[float, ...] = (1.0,)
    noise_fraction: float = 0.0
    rng_seed: int = 0
    feature_dim: int = 64
    duration_ms: int = 3_600_000
    fps: float = 1.0
    arrival: str = "poisson"

    def __post_init__(self) -> None:
        object.__setattr__(self, "camera_weights", tuple(float(w) for w in self.camera_weights))
        if self.num_identities < 1:
            raise ValueError("num_identities must be >= 1")
        if self.crops_per_identity_rate < 0:
            raise ValueError("crops_per_identity_rate must be >= 0")
        if not self.cluster_spread > 0:
            raise ValueError("cluster_spread must be > 0")
        if self.separation < 0:
            raise ValueError("separation must be >= 0")
        if not self.camera_weights or any(w < 0 for w in self.camera_weights):
            raise ValueError("camera_weights must be non-empty and non-negative")
        if abs(sum(self.camera_weights) - 1.0) > 1e-9:
            raise ValueError(f"camera_weights must sum to 1, got {sum(self.camera_weights)}")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError("noise_fraction must be in [0, 1]")
        if self.feature_dim < 2:
            raise ValueError("feature_dim must be >= 2")
        if not self.fps > 0 or self.duration_ms < 0:
            raise ValueError("fps must be positive and duration_ms non-negative")
        if self.arrival not in ("poisson", "regular"):
            raise ValueError(f"arrival must be 'poisson' or 'regular', got {self.arrival!r}")

    @property
    def num_cameras(self) -> int:
        return len(self.camera_weights)

    @property
    def num_frames(self) -> int:
        return int(math.ceil(self.duration_ms * self.fps / 1000.0))


def identity_centroids(num_identities: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-norm centroids; mutually orthogonal whenever ``num_identities <= dim``."""
    gauss = rng.standard_normal((dim, num_identities))
    if num_identities <= dim:
        q, _ = np.linalg.qr(gauss)
        return q.T.copy()
    cents = gauss.T
    return cents / np.linalg.norm(cents, axis=1, keepdims=True)


def synth_stream(spec: SynthSpec) -> tuple[StreamHeader, list[CropRecord]]:
    rng = np.random.default_rng(spec.rng_seed)
    dim = spec.feature_dim
    centroids = identity_centroids(spec.num_identities, dim, rng)
    n_frames = spec.num_frames
    n_cams = spec.num_cameras

    if spec.arrival == "regular":
        frames = np.repeat(np.arange(n_frames), n_cams)
        cams = np.tile(np.arange(n_cams), n_frames)
    else:
        lam = spec.num_identities * spec.crops_per_identity_rate / (60.0 * spec.fps)
        per_frame = rng.poisson(lam, size=n_frames)
        frames = np.repeat(np.arange(n_frames), per_frame)
        cams = rng.choice(n_cams, size=frames.size, p=np.asarray(spec.camera_weights))
        order = np.lexsort((cams, frames))
        frames, cams = frames[order], cams[order]

    n = frames.size
    ids = rng.integers(0, spec.num_identities, size=n)
    is_noise = rng.random(n) < spec.noise_fraction

    z = rng.standard_normal((n, dim))
    raw = spec.separation * centroids[ids] + spec.cluster_spread * z / math.sqrt(dim)
    junk = rng.standard_normal((n, dim))
    raw[is_noise] = junk[is_noise]
    feats = raw / np.linalg.norm(raw, axis=1, keepdims=True)

    w = rng.uniform(60.0, 140.0, size=n)
    h = w * rng.uniform(2.0, 3.0, size=n)
    x = rng.uniform(0.0, FRAME_WIDTH - w)
    y = rng.uniform(0.0, np.maximum(FRAME_HEIGHT - h, 0.0))
    kp_u = rng.random((n, NUM_KEYPOINTS, 2))
    kp_x = x[:, None] + kp_u[..., 0] * w[:, None]
    kp_y = y[:, None] + kp_u[..., 1] * h[:, None]
    conf = np.where(
        is_noise[:, None],
        rng.uniform(0.0, 0.45, size=(n, NUM_KEYPOINTS)),
        rng.uniform(0.6, 1.0, size=(n, NUM_KEYPOINTS)),
    )
    ts = np.floor(frames * 1000.0 / spec.fps).astype(np.int64)

    feats_l = feats.tolist()
    kps = np.stack([kp_x, kp_y, conf], axis=-1).tolist()
    records = []
    for j in range(n):
        ident = int(ids[j])
        records.append(CropRecord(
            frame_index=int(frames[j]),
            timestamp_ms=int(ts[j]),
            camera_id=int(cams[j]),
            bbox=(float(x[j]), float(y[j]), float(w[j]), float(h[j])),
            keypoints=tuple(tuple(p) for p in kps[j]),
            feature=tuple(feats_l[j]),
            track_id=None if is_noise[j] else int(cams[j]) * 100_000 + ident,
            gt_identity=ident,
        ))
    header = StreamHeader(
        num_cameras=n_cams,
        feature_dim=dim,
        fps=spec.fps,
        duration_ms=spec.duration_ms,
    )
    return header, records


def parse_synth_spec(text: str) -> SynthSpec:
    """Build a SynthSpec from ``key=value`` pairs separated by commas or newlines.

    ``camera_weights`` takes a ``/``- or space-separated list, or ``uniform:N``.
    """
    kwargs: dict = {}
    types = {f.name: f.type for f in SynthSpec.__dataclass_fields__.values()}
    for raw in text.replace("\n", ",").split(","):
        item = raw.split("#", 1)[0].strip()
        if not item:
            continue
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        if key not in types:
            raise ValueError(f"unknown synth key {key!r}")
        if key == "camera_weights":
            if val.startswith("uniform:"):
                m = int(val.split(":", 1)[1])
                kwargs[key] = tuple([1.0 / m] * m)
            else:
                kwargs[key] = tuple(float(v) for v in val.replace("/", " ").split())
        elif key == "arrival":
            kwargs[key] = val
        elif types[key] in ("int", int):
            kwargs[key] = int(val)
        else:
            kwargs[key] = float(val)
    return SynthSpec(**kwargs)
