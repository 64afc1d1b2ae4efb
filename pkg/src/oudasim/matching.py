"""Minimal multi-camera identity matcher: greedy nearest neighbour against a gallery."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .sds import EUCLIDEAN, distances_to


class Gallery:
    """Global identities with one running (EMA) unit-norm feature each."""

    def __init__(self, dim: int | None = None):
        self.ids: list[int] = []
        self._feats: list[np.ndarray] = []
        self.dim = dim

    def __len__(self) -> int:
        return len(self.ids)

    def features(self) -> np.ndarray:
        if not self._feats:
            return np.zeros((0, self.dim or 0))
        return np.vstack(self._feats)

    def add(self, feature: np.ndarray) -> int:
        gid = len(self.ids)
        self.ids.append(gid)
        self._feats.append(np.asarray(feature, dtype=np.float64).copy())
        return gid

    def update(self, gid: int, feature: np.ndarray, momentum: float) -> None:
        pos = self.ids.index(gid)
        blended = momentum * self._feats[pos] + (1.0 - momentum) * feature
        norm = np.linalg.norm(blended)
        self._feats[pos] = blended / norm if norm > 0 else blended


def global_match(
    queries: np.ndarray | Sequence[Sequence[float]],
    gallery: Gallery | None = None,
    threshold: float = 0.5,
    momentum: float = 0.9,
    metric: str = EUCLIDEAN,
) -> list[int]:
    """Assign each query, in order, to its nearest gallery identity or a new one.

    A query joins the nearest identity when the distance is at most ``threshold``
    and that identity's feature moves toward the query by ``1 - momentum``.
    Otherwise a new identity is minted. ``gallery`` is updated in place.
    """
    gallery = gallery if gallery is not None else Gallery()
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim == 1:
        q = q[None, :]
    out: list[int] = []
    for feat in q:
        if len(gallery):
            d = distances_to(gallery.features(), feat, metric)
            best = int(np.argmin(d))
            if d[best] <= threshold:
                gid = gallery.ids[best]
                gallery.update(gid, feat, momentum)
                out.append(gid)
                continue
        out.append(gallery.add(feat))
    return out
