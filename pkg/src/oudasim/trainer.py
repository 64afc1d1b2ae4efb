"""Training stage stand-ins.

A trainer receives the selected subset with its pseudo-labels and returns how
long training took plus an opaque token naming the resulting model.
"""

from __future__ import annotations

import hashlib
import json
import subprocess
from dataclasses import dataclass
from typing import Protocol, Sequence

from .config import CostModel


@dataclass(frozen=True)
class TrainResult:
    duration_s: float
    model_token: str


@dataclass(frozen=True)
class TrainJob:
    segment: int
    record_keys: tuple[tuple[int, int, int], ...]  # (camera, frame, position in stream)
    pseudo_labels: tuple[int, ...]
    epochs: int
    iterations: int

    @property
    def size(self) -> int:
        return len(self.record_keys)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps([self.segment, self.record_keys, self.pseudo_labels,
                             self.epochs, self.iterations]).encode())
        return h.hexdigest()[:16]


class Trainer(Protocol):
    def train(self, job: TrainJob) -> TrainResult: ...


class CostModelTrainer:
    """Deterministic trainer whose duration comes from the cost model."""

    def __init__(self, cost_model: CostModel):
        self.cost_model = cost_model

    def train(self, job: TrainJob) -> TrainResult:
        duration = self.cost_model.train_duration(job.epochs, job.iterations, job.size)
        return TrainResult(duration, f"model-t{job.segment}-{job.fingerprint()}")


class SubprocessTrainer:
    """Delegates training to an external command speaking JSON over stdin/stdout.

    The command receives ``{"segment", "records", "pseudo_labels", "epochs",
    "iterations"}`` and must print ``{"duration_s": float, "model_token": str}``.
    """

    def __init__(self, command: Sequence[str], timeout_s: float | None = None):
        self.command = list(command)
        self.timeout_s = timeout_s

    def train(self, job: TrainJob) -> TrainResult:
        payload = json.dumps({
            "segment": job.segment,
            "records": [list(k) for k in job.record_keys],
            "pseudo_labels": list(job.pseudo_labels),
            "epochs": job.epochs,
            "iterations": job.iterations,
        })
        proc = subprocess.run(self.command, input=payload, capture_output=True, text=True,
                              timeout=self.timeout_s, check=True)
        reply = json.loads(proc.stdout)
        return TrainResult(float(reply["duration_s"]), str(reply["model_token"]))
