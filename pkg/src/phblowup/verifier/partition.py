"""Splitting an induced-map orbit by its distance to the exceptional set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blowup_geom import PolarPoint
from ..errors import PartitionError

FLAT_IN, TRANS_IN, CORE, TRANS_OUT, FLAT_OUT = 1, 2, 3, 4, 5


@dataclass(frozen=True)
class SegmentPartition:
    labels: np.ndarray
    eps: float

    def segment(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def length(self, label: int) -> int:
        return int(np.sum(self.labels == label))

    @property
    def transition_lengths(self) -> tuple[int, int]:
        return self.length(TRANS_IN), self.length(TRANS_OUT)


def _contiguous(idx: np.ndarray) -> bool:
    return idx.size == 0 or idx[-1] - idx[0] + 1 == idx.size


def partition_orbit(orbit, eps: float) -> SegmentPartition:
    """Label each orbit point O1..O5.

    ``orbit`` is a sequence of PolarPoint or an array of radii t. The region
    {t <= eps} and the core {t < eps/2} must each be visited in one
    contiguous block; transition points before the core are O2, after it O4.
    Without core points the transition block is split at the closest approach.
    """
    if len(orbit) and isinstance(orbit[0], PolarPoint):
        t = np.array([p.t for p in orbit])
    else:
        t = np.asarray(orbit, dtype=float)
    labels = np.full(t.shape, FLAT_IN)
    inner = np.flatnonzero(t <= eps)
    if inner.size == 0:
        return SegmentPartition(labels, eps)
    if not _contiguous(inner):
        raise PartitionError("orbit re-enters {t <= eps} after leaving it")
    core = np.flatnonzero(t < eps / 2)
    if not _contiguous(core):
        raise PartitionError("orbit re-enters the core {t < eps/2} after leaving it")
    labels[inner[-1] + 1 :] = FLAT_OUT
    if core.size:
        labels[inner[0] : core[0]] = TRANS_IN
        labels[core] = CORE
        labels[core[-1] + 1 : inner[-1] + 1] = TRANS_OUT
    else:
        j = inner[0] + int(np.argmin(t[inner]))
        labels[inner[0] : j + 1] = TRANS_IN
        labels[j + 1 : inner[-1] + 1] = TRANS_OUT
    return SegmentPartition(labels, eps)


def mirror_labels(labels: np.ndarray) -> np.ndarray:
    """Labels of the reversed orbit under the inverse map."""
    return (6 - np.asarray(labels))[::-1]
