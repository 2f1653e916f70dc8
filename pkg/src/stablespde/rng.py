"""Reproducible random number streams.

Every stochastic routine in this package takes an :class:`RngStream` value
rather than a live generator, so that a simulation is a pure function of
(parameters, stream).  Streams are counter-based (Philox) and keyed by
``(seed, stream_id, lineage)``; identical keys reproduce identical variate
sequences, and distinct keys give statistically independent streams that can
be consumed from concurrent workers without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Immutable handle for a reproducible substream.

    ``stream_id`` conventionally indexes the trajectory; ``lineage`` holds
    further derivation tags (e.g. one tag per noise source inside a solver).
    """

    seed: int
    stream_id: int = 0
    lineage: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.lineage))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, tag: int) -> "RngStream":
        """Derive an independent child stream identified by ``tag``."""
        return RngStream(self.seed, self.stream_id, self.lineage + (tag,))
