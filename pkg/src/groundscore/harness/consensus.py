"""Difficulty filtering: drop questions every reference model already gets right."""

from __future__ import annotations

from typing import Mapping, Sequence

from .dataset import BenchmarkSample

__all__ = ["ConsensusError", "consensus_filter", "REQUIRED_VERDICTS"]

REQUIRED_VERDICTS = 4


class ConsensusError(ValueError):
    """Raised when some samples lack the full set of model verdicts."""

    def __init__(self, sample_ids: Sequence[str]):
        self.sample_ids = list(sample_ids)
        super().__init__(
            f"missing or incomplete verdicts for {len(self.sample_ids)} sample(s): "
            + ", ".join(self.sample_ids)
        )


def consensus_filter(
    samples: Sequence[BenchmarkSample],
    verdicts: Mapping[str, Sequence[bool]],
) -> list[BenchmarkSample]:
    """Keep a sample unless all reference models answered it correctly.

    `verdicts` maps sample id to exactly REQUIRED_VERDICTS booleans; any
    sample with missing or short verdicts aborts the whole filter.
    """
    incomplete = [
        sample.id
        for sample in samples
        if len(verdicts.get(sample.id, ())) != REQUIRED_VERDICTS
    ]
    if incomplete:
        raise ConsensusError(incomplete)
    return [sample for sample in samples if not all(verdicts[sample.id])]
