"""Compression-based stand-in for algorithmic (Kolmogorov) mutual information.

``K(S)`` for a set of strings is estimated by the compressed length, in
bits, of a self-delimiting concatenation of its members in label order.
Each member is framed by its byte length as an 8-byte little-endian integer,
so no two corpora share an encoding. Because a compressor only approximates
``K`` up to machine-dependent constants, conclusions are drawn against an
explicit slack budget.
"""

from __future__ import annotations

import lzma
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from cainfer.errors import EmptySetError, OverlapError
from cainfer.inference import CResult, InferenceReport
from cainfer.measure import EntropicMeasure, GroundSet

BASE_SLACK_BITS = 4096.0
SLACK_BITS_PER_STRING = 128.0


@dataclass(frozen=True)
class CompressorHandle:
    """Named, deterministic ``bytes -> compressed byte length`` oracle."""

    name: str
    compressed_length: Callable[[bytes], int]

    def bits(self, data: bytes) -> float:
        return 8.0 * self.compressed_length(data)

    @property
    def empty_bits(self) -> float:
        return self.bits(b"")


def _lzma2_raw(data: bytes) -> int:
    # raw LZMA2: no container header, dictionary large enough for MiB-scale repeats
    return len(lzma.compress(data, format=lzma.FORMAT_RAW, filters=[{"id": lzma.FILTER_LZMA2, "preset": 6}]))


def _zlib9(data: bytes) -> int:
    import zlib

    return len(zlib.compress(data, 9))


def _bz2_9(data: bytes) -> int:
    import bz2

    return len(bz2.compress(data, 9))


COMPRESSORS: dict[str, CompressorHandle] = {
    "lzma": CompressorHandle("lzma", _lzma2_raw),
    "zlib": CompressorHandle("zlib", _zlib9),
    "bz2": CompressorHandle("bz2", _bz2_9),
}


def default_compressor() -> CompressorHandle:
    return COMPRESSORS["lzma"]


@dataclass(frozen=True)
class StringCorpus:
    strings: tuple[tuple[str, bytes], ...]

    def __init__(self, strings: Iterable[tuple[str, bytes]]):
        strings = tuple((str(label), bytes(data)) for label, data in strings)
        labels = [label for label, _ in strings]
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be unique: {labels}")
        object.__setattr__(self, "strings", strings)

    @classmethod
    def from_files(cls, paths: Sequence[str | Path]) -> "StringCorpus":
        return cls((str(p), Path(p).read_bytes()) for p in paths)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.strings)

    def __len__(self) -> int:
        return len(self.strings)

    def get(self, label: str) -> bytes:
        for lab, data in self.strings:
            if lab == label:
                return data
        raise KeyError(f"unknown label {label!r}")


@dataclass(frozen=True)
class SlackBudget:
    slack_bits: float

    def __post_init__(self):
        if not self.slack_bits >= 0:
            raise ValueError("slack_bits must be non-negative")

    @classmethod
    def default(cls, n_strings: int) -> "SlackBudget":
        return cls(BASE_SLACK_BITS + SLACK_BITS_PER_STRING * n_strings)


def frame(parts: Iterable[bytes]) -> bytes:
    return b"".join(struct.pack("<Q", len(p)) + p for p in parts)


def k_estimate(comp: CompressorHandle, corpus: StringCorpus, labels: Iterable[str]) -> float:
    """Compressed length in bits of the framed concatenation of ``labels``."""
    labels = sorted(set(labels))
    if not labels:
        raise EmptySetError("k_estimate needs at least one string")
    return comp.bits(frame(corpus.get(lab) for lab in labels))


def compressor_floor(comp: CompressorHandle) -> float:
    """Estimate for a single empty string: the smallest value ``k_estimate`` returns."""
    return comp.bits(frame([b""]))


class CompressionMeasure(EntropicMeasure):
    """Conditional algorithmic mutual information estimated by a compressor.

    ``I(A:B|C) = K(A∪C) + K(B∪C) - K(A∪B∪C) - K(C)`` with ``K(∅) = 0``.
    """

    def __init__(self, comp: CompressorHandle, corpus: StringCorpus):
        super().__init__(GroundSet(corpus.labels))
        self.comp = comp
        self.corpus = corpus

    def _h(self, mask: int) -> float:
        return k_estimate(self.comp, self.corpus, self.ground.names(mask))


def algo_cmi(
    comp: CompressorHandle,
    corpus: StringCorpus,
    a: Iterable[str],
    b: Iterable[str],
    c: Iterable[str] = (),
) -> float:
    a, b, c = set(a), set(b), set(c)
    if a & b or a & c or b & c:
        raise OverlapError(f"label sets overlap: {sorted(a)}, {sorted(b)}, {sorted(c)}")
    if not a or not b:
        return 0.0
    k = lambda s: k_estimate(comp, corpus, s) if s else 0.0  # noqa: E731
    return (k(a | c) + k(b | c)) - k(a | b | c) - k(c)


def infer_string_ancestors(
    comp: CompressorHandle,
    corpus: StringCorpus,
    c: int,
    slack: SlackBudget | None = None,
) -> InferenceReport:
    """Redundancy criterion ``(1/c) Σ K(s_i) - K(s_1..s_n)`` against a slack budget.

    A criterion above ``slack.slack_bits`` means every DAG-model of the
    strings contains a common ancestor of at least ``c + 1`` of them.
    """
    n = len(corpus)
    if n < 2:
        raise ValueError("need at least two strings")
    if not 1 <= c <= n - 1:
        raise ValueError(f"c must lie in [1, {n - 1}], got {c}")
    slack = slack or SlackBudget.default(n)
    singles = [k_estimate(comp, corpus, [lab]) for lab in sorted(corpus.labels)]
    joint = k_estimate(comp, corpus, corpus.labels)
    criterion = math.fsum(singles) / c - joint
    report = InferenceReport("strings", n, decision_tol=slack.slack_bits)
    report.per_c.append(CResult(c, criterion, criterion > slack.slack_bits))
    report.quantities.update(
        {
            "compressor": comp.name,
            "labels": sorted(corpus.labels),
            "k_singles_bits": singles,
            "k_joint_bits": joint,
            "compressor_floor_bits": compressor_floor(comp),
            "slack_bits": slack.slack_bits,
        }
    )
    report.assumptions.append(f"K approximated by {comp.name} compressed length; slack {slack.slack_bits} bits")
    report.assumptions.append("inferred ancestors may be observed strings themselves")
    return report
