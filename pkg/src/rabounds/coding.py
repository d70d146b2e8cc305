"""Concrete coding schemes whose operating points approach the bounds.

A classifier followed by a lossless code for its decisions gives an
achievable (rate, accuracy) point: fixed-length coding, optimal prefix
(Huffman) coding, and fixed-length coding of decision blocks.  All ceil(log2)
computations use exact integer bit lengths, never floating logs, to avoid
off-by-one at powers of two.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dms import Pmf

__all__ = [
    "Codebook",
    "AchievablePoint",
    "METHOD_TAGS",
    "fixed_length_rate",
    "huffman_code",
    "shortened_fixed_code",
    "block_fixed_rate",
    "block_huffman_rate",
    "classify_then_code_point",
]

METHOD_TAGS = ("fixed", "huffman", "block-fixed")

#: Refuse block product alphabets larger than this.
BLOCK_ALPHABET_LIMIT = 2**20


@dataclass(frozen=True, eq=False)
class Codebook:
    """A prefix-free binary code over labels.

    Attributes:
        entries: (label, codeword) pairs in original label order; a
            single-label code uses the empty codeword.
        avg_length: expected codeword length in bits under the distribution
            the code was built for.
    """

    entries: tuple[tuple[str, str], ...]
    avg_length: float

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("a codebook needs at least one entry")
        words = [w for _, w in self.entries]
        if any(set(w) - {"0", "1"} for w in words):
            raise ValueError("codewords must be binary strings")
        if len(words) > 1:
            if any(w == "" for w in words):
                raise ValueError("empty codeword only allowed for a single label")
            for i, a in enumerate(words):
                for b in words[i + 1 :]:
                    if a.startswith(b) or b.startswith(a):
                        raise ValueError(f"codewords {a!r} and {b!r} violate the prefix condition")
        if self.kraft_sum() > 1.0 + 1e-12:
            raise ValueError("codeword lengths violate the Kraft inequality")
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "avg_length", float(self.avg_length))

    def lengths(self) -> tuple[int, ...]:
        return tuple(len(w) for _, w in self.entries)

    def kraft_sum(self) -> float:
        return float(sum(Fraction(1, 2 ** len(w)) for _, w in self.entries))

    def to_text(self) -> str:
        """One ``label<TAB>bits`` line per entry, sorted by label."""
        lines = [f"{label}\t{bits}" for label, bits in sorted(self.entries)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class AchievablePoint:
    """An operating point realized by a classifier plus a decision code."""

    rate: float
    accuracy: float
    method_tag: str
    block_size: int = 1

    def __post_init__(self) -> None:
        if self.method_tag not in METHOD_TAGS:
            raise ValueError(f"method_tag must be one of {METHOD_TAGS}")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must lie in [0, 1], got {self.accuracy}")
        if self.rate < 0.0:
            raise ValueError(f"rate must be non-negative, got {self.rate}")
        if self.block_size < 1:
            raise ValueError("block_size must be at least 1")
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "accuracy", float(self.accuracy))


def _labels_of(source: Pmf) -> list[str]:
    if source.labels is not None:
        return list(source.labels)
    return [str(i) for i in range(len(source))]


def fixed_length_rate(num_classes: int) -> int:
    """Bits per symbol of the plain fixed-length code: ceil(log2 K).

    Computed via the exact integer bit length; a single class needs no bits.
    """
    k = int(num_classes)
    if k < 1:
        raise ValueError("need at least one class")
    return (k - 1).bit_length()


def _canonical_assignment(lengths_by_index: list[int]) -> list[str]:
    """Assign canonical codewords: sort by (length, label index), then count
    upward in binary, left-shifting when the length grows."""
    order = sorted(range(len(lengths_by_index)), key=lambda i: (lengths_by_index[i], i))
    words = [""] * len(lengths_by_index)
    code = 0
    prev_len = lengths_by_index[order[0]]
    for rank, idx in enumerate(order):
        length = lengths_by_index[idx]
        if rank:
            code = (code + 1) << (length - prev_len)
        words[idx] = format(code, f"0{length}b") if length else ""
        prev_len = length
    return words


def huffman_code(source: Pmf) -> Codebook:
    """Optimal prefix code built by merging the two least-probable nodes.

    Ties are broken in favour of the node containing the smallest original
    label index, and the resulting lengths are mapped to canonical codewords
    (sorted by (length, label), lexicographically increasing), so codebooks
    are byte-reproducible across runs and platforms.  A single-label source
    gets the empty codeword.
    """
    probs = source.probs
    if np.any(probs == 0.0):
        raise ValueError(
            "zero-probability labels must be excluded first; see Pmf.without_zeros()"
        )
    labels = _labels_of(source)
    n = len(probs)
    if n == 1:
        return Codebook(((labels[0], ""),), 0.0)

    # heap keys: (probability, smallest contained label index)
    heap: list[tuple[float, int, tuple[int, ...]]] = [
        (float(p), i, (i,)) for i, p in enumerate(probs)
    ]
    heapq.heapify(heap)
    depth = [0] * n
    while len(heap) > 1:
        p1, m1, members1 = heapq.heappop(heap)
        p2, m2, members2 = heapq.heappop(heap)
        for i in members1 + members2:
            depth[i] += 1
        heapq.heappush(heap, (p1 + p2, min(m1, m2), members1 + members2))

    words = _canonical_assignment(depth)
    avg = float(np.dot(probs, depth))
    return Codebook(tuple(zip(labels, words)), avg)


def shortened_fixed_code(num_classes: int) -> Codebook:
    """Fixed-length code with the spare codewords folded into shorter ones.

    Starts from the width-ceil(log2 K) fixed-length code, whose 2^ceil - K
    unused codewords leave Kraft slack, and greedily shortens the earliest
    labels while the slack allows.  For 10 labels this yields codewords
    00, 01, 1000..1111 averaging 3.6 bits.  The result is a complete
    (Kraft-equality) prefix code but generally not an optimal one; see
    :func:`huffman_code` for the optimum.  Average length is reported for
    equiprobable labels.
    """
    k = int(num_classes)
    if k < 1:
        raise ValueError("need at least one class")
    if k == 1:
        return Codebook((("0", ""),), 0.0)
    width = fixed_length_rate(k)
    lengths = [width] * k
    slack = 2**width - k  # spare leaves at the full width
    for i in range(k):
        cost = 2 ** (width - lengths[i])  # leaves consumed by label i
        while lengths[i] > 1 and slack >= cost:
            slack -= cost
            cost *= 2
            lengths[i] -= 1
    words = _canonical_assignment(lengths)
    labels = [str(i) for i in range(k)]
    return Codebook(tuple(zip(labels, words)), sum(lengths) / k)


def block_fixed_rate(num_classes: int, block_size: int) -> Fraction:
    """Bits per symbol of the fixed-length code over length-n blocks.

    Returns ceil(log2(K^n)) / n as an exact rational; K^n and its bit length
    are computed in arbitrary-precision integers, so there is no overflow
    and no floating rounding for any block size.
    """
    k = int(num_classes)
    n = int(block_size)
    if k < 1:
        raise ValueError("need at least one class")
    if n < 1:
        raise ValueError("block_size must be at least 1")
    return Fraction((k**n - 1).bit_length(), n)


def block_huffman_rate(source: Pmf, block_size: int) -> float:
    """Bits per symbol of the optimal prefix code over length-n blocks.

    Builds the product distribution over n-tuples and Huffman-codes it.
    Refused when the tuple alphabet would exceed 2**20 entries, which keeps
    runtime at desk scale.
    """
    n = int(block_size)
    if n < 1:
        raise ValueError("block_size must be at least 1")
    pruned = source.without_zeros()
    k = len(pruned)
    if k**n > BLOCK_ALPHABET_LIMIT:
        raise ValueError(
            f"product alphabet {k}^{n} exceeds the {BLOCK_ALPHABET_LIMIT} "
            "entry guard; use a smaller block"
        )
    tuple_probs = pruned.probs
    for _ in range(n - 1):
        tuple_probs = np.kron(tuple_probs, pruned.probs)
    book = huffman_code(Pmf.from_weights(tuple_probs))
    return book.avg_length / n


def classify_then_code_point(
    classifier_accuracy: float,
    coding_rate,
    *,
    method_tag: str = "fixed",
    block_size: int = 1,
) -> AchievablePoint:
    """Package a classifier accuracy with a decision-coding rate.

    A lossless decoder of the code reproduces the classifier's decision
    exactly, so the point's accuracy is the classifier's accuracy and its
    rate is the code's rate.  The accuracy is supplied data, never computed
    here.
    """
    return AchievablePoint(
        rate=float(coding_rate),
        accuracy=float(classifier_accuracy),
        method_tag=method_tag,
        block_size=block_size,
    )
