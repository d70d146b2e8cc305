"""Tests for the coding constructions.

Optimality claims are checked against brute-force enumeration of prefix
codes on small alphabets and against the exact average-length formula for
equiprobable labels (length l or l-1 with l = ceil(log2 K), average
l - (2^l - K)/K).
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from rabounds.coding import (
    AchievablePoint,
    Codebook,
    block_fixed_rate,
    block_huffman_rate,
    classify_then_code_point,
    fixed_length_rate,
    huffman_code,
    shortened_fixed_code,
)
from rabounds.blahut_arimoto import entropy
from rabounds.dms import Pmf


def uniform_optimal_average(k: int) -> float:
    """Exact optimal prefix-code average for K equiprobable labels."""
    if k == 1:
        return 0.0
    width = (k - 1).bit_length()
    return width - (2**width - k) / k


def brute_force_optimal_average(probs) -> float:
    """Minimum average length over every feasible length multiset.

    Sound for small alphabets: lengths above n + 2 can never help when
    Kraft-feasible shorter ones exist, and optimal lengths pair with
    probabilities in opposite sort order.
    """
    n = len(probs)
    best = math.inf
    sorted_probs = sorted(probs, reverse=True)
    for lengths in itertools.combinations_with_replacement(range(1, n + 2), n):
        if sum(Fraction(1, 2**l) for l in lengths) <= 1:
            avg = sum(p * l for p, l in zip(sorted_probs, sorted(lengths)))
            best = min(best, avg)
    return best


def is_prefix_free(words) -> bool:
    for i, a in enumerate(words):
        for b in words[i + 1 :]:
            if a.startswith(b) or b.startswith(a):
                return False
    return True


class TestFixedLengthRate:
    @pytest.mark.parametrize(
        "k,bits", [(10, 4), (1, 0), (1000, 10), (2, 1), (1024, 10), (1025, 11)]
    )
    def test_values(self, k, bits):
        assert fixed_length_rate(k) == bits

    def test_exact_at_powers_of_two(self):
        for e in range(1, 60):
            assert fixed_length_rate(2**e) == e
            assert fixed_length_rate(2**e + 1) == e + 1

    def test_validation(self):
        with pytest.raises(ValueError):
            fixed_length_rate(0)


class TestHuffman:
    def test_uniform_ten_is_optimal(self):
        """Ten equiprobable labels: six 3-bit and four 4-bit words, 3.4 bits
        on average (the exhaustively verified optimum)."""
        book = huffman_code(Pmf.uniform(10))
        assert sorted(book.lengths()) == [3, 3, 3, 3, 3, 3, 4, 4, 4, 4]
        assert book.avg_length == pytest.approx(3.4, abs=1e-12)
        assert book.avg_length == pytest.approx(uniform_optimal_average(10), abs=1e-12)

    def test_uniform_two(self):
        book = huffman_code(Pmf.uniform(2))
        assert [w for _, w in book.entries] == ["0", "1"]
        assert book.avg_length == pytest.approx(1.0)

    def test_half_quarter_quarter(self):
        source = Pmf(np.array([0.5, 0.25, 0.25]))
        book = huffman_code(source)
        assert book.lengths() == (1, 2, 2)
        assert book.avg_length == pytest.approx(1.5)
        assert book.avg_length == pytest.approx(
            brute_force_optimal_average(source.probs)
        )

    def test_single_symbol_empty_codeword(self):
        book = huffman_code(Pmf(np.array([1.0]), ("only",)))
        assert book.entries == (("only", ""),)
        assert book.avg_length == 0.0

    def test_rejects_zero_probabilities(self):
        with pytest.raises(ValueError):
            huffman_code(Pmf(np.array([0.5, 0.0, 0.5])))

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 7, 8, 9, 10, 16, 33, 1000])
    def test_uniform_closed_form_oracle(self, k):
        book = huffman_code(Pmf.uniform(k))
        assert book.avg_length == pytest.approx(uniform_optimal_average(k), abs=1e-9)

    def test_optimal_on_all_small_eighth_grids(self):
        """Every distribution over <= 4 labels with probabilities i/8 matches
        the brute-force optimum."""
        for n in (2, 3, 4):
            for cells in itertools.product(range(1, 9), repeat=n):
                if sum(cells) != 8:
                    continue
                source = Pmf(np.array(cells) / 8.0)
                book = huffman_code(source)
                assert book.avg_length == pytest.approx(
                    brute_force_optimal_average(source.probs), abs=1e-12
                ), f"not optimal for {cells}"

    def test_entropy_sandwich_and_kraft_random(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            k = int(rng.integers(2, 13))
            w = np.clip(rng.dirichlet(np.full(k, rng.choice([0.3, 1.0, 3.0]))), 1e-12, None)
            source = Pmf.from_weights(w)
            book = huffman_code(source)
            h = entropy(source)
            assert h - 1e-9 <= book.avg_length < h + 1.0
            assert book.kraft_sum() == 1.0
            assert is_prefix_free([w for _, w in book.entries])

    def test_canonical_patterns_deterministic(self):
        a = huffman_code(Pmf.uniform(10))
        b = huffman_code(Pmf.uniform(10))
        assert a.entries == b.entries
        # canonical order: shortest lengths first, bit patterns counting up
        by_len = sorted(a.entries, key=lambda e: (len(e[1]), e[1]))
        values = [int(w, 2) for _, w in by_len]
        assert values[0] == 0
        assert all(b > a for a, b in zip(values, values[1:]))


class TestShortenedFixedCode:
    def test_ten_labels_published_table(self):
        """Spare fixed-length slots fold into two 2-bit words: the classic
        00, 01, 1000..1111 table averaging 3.6 bits."""
        book = shortened_fixed_code(10)
        assert [w for _, w in book.entries] == [
            "00", "01", "1000", "1001", "1010", "1011",
            "1100", "1101", "1110", "1111",
        ]
        assert book.lengths() == (2, 2, 4, 4, 4, 4, 4, 4, 4, 4)
        assert book.avg_length == 3.6
        assert book.kraft_sum() == 1.0

    def test_is_complete_but_not_optimal_for_ten(self):
        assert shortened_fixed_code(10).avg_length > huffman_code(
            Pmf.uniform(10)
        ).avg_length

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6, 7, 9, 16, 100])
    def test_kraft_equality_and_prefix_freeness(self, k):
        book = shortened_fixed_code(k)
        assert book.kraft_sum() == 1.0
        assert is_prefix_free([w for _, w in book.entries])

    def test_small_cases(self):
        assert [w for _, w in shortened_fixed_code(2).entries] == ["0", "1"]
        assert [w for _, w in shortened_fixed_code(3).entries] == ["0", "10", "11"]


class TestBlockFixedRate:
    def test_triplets_of_ten(self):
        assert block_fixed_rate(10, 3) == Fraction(10, 3)

    def test_exact_power_of_two(self):
        assert block_fixed_rate(2, 5) == 1

    def test_ten_to_the_ten(self):
        assert block_fixed_rate(10, 10) == Fraction(34, 10)
        assert float(block_fixed_rate(10, 10)) == 3.4

    def test_huge_blocks_stay_exact(self):
        # ceil(1000 * log2 10) = 3322; exact integers, no overflow
        assert block_fixed_rate(10, 1000) == Fraction(3322, 1000)

    @pytest.mark.parametrize("k", [2, 3, 10, 17])
    def test_block_convergence_property(self, k):
        """Rate per symbol lies in [log2 K, log2 K + 1/n] and tightens."""
        for n in (1, 2, 3, 5, 8, 13, 40):
            rate = float(block_fixed_rate(k, n))
            assert math.log2(k) - 1e-12 <= rate <= math.log2(k) + 1.0 / n

    def test_validation(self):
        with pytest.raises(ValueError):
            block_fixed_rate(0, 3)
        with pytest.raises(ValueError):
            block_fixed_rate(10, 0)


class TestBlockHuffmanRate:
    def test_uniform_ten_single(self):
        assert block_huffman_rate(Pmf.uniform(10), 1) == pytest.approx(3.4, abs=1e-12)

    def test_dyadic_uniform_two(self):
        assert block_huffman_rate(Pmf.uniform(2), 3) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_ten_triplets(self):
        """Product alphabet of 1000 equiprobable tuples; the per-symbol rate
        must fall in the entropy / block-fixed sandwich."""
        rate = block_huffman_rate(Pmf.uniform(10), 3)
        assert rate == pytest.approx(uniform_optimal_average(1000) / 3, abs=1e-9)
        assert math.log2(10) <= rate <= float(block_fixed_rate(10, 3))

    def test_block_beats_or_matches_symbol_coding(self):
        source = Pmf(np.array([0.6, 0.3, 0.1]))
        r1 = block_huffman_rate(source, 1)
        r2 = block_huffman_rate(source, 2)
        r3 = block_huffman_rate(source, 3)
        h = entropy(source)
        assert h - 1e-9 <= r3 <= r2 <= r1
        assert r1 < h + 1.0
        assert r2 < h + 1.0 / 2
        assert r3 < h + 1.0 / 3

    def test_zero_probabilities_are_pruned(self):
        with_zero = Pmf(np.array([0.5, 0.0, 0.5]))
        assert block_huffman_rate(with_zero, 2) == pytest.approx(1.0, abs=1e-12)

    def test_alphabet_guard(self):
        with pytest.raises(ValueError, match="guard"):
            block_huffman_rate(Pmf.uniform(3), 13)  # 3^13 > 2^20

    def test_validation(self):
        with pytest.raises(ValueError):
            block_huffman_rate(Pmf.uniform(3), 0)


class TestCodebook:
    def test_prefix_violation_rejected(self):
        with pytest.raises(ValueError):
            Codebook((("a", "0"), ("b", "01")), 1.5)

    def test_kraft_violation_rejected(self):
        with pytest.raises(ValueError):
            Codebook((("a", "0"), ("b", "1"), ("c", "00")), 1.0)

    def test_non_binary_rejected(self):
        with pytest.raises(ValueError):
            Codebook((("a", "0x"),), 1.0)

    def test_export_text(self):
        book = huffman_code(Pmf(np.array([0.5, 0.25, 0.25]), ("b", "a", "c")))
        text = book.to_text()
        lines = text.splitlines()
        assert len(lines) == 3
        assert lines == sorted(lines)
        for line in lines:
            label, bits = line.split("\t")
            assert label in {"a", "b", "c"}
            assert set(bits) <= {"0", "1"}


class TestClassifyThenCode:
    def test_published_fixture_points(self):
        p1 = classify_then_code_point(0.9944, 4, method_tag="fixed")
        p1a = classify_then_code_point(0.9944, 3.6, method_tag="huffman")
        p2 = classify_then_code_point(
            0.9944, Fraction(10, 3), method_tag="block-fixed", block_size=3
        )
        assert (p1.rate, p1.accuracy) == (4.0, 0.9944)
        assert p1a.rate == 3.6
        assert p2.rate == pytest.approx(10 / 3)
        assert p2.block_size == 3

    def test_validation(self):
        with pytest.raises(ValueError):
            classify_then_code_point(1.5, 1.0)
        with pytest.raises(ValueError):
            classify_then_code_point(0.5, -1.0)
        with pytest.raises(ValueError):
            classify_then_code_point(0.5, 1.0, method_tag="nope")
        with pytest.raises(ValueError):
            AchievablePoint(1.0, 0.5, "fixed", block_size=0)
