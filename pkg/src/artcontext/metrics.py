"""Corpus-level BLEU-1..4 and ROUGE-L for explanation evaluation.

Classic corpus BLEU: modified n-gram precisions aggregated over all pairs
(clipped counts), geometric mean with uniform weights, brevity penalty
e^(1 - r/c) when the candidate corpus is shorter than the closest-reference
length total. No smoothing. ROUGE-L is the LCS-based F measure, maximum
over references, averaged over pairs at the corpus level.
"""

from __future__ import annotations

import json
import logging
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .errors import ValidationError

logger = logging.getLogger(__name__)


def tokenize(text: str) -> List[str]:
    """Lowercase, split on whitespace, strip surrounding punctuation."""
    tokens = []
    for raw in text.lower().split():
        start, end = 0, len(raw)
        while start < end and unicodedata.category(raw[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(raw[end - 1]).startswith("P"):
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


@dataclass
class EvalPair:
    id: str
    candidate: str
    references: List[str]

    def validate(self) -> None:
        if not self.candidate.strip():
            raise ValidationError(f"pair {self.id!r}: empty candidate")
        if not any(ref.strip() for ref in self.references):
            raise ValidationError(f"pair {self.id!r}: needs at least one non-empty reference")


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _closest_reference_length(candidate_len: int, reference_lens: Sequence[int]) -> int:
    # closest length wins; ties prefer the shorter reference
    return min(reference_lens, key=lambda r: (abs(r - candidate_len), r))


def bleu(pairs: Sequence[EvalPair], max_n: int = 4) -> Dict[int, float]:
    """Corpus BLEU-1..max_n on the 0..100 scale."""
    if not 1 <= max_n <= 4:
        raise ValidationError(f"max_n must be in [1, 4], got {max_n}")
    if not pairs:
        raise ValidationError("bleu needs at least one pair")
    for pair in pairs:
        pair.validate()

    matched = [0] * (max_n + 1)
    possible = [0] * (max_n + 1)
    candidate_total = 0
    reference_total = 0
    for pair in pairs:
        candidate = tokenize(pair.candidate)
        references = [tokenize(ref) for ref in pair.references if ref.strip()]
        candidate_total += len(candidate)
        reference_total += _closest_reference_length(len(candidate), [len(r) for r in references])
        for n in range(1, max_n + 1):
            counts = _ngram_counts(candidate, n)
            if not counts:
                continue
            ceiling: Counter = Counter()
            for ref in references:
                for gram, count in _ngram_counts(ref, n).items():
                    if count > ceiling[gram]:
                        ceiling[gram] = count
            matched[n] += sum(min(count, ceiling[gram]) for gram, count in counts.items())
            possible[n] += sum(counts.values())

    if candidate_total == 0:
        return {n: 0.0 for n in range(1, max_n + 1)}
    if candidate_total > reference_total:
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - reference_total / candidate_total)

    scores: Dict[int, float] = {}
    for n in range(1, max_n + 1):
        precisions = []
        for order in range(1, n + 1):
            if possible[order] == 0 or matched[order] == 0:
                precisions = []
                break
            precisions.append(matched[order] / possible[order])
        if not precisions:
            scores[n] = 0.0
            continue
        log_mean = sum(math.log(p) for p in precisions) / n
        scores[n] = 100.0 * brevity * math.exp(log_mean)
    return scores


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length via the two-row dynamic program."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: str, references: Sequence[str], beta: float = 1.0) -> float:
    """LCS F score, best reference wins; empty-vs-empty is defined as 0."""
    candidate_tokens = tokenize(candidate)
    best = 0.0
    for reference in references:
        reference_tokens = tokenize(reference)
        lcs = lcs_length(candidate_tokens, reference_tokens)
        if lcs == 0:
            continue
        precision = lcs / len(candidate_tokens)
        recall = lcs / len(reference_tokens)
        denominator = recall + beta * beta * precision
        if denominator == 0.0:
            continue
        score = (1.0 + beta * beta) * precision * recall / denominator
        best = max(best, score)
    return best


@dataclass
class PairScores:
    id: str
    bleu: Dict[int, float]
    rouge_l: float


@dataclass
class MetricReport:
    pair_count: int
    corpus_bleu: Dict[int, float]
    corpus_rouge_l: float
    per_pair: List[PairScores] = field(default_factory=list)

    def as_dict(self) -> Dict[str, object]:
        def bleu_dict(scores: Dict[int, float]) -> Dict[str, float]:
            return {f"bleu_{n}": scores[n] for n in sorted(scores)}

        return {
            "pair_count": self.pair_count,
            "corpus": {**bleu_dict(self.corpus_bleu), "rouge_l": self.corpus_rouge_l},
            "per_pair": [
                {"id": p.id, **bleu_dict(p.bleu), "rouge_l": p.rouge_l} for p in self.per_pair
            ],
        }

    def render(self) -> str:
        orders = sorted(self.corpus_bleu)
        header = [f"BLEU-{n}" for n in orders] + ["ROUGE-L"]
        values = [f"{self.corpus_bleu[n]:.2f}" for n in orders] + [f"{self.corpus_rouge_l:.4f}"]
        widths = [max(len(h), len(v)) for h, v in zip(header, values)]
        return "\n".join(
            [
                f"pairs: {self.pair_count}",
                "  ".join(h.rjust(w) for h, w in zip(header, widths)),
                "  ".join(v.rjust(w) for v, w in zip(values, widths)),
            ]
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.as_dict(), handle, ensure_ascii=False, indent=2)
            handle.write("\n")


def evaluate_corpus(pairs: Sequence[EvalPair], max_n: int = 4, beta: float = 1.0) -> MetricReport:
    """Score every pair and the corpus; corpus BLEU uses aggregated counts."""
    if not pairs:
        raise ValidationError("evaluate_corpus needs at least one pair")
    for pair in pairs:
        pair.validate()
    per_pair = [
        PairScores(pair.id, bleu([pair], max_n), rouge_l(pair.candidate, pair.references, beta))
        for pair in pairs
    ]
    corpus_rouge = sum(p.rouge_l for p in per_pair) / len(per_pair)
    return MetricReport(
        pair_count=len(pairs),
        corpus_bleu=bleu(pairs, max_n),
        corpus_rouge_l=corpus_rouge,
        per_pair=per_pair,
    )
