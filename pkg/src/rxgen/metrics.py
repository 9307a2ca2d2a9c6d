"""Lexical evaluation: multi-reference BLEU and ROUGE, intra-label diversity.

Metric tokenization is whitespace on raw text, case-sensitive. Scores are
reported on a 0-100 scale; Jaccard similarities on 0-1.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InputError


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _normalize_references(
    candidates: Sequence[str], references
) -> list[list[str]]:
    if isinstance(references, Mapping):
        refs = [list(references.get(i, [])) for i in range(len(candidates))]
    else:
        refs = [list(r) for r in references]
    if len(refs) != len(candidates):
        raise InputError(f"{len(candidates)} candidates but {len(refs)} reference lists")
    for i, group in enumerate(refs):
        if not group:
            raise InputError(f"candidate {i} has no references")
    return refs


def bleu(candidates: Sequence[str], references) -> float:
    """Corpus-level BLEU, n-grams up to 4.

    Clipped counts take the max over references per n-gram; brevity uses the
    closest reference length (ties to the shorter). Orders with zero matches
    are add-one smoothed, so the score is never exactly 0 -- short
    prescriptions routinely lack higher-order n-grams.
    """
    if not candidates:
        raise InputError("bleu requires at least one candidate")
    refs = _normalize_references(candidates, references)
    matches = [0] * 5
    totals = [0] * 5
    cand_len = 0
    ref_len = 0
    for cand, group in zip(candidates, refs):
        cand_tokens = cand.split()
        ref_tokens = [r.split() for r in group]
        cand_len += len(cand_tokens)
        ref_len += min((len(r) for r in ref_tokens), key=lambda L: (abs(L - len(cand_tokens)), L))
        for n in range(1, 5):
            cand_counts = _ngrams(cand_tokens, n)
            if not cand_counts:
                continue
            clip: Counter = Counter()
            for r in ref_tokens:
                ref_counts = _ngrams(r, n)
                for gram, count in ref_counts.items():
                    clip[gram] = max(clip[gram], count)
            matches[n] += sum(min(count, clip[gram]) for gram, count in cand_counts.items())
            totals[n] += sum(cand_counts.values())
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        num, den = matches[n], totals[n]
        if num == 0:
            num, den = num + 1, den + 1
        log_sum += math.log(num / den)
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return 100.0 * brevity * math.exp(log_sum / 4.0)


def _f1(overlap: int, cand_total: int, ref_total: int) -> float:
    if cand_total == 0 or ref_total == 0:
        return 0.0
    precision = overlap / cand_total
    recall = overlap / ref_total
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidate: str, references: Sequence[str], n: int) -> float:
    """ROUGE-N F1, max over references."""
    if n not in (1, 2):
        raise InputError(f"rouge_n supports n in {{1, 2}}, got {n}")
    if not references:
        raise InputError("rouge_n requires at least one reference")
    cand_counts = _ngrams(candidate.split(), n)
    cand_total = sum(cand_counts.values())
    best = 0.0
    for ref in references:
        ref_counts = _ngrams(ref.split(), n)
        overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        best = max(best, _f1(overlap, cand_total, sum(ref_counts.values())))
    return 100.0 * best


def _lcs(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            current.append(previous[j - 1] + 1 if x == y else max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: str, references: Sequence[str]) -> float:
    """ROUGE-L F1 (longest common subsequence), max over references."""
    if not references:
        raise InputError("rouge_l requires at least one reference")
    cand_tokens = candidate.split()
    best = 0.0
    for ref in references:
        ref_tokens = ref.split()
        overlap = _lcs(cand_tokens, ref_tokens)
        best = max(best, _f1(overlap, len(cand_tokens), len(ref_tokens)))
    return 100.0 * best


@dataclass
class EvalReport:
    """Corpus-level lexical scores plus a per-label breakdown."""

    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float
    per_label: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "bleu": self.bleu,
            "rouge1": self.rouge1,
            "rouge2": self.rouge2,
            "rougeL": self.rougeL,
            "per_label": self.per_label,
        }


def evaluate_generations(
    generations: Sequence[tuple[str, str]], references: Mapping[str, Sequence[str]]
) -> EvalReport:
    """Score (label, text) generations against per-label reference lists."""
    if not generations:
        raise InputError("no generations to evaluate")
    for label, _ in generations:
        if label not in references or not references[label]:
            raise InputError(f"label {label!r} has no references")

    def scores(pairs: Sequence[tuple[str, str]]) -> dict[str, float]:
        cands = [text for _, text in pairs]
        refs = [list(references[label]) for label, _ in pairs]
        return {
            "bleu": bleu(cands, refs),
            "rouge1": _mean([rouge_n(c, r, 1) for c, r in zip(cands, refs)]),
            "rouge2": _mean([rouge_n(c, r, 2) for c, r in zip(cands, refs)]),
            "rougeL": _mean([rouge_l(c, r) for c, r in zip(cands, refs)]),
        }

    corpus_scores = scores(generations)
    labels = []
    for label, _ in generations:
        if label not in labels:
            labels.append(label)
    per_label = {
        label: scores([(l, t) for l, t in generations if l == label]) for label in labels
    }
    return EvalReport(per_label=per_label, **corpus_scores)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


@dataclass
class DiversityReport:
    """Median and mean of per-label average pairwise Jaccard similarity.

    Lower is better: similar generations for one label indicate low diversity.
    Labels with fewer than two generations are skipped and counted.
    """

    median_jaccard: float
    mean_jaccard: float
    skipped_labels: int = 0

    def to_json(self) -> dict:
        return {
            "median_jaccard": self.median_jaccard,
            "mean_jaccard": self.mean_jaccard,
            "skipped_labels": self.skipped_labels,
        }


def jaccard_similarity(a: str, b: str) -> float:
    """Intersection over union of whitespace token sets."""
    sa, sb = set(a.split()), set(b.split())
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def jaccard_diversity(generations: Mapping[str, Sequence[str]]) -> DiversityReport:
    per_label = []
    skipped = 0
    for label, texts in generations.items():
        if len(texts) < 2:
            skipped += 1
            continue
        pairs = [
            jaccard_similarity(texts[i], texts[j])
            for i in range(len(texts))
            for j in range(i + 1, len(texts))
        ]
        per_label.append(sum(pairs) / len(pairs))
    if not per_label:
        raise InputError("no label has at least two generations")
    return DiversityReport(
        median_jaccard=statistics.median(per_label),
        mean_jaccard=sum(per_label) / len(per_label),
        skipped_labels=skipped,
    )
