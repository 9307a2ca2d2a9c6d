"""Sequence decoding: greedy beam search, backtracking best-first beam search,
and an exhaustive oracle for verification.

Both decoders share the same child-creation rule, so they differ only in
search order:

* token probabilities of exactly 0 are masked out,
* tokens whose probability falls strictly below ``p_top * (1 - p_b)`` are
  pruned (``p_b`` is the maximal probability difference allowed in a beam;
  ``p_b = 1`` prunes nothing, ``p_b = None`` disables the rule),
* a child whose token already occurs among the trailing ``repeat_window - 1``
  generated tokens takes the repeat penalty once at creation,
* the best ``n`` candidate tokens by penalized score become children.

Hypotheses are ordered everywhere by descending heuristic, then shorter
sequence, then lexicographic token ids, which makes every search fully
deterministic.
"""

from __future__ import annotations

import heapq
from bisect import insort
from dataclasses import dataclass, field
from time import perf_counter
from typing import Sequence

import numpy as np

from .errors import CapacityError, ConfigError, SearchExhaustedError
from .scorers.base import Scorer


def length_penalty(length: int, alpha: float) -> float:
    """Google-NMT length normalization: ((5 + length) ** alpha) / (6 ** alpha)."""
    return (5.0 + length) ** alpha / 6.0**alpha


def heuristic(log_joint: float, length: int, alpha: float) -> float:
    """Length-normalized log joint probability ordering the search."""
    return log_joint / length_penalty(length, alpha)


def apply_repeat_penalty(log_joint: float, p_t: float) -> float:
    """Log-domain unigram repeat penalty: joint probability raised to
    ``2 - 0.5 * p_t`` where ``p_t`` is the duplicate token's probability."""
    return (2.0 - 0.5 * p_t) * log_joint


@dataclass(frozen=True)
class Hypothesis:
    """A partial or complete output sequence (generated tokens only)."""

    tokens: tuple[int, ...]
    log_joint: float
    heuristic: float
    complete: bool


def sort_key(hyp: Hypothesis) -> tuple:
    return (-hyp.heuristic, len(hyp.tokens), hyp.tokens)


@dataclass
class SearchStats:
    """Search effort counters for one decode invocation.

    ``vertices_explored`` counts scorer invocations on distinct prefixes;
    ``dead_ends`` counts hypotheses discarded by capacity cuts (the beam cut
    for greedy search, the top-m frontier cap for the backtracking search);
    ``backtracks`` counts expansions of a hypothesis that is not a child of
    the previously expanded one.
    """

    vertices_explored: int = 0
    dead_ends: int = 0
    backtracks: int = 0
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {
            "vertices_explored": self.vertices_explored,
            "dead_ends": self.dead_ends,
            "backtracks": self.backtracks,
            "wall_time_ms": self.wall_time * 1000.0,
        }


@dataclass(frozen=True)
class DecodeConfig:
    """Search hyperparameters.

    ``m`` defaults to ``3 * nb_output`` and ``step_budget`` to
    ``64 * max_len * nb_output`` when left unset.
    """

    n: int = 4
    nb_output: int = 1
    m: int | None = None
    p_b: float | None = 1.0
    alpha: float = 0.6
    max_len: int = 64
    repeat_window: int = 4
    step_budget: int | None = None

    @property
    def resolved_m(self) -> int:
        return self.m if self.m is not None else 3 * self.nb_output

    @property
    def resolved_step_budget(self) -> int:
        return self.step_budget if self.step_budget is not None else 64 * self.max_len * self.nb_output

    def validate(self) -> "DecodeConfig":
        if self.n < 1:
            raise ConfigError("beam size n must be >= 1")
        if self.nb_output < 1:
            raise ConfigError("nb_output must be >= 1")
        if self.resolved_m < self.nb_output:
            raise ConfigError(f"m ({self.resolved_m}) must be >= nb_output ({self.nb_output})")
        if self.p_b is not None and not 0.0 <= self.p_b <= 1.0:
            raise ConfigError("p_b must lie in [0, 1]")
        if self.max_len < 1:
            raise ConfigError("max_len must be >= 1")
        if self.repeat_window < 1:
            raise ConfigError("repeat_window must be >= 1")
        if self.alpha < 0.0:
            raise ConfigError("alpha must be >= 0")
        if self.resolved_step_budget < 1:
            raise ConfigError("step_budget must be >= 1")
        return self


_ROOT = Hypothesis(tokens=(), log_joint=0.0, heuristic=0.0, complete=False)


def _children(
    scorer: Scorer, label_ids: Sequence[int], hyp: Hypothesis, config: DecodeConfig
) -> list[Hypothesis]:
    """Create the top-n children of a hypothesis; shared by both decoders."""
    probs = scorer.next_distribution(label_ids, list(hyp.tokens))
    cand = np.flatnonzero(probs > 0.0)
    if cand.size == 0:
        return []
    p = probs[cand]
    if config.p_b is not None:
        threshold = p.max() * (1.0 - config.p_b)
        keep = p >= threshold
        cand, p = cand[keep], p[keep]
    child_lj = hyp.log_joint + np.log(p)
    if config.repeat_window > 1 and hyp.tokens:
        window = np.array(hyp.tokens[-(config.repeat_window - 1) :], dtype=np.int64)
        dup = np.isin(cand, window)
        if dup.any():
            child_lj = np.where(dup, (2.0 - 0.5 * p) * child_lj, child_lj)
    order = np.lexsort((cand, -child_lj))[: config.n]
    new_len = len(hyp.tokens) + 1
    lp = length_penalty(new_len, config.alpha)
    out = []
    for i in order:
        tok = int(cand[i])
        lj = float(child_lj[i])
        complete = tok == scorer.eos_id or new_len >= config.max_len
        out.append(Hypothesis(hyp.tokens + (tok,), lj, lj / lp, complete))
    return out


def greedy_bsd(
    scorer: Scorer, label_ids: Sequence[int], config: DecodeConfig
) -> tuple[list[Hypothesis], SearchStats]:
    """Classic beam search: exactly n live hypotheses per step, all expanded
    simultaneously, until the beam drains at EOS/max_len."""
    config.validate()
    if config.nb_output > config.n:
        raise ConfigError(
            f"greedy beam search cannot emit more than n sequences (nb_output {config.nb_output} > n {config.n})"
        )
    stats = SearchStats()
    start = perf_counter()
    budget = config.resolved_step_budget
    live: list[Hypothesis] = [_ROOT]
    completed: list[Hypothesis] = []
    prev: tuple[int, ...] | None = None
    exhausted = False
    while live and not exhausted:
        pool: list[Hypothesis] = []
        for hyp in live:
            if stats.vertices_explored >= budget:
                exhausted = True
                break
            stats.vertices_explored += 1
            if prev is not None and hyp.tokens[:-1] != prev:
                stats.backtracks += 1
            prev = hyp.tokens
            for child in _children(scorer, label_ids, hyp, config):
                if child.complete:
                    completed.append(child)
                else:
                    pool.append(child)
        pool.sort(key=sort_key)
        live = pool[: config.n]
        stats.dead_ends += len(pool) - len(live)
    stats.wall_time = perf_counter() - start
    completed.sort(key=sort_key)
    if not completed:
        raise SearchExhaustedError("beam search produced no complete hypothesis", stats)
    return completed[: config.nb_output], stats


def b2sd(
    scorer: Scorer, label_ids: Sequence[int], config: DecodeConfig
) -> tuple[list[Hypothesis], SearchStats]:
    """Backtracking beam search: best-first expansion of the single best
    frontier hypothesis, frontier capped to the top-m.

    Terminates when the frontier empties, the step budget runs out, or the
    nb_output best completed hypotheses dominate every possible frontier
    descendant. Dominance compares against an optimistic bound
    ``log_joint / lp(max_len)`` rather than the frontier heuristic itself:
    the heuristic can rise along a path when near-certain tokens extend it,
    so the raw frontier heuristic would not be a safe stopping criterion.
    """
    config.validate()
    stats = SearchStats()
    start = perf_counter()
    budget = config.resolved_step_budget
    m = config.resolved_m
    lp_max = length_penalty(config.max_len, config.alpha)

    frontier: list[tuple[tuple, Hypothesis]] = [(sort_key(_ROOT), _ROOT)]
    alive: set[tuple[int, ...]] = {()}
    bound_heap: list[tuple[float, tuple[int, ...]]] = [(-0.0, ())]
    completed: list[Hypothesis] = []
    prev: tuple[int, ...] | None = None

    def best_bound() -> float | None:
        while bound_heap and bound_heap[0][1] not in alive:
            heapq.heappop(bound_heap)
        if not bound_heap:
            return None
        return -bound_heap[0][0] / lp_max

    while frontier:
        if len(completed) >= config.nb_output:
            bound = best_bound()
            if bound is None or completed[config.nb_output - 1].heuristic > bound:
                break
        if stats.vertices_explored >= budget:
            break
        _, hyp = heapq.heappop(frontier)
        alive.discard(hyp.tokens)
        stats.vertices_explored += 1
        if prev is not None and hyp.tokens[:-1] != prev:
            stats.backtracks += 1
        prev = hyp.tokens
        for child in _children(scorer, label_ids, hyp, config):
            if child.complete:
                insort(completed, child, key=sort_key)
            else:
                heapq.heappush(frontier, (sort_key(child), child))
                alive.add(child.tokens)
                heapq.heappush(bound_heap, (-child.log_joint, child.tokens))
        if len(frontier) > m:
            frontier.sort()
            for _, evicted in frontier[m:]:
                alive.discard(evicted.tokens)
            stats.dead_ends += len(frontier) - m
            del frontier[m:]
    stats.wall_time = perf_counter() - start
    if not completed:
        raise SearchExhaustedError("step budget exhausted with no complete hypothesis", stats)
    return completed[: config.nb_output], stats


def exhaustive_topk(
    scorer: Scorer,
    label_ids: Sequence[int],
    max_len: int,
    k: int,
    alpha: float = 0.6,
    repeat_window: int = 4,
) -> list[Hypothesis]:
    """Enumerate every sequence ending at EOS or truncated at max_len and
    return the global top-k by heuristic. Verification oracle for b2sd."""
    if scorer.vocab_size**max_len > 10**7:
        raise CapacityError(
            f"search space {scorer.vocab_size}^{max_len} exceeds the 10^7 enumeration limit"
        )
    eos = scorer.eos_id
    results: list[Hypothesis] = []

    def recurse(tokens: tuple[int, ...], log_joint: float) -> None:
        probs = scorer.next_distribution(label_ids, list(tokens))
        cand = np.flatnonzero(probs > 0.0)
        if cand.size == 0:
            return
        p = probs[cand]
        log_p = np.log(p)
        window = tokens[-(repeat_window - 1) :] if repeat_window > 1 else ()
        new_len = len(tokens) + 1
        lp = length_penalty(new_len, alpha)
        for i in range(cand.size):
            tok = int(cand[i])
            child = log_joint + float(log_p[i])
            if tok in window:
                child = apply_repeat_penalty(child, float(p[i]))
            if tok == eos or new_len >= max_len:
                results.append(Hypothesis(tokens + (tok,), child, child / lp, True))
            else:
                recurse(tokens + (tok,), child)

    recurse((), 0.0)
    results.sort(key=sort_key)
    return results[:k]
