"""Weight tuning by exact line search over n-best pools.

Varying one weight turns every candidate's score into a line in that
weight; the per-sentence upper envelope of those lines is computed exactly
and corpus BLEU is evaluated once per envelope interval.  Tuning runs
coordinate ascent over all dimensions on a growing n-best pool, with
seeded random restarts, and only accepts steps that improve pool BLEU.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .bleu import ZERO_STATS, BleuStats, bleu_from_stats, sentence_stats


@dataclass(frozen=True)
class PoolCandidate:
    target: tuple
    features: tuple
    stats: BleuStats


def _upper_envelope(lines):
    """Upper envelope of y = intercept + slope*x lines.

    lines is a list of (slope, intercept, payload).  Returns a list of
    (x_from, payload) segments in increasing x order; the first segment
    starts at -inf.
    """
    # steepest-last order; for equal slopes only the highest intercept can
    # appear on the envelope (ties keep the smallest payload)
    by_slope: dict = {}
    for slope, intercept, payload in lines:
        cur = by_slope.get(slope)
        if (
            cur is None
            or intercept > cur[0]
            or (intercept == cur[0] and _payload_key(payload) < _payload_key(cur[1]))
        ):
            by_slope[slope] = (intercept, payload)
    ordered = sorted((s, ib[0], ib[1]) for s, ib in by_slope.items())
    hull = []  # (slope, intercept, payload, x_from)
    for slope, intercept, payload in ordered:
        x_from = -math.inf
        while hull:
            s0, i0, _, x0 = hull[-1]
            # intersection with the current top line
            x_from = (i0 - intercept) / (slope - s0)
            if x_from <= x0:
                hull.pop()
                continue
            break
        if not hull:
            x_from = -math.inf
        hull.append((slope, intercept, payload, x_from))
    return [(x_from, payload) for _, _, payload, x_from in hull]


def _payload_key(payload):
    return payload.target if isinstance(payload, PoolCandidate) else payload


def line_search(pool, weights, dim):
    """Best value for one weight by exact envelope sweep.

    pool is a list of per-sentence candidate lists (PoolCandidate).
    Returns (best_weight, best_bleu).  When no line crossing exists the
    current weight is returned with its BLEU.
    """
    if not pool or any(len(cands) == 0 for cands in pool):
        raise ValueError("every sentence needs a non-empty candidate list")
    weights = np.asarray(weights, dtype=float)
    current = float(weights[dim])
    envelopes = []
    for cands in pool:
        lines = []
        for cand in cands:
            feats = np.asarray(cand.features)
            slope = float(feats[dim])
            intercept = float(weights @ feats) - weights[dim] * slope
            lines.append((slope, intercept, cand))
        envelopes.append(_upper_envelope(lines))

    boundaries = sorted({x for env in envelopes for x, _ in env if math.isfinite(x)})
    if not boundaries:
        stats = ZERO_STATS
        for env in envelopes:
            stats = stats + env[0][1].stats
        return current, bleu_from_stats(stats)

    # sweep events: at boundary x the sentence's choice switches
    events: dict[float, list] = {}
    stats = ZERO_STATS
    for sent, env in enumerate(envelopes):
        stats = stats + env[0][1].stats
        for (x, cand), (_, prev) in zip(env[1:], env):
            events.setdefault(x, []).append((sent, prev, cand))

    points = [boundaries[0] - 1.0]
    for a, b in zip(boundaries, boundaries[1:]):
        points.append((a + b) / 2.0)
    points.append(boundaries[-1] + 1.0)

    best_bleu, best_x = -1.0, current
    idx = 0
    for k, x in enumerate(points):
        # apply all events up to this interval
        while idx < len(boundaries) and boundaries[idx] <= x:
            for _, prev, cand in events.get(boundaries[idx], []):
                stats = stats + _negate(prev.stats) + cand.stats
            idx += 1
        bleu = bleu_from_stats(stats)
        better = bleu > best_bleu + 1e-12
        closer = abs(bleu - best_bleu) <= 1e-12 and abs(x - current) < abs(best_x - current)
        if better or closer:
            best_bleu, best_x = bleu, x
    return best_x, best_bleu


def _negate(stats: BleuStats) -> BleuStats:
    return BleuStats(
        tuple(-m for m in stats.matches),
        tuple(-t for t in stats.totals),
        -stats.cand_len,
        -stats.ref_len,
    )


def pool_bleu(pool, weights):
    """Corpus BLEU of the per-sentence argmax candidates at the given
    weights (ties to the lexicographically smallest target)."""
    weights = np.asarray(weights, dtype=float)
    stats = ZERO_STATS
    for cands in pool:
        best = min(cands, key=lambda c: (-float(weights @ np.asarray(c.features)), c.target))
        stats = stats + best.stats
    return bleu_from_stats(stats)


def coordinate_ascent(pool, weights, max_sweeps: int = 20):
    """Line search over every dimension until a full sweep yields no BLEU
    gain; returns (weights, bleu).  Accepted steps never lower BLEU."""
    weights = np.asarray(weights, dtype=float).copy()
    best = pool_bleu(pool, weights)
    for _ in range(max_sweeps):
        improved = False
        for dim in range(len(weights)):
            candidate, bleu = line_search(pool, weights, dim)
            if bleu > best + 1e-9:
                weights[dim] = candidate
                best = bleu
                improved = True
        if not improved:
            break
    return weights, best


def tune_weights(decode_nbest, dev_sentences, dev_references, initial_weights,
                 iterations: int = 10, nbest_size: int = 100, restarts: int = 8,
                 seed: int = 0):
    """Iterated n-best pooling plus coordinate ascent with random restarts.

    decode_nbest(sentence, weights, nbest_size) must return a list of
    (target_tokens, feature_vector).  Returns (weights, dev_bleu) with the
    best pool BLEU reached; the pool converges to true dev BLEU as it
    saturates.
    """
    rng = random.Random(seed)
    weights = np.asarray(initial_weights, dtype=float).copy()
    dim = len(weights)
    pool: list[dict] = [dict() for _ in dev_sentences]
    best_bleu = -1.0
    for _ in range(iterations):
        grew = False
        for idx, (sent, ref) in enumerate(zip(dev_sentences, dev_references)):
            for target, features in decode_nbest(sent, weights, nbest_size):
                if target not in pool[idx]:
                    pool[idx][target] = PoolCandidate(
                        tuple(target), tuple(features), sentence_stats(target, ref)
                    )
                    grew = True
        pool_lists = [sorted(p.values(), key=lambda c: c.target) for p in pool]
        candidates = [coordinate_ascent(pool_lists, weights)]
        for _ in range(max(0, restarts - 1)):
            start = np.array([rng.uniform(-2.0, 2.0) for _ in range(dim)])
            candidates.append(coordinate_ascent(pool_lists, start))
        candidates.sort(key=lambda wb: -wb[1])
        new_weights, new_bleu = candidates[0]
        if new_bleu > best_bleu + 1e-12:
            weights, best_bleu = new_weights, new_bleu
        if not grew:
            break
    return weights, best_bleu
