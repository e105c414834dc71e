"""Log-linear phrase-based beam-stack decoder over multiple phrase tables
and language models.

Every translation option carries a full feature vector: one four-score
block per phrase table (absent blocks filled with a floor constant) plus a
presence indicator per block, one feature per language model, word and
phrase penalties, and the distance-based distortion total.  Hypotheses are
recombined on (coverage, last position, LM states); stacks are organized
by covered-word count with histogram pruning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lm import BOS, EOS, UNK

DEFAULT_FLOOR = -7.0  # log10 score for absent table blocks and OOV options


@dataclass(frozen=True)
class FeatureLayout:
    """Names and positions of the decoder's feature vector."""

    n_tables: int
    n_lms: int

    @property
    def dimension(self) -> int:
        return 5 * self.n_tables + self.n_lms + 3

    def names(self):
        out = []
        for k in range(self.n_tables):
            out += [
                f"pt{k}.phi_fwd",
                f"pt{k}.lex_fwd",
                f"pt{k}.phi_rev",
                f"pt{k}.lex_rev",
                f"pt{k}.ind",
            ]
        out += [f"lm{k}" for k in range(self.n_lms)]
        out += ["word_penalty", "phrase_penalty", "distortion"]
        return out

    def table_block(self, k: int) -> slice:
        return slice(5 * k, 5 * k + 4)

    def indicator(self, k: int) -> int:
        return 5 * k + 4

    def lm_feature(self, k: int) -> int:
        return 5 * self.n_tables + k

    @property
    def word_penalty(self) -> int:
        return 5 * self.n_tables + self.n_lms

    @property
    def phrase_penalty(self) -> int:
        return self.word_penalty + 1

    @property
    def distortion(self) -> int:
        return self.word_penalty + 2

    def default_weights(self) -> np.ndarray:
        w = np.zeros(self.dimension)
        for k in range(self.n_tables):
            w[self.table_block(k)] = 1.0
        for k in range(self.n_lms):
            w[self.lm_feature(k)] = 1.0
        w[self.distortion] = -1.0
        return w


def write_weights(weights, layout: FeatureLayout, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name, value in zip(layout.names(), weights):
            fh.write(f"{name} {value:.17g}\n")


def read_weights(path, layout: FeatureLayout) -> np.ndarray:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            name, value = line.rsplit(" ", 1)
            values[name] = float(value)
    names = layout.names()
    missing = [n for n in names if n not in values]
    if missing:
        raise ValueError(f"{path}: missing weights for {missing}")
    return np.array([values[n] for n in names])


@dataclass(frozen=True)
class TranslationOption:
    span: tuple        # (start, end), end exclusive
    tgt: tuple
    features: tuple    # static features: table blocks, indicators, penalties
    table_id: int | None  # None for OOV pass-through


def _static_features(layout: FeatureLayout, span, tgt, table_id, scores, floor):
    feats = np.zeros(layout.dimension)
    for k in range(layout.n_tables):
        feats[layout.table_block(k)] = floor
    if table_id is not None:
        block = layout.table_block(table_id)
        feats[block] = [math.log10(s) if s > 0 else floor for s in scores]
        feats[layout.indicator(table_id)] = 1.0
    feats[layout.word_penalty] = len(tgt)
    feats[layout.phrase_penalty] = 1.0
    return feats


def build_options(sentence, tables, floor: float = DEFAULT_FLOOR,
                  weights=None, cap: int = 20, layout: FeatureLayout | None = None,
                  n_lms: int = 1):
    """Translation options per span: the union of matches across tables
    (same phrase pair in two tables stays two options), capped per span by
    weighted score, with verbatim pass-through for unknown words."""
    if not tables:
        raise ValueError("need at least one phrase table")
    sentence = tuple(sentence)
    if layout is None:
        layout = FeatureLayout(len(tables), n_lms)
    if weights is None:
        weights = layout.default_weights()
    weights = np.asarray(weights, dtype=float)
    max_len = max(t.max_len for t in tables)
    options: dict[tuple, list] = {}
    for start in range(len(sentence)):
        for end in range(start + 1, min(len(sentence), start + max_len) + 1):
            span = (start, end)
            phrase = sentence[start:end]
            found = []
            for k, table in enumerate(tables):
                for tgt, scores in table.lookup(phrase).items():
                    feats = _static_features(layout, span, tgt, k, scores, floor)
                    found.append(TranslationOption(span, tuple(tgt), tuple(feats), k))
            if found:
                found.sort(key=lambda o: (-float(weights @ np.array(o.features)), o.tgt))
                options[span] = found[:cap]
    for i, word in enumerate(sentence):
        span = (i, i + 1)
        if span not in options:
            feats = _static_features(layout, span, (word,), None, None, floor)
            options[span] = [TranslationOption(span, (word,), tuple(feats), None)]
    return options


@dataclass
class Hypothesis:
    coverage: int
    last_end: int
    lm_states: tuple
    score: float
    future: float
    target: tuple
    parent: "Hypothesis | None"
    option: TranslationOption | None
    jump: int
    lm_scores: tuple  # per-LM log10 contribution of this expansion

    def sort_key(self):
        return (-(self.score + self.future), self.target)


@dataclass
class DecodeResult:
    target: tuple
    features: np.ndarray
    score: float


def _lm_extend(lm, state, words):
    """Score words given an LM state; returns (log10 sum, new state)."""
    total = 0.0
    for word in words:
        mapped = word if word in lm.vocab else UNK
        total += lm.log10_prob(mapped, state)
        if lm.order > 1:
            state = (state + (mapped,))[-(lm.order - 1):]
    return total, state


def _future_costs(sentence, options, weights, lms, layout):
    """Per-span best weighted option score (LM part estimated by unigram
    scores), combined over splits by dynamic programming."""
    n = len(sentence)
    lm_weights = [weights[layout.lm_feature(k)] for k in range(len(lms))]
    direct = {}
    for span, opts in options.items():
        best = -math.inf
        for opt in opts:
            score = float(weights @ np.asarray(opt.features))
            for w_lm, lm in zip(lm_weights, lms):
                score += w_lm * sum(lm.unigram_log10(w) for w in opt.tgt)
            best = max(best, score)
        direct[span] = best
    fc = [[-math.inf] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        fc[i][i] = 0.0
    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            best = direct.get((i, j), -math.inf)
            for k in range(i + 1, j):
                best = max(best, fc[i][k] + fc[k][j])
            fc[i][j] = best
    return fc


def _coverage_future(fc, coverage, n):
    """Sum of future costs over maximal uncovered runs."""
    total = 0.0
    i = 0
    while i < n:
        if coverage & (1 << i):
            i += 1
            continue
        j = i
        while j < n and not (coverage & (1 << j)):
            j += 1
        total += fc[i][j]
        i = j
    return total


def _reconstruct_features(hyp: Hypothesis, layout: FeatureLayout) -> np.ndarray:
    feats = np.zeros(layout.dimension)
    node = hyp
    while node.parent is not None:
        feats += np.asarray(node.option.features)
        feats[layout.distortion] += node.jump
        for k, s in enumerate(node.lm_scores):
            feats[layout.lm_feature(k)] += s
        node = node.parent
    return feats


def decode(sentence, options, weights, lms, stack_size: int = 100,
           distortion_limit: int = 6, layout: FeatureLayout | None = None,
           nbest_size: int = 1):
    """Beam-stack decoding; returns the n-best list of DecodeResult.

    stack_size <= 0 disables pruning (exhaustive up to recombination).
    Ties break on (score, target string) so decoding is deterministic.
    """
    sentence = tuple(sentence)
    if not sentence:
        raise ValueError("cannot decode an empty sentence")
    if layout is None:
        layout = FeatureLayout(1, len(lms))
    weights = np.asarray(weights, dtype=float)
    n = len(sentence)
    fc = _future_costs(sentence, options, weights, lms, layout)
    lm_weights = [float(weights[layout.lm_feature(k)]) for k in range(len(lms))]
    dist_weight = float(weights[layout.distortion])

    # per-span expansion plan with the static feature part pre-weighted
    plan = []
    for span, opts in options.items():
        start, end = span
        mask = ((1 << (end - start)) - 1) << start
        weighted = [float(weights @ np.asarray(o.features)) for o in opts]
        plan.append((start, end, mask, opts, weighted))

    memo: dict = {}

    def phrase_lm(k, state, words):
        key = (k, state, words)
        hit = memo.get(key)
        if hit is None:
            hit = _lm_extend(lms[k], state, words)
            memo[key] = hit
        return hit

    init_states = tuple((BOS,) if lm.order > 1 else () for lm in lms)
    initial = Hypothesis(0, 0, init_states, 0.0, _coverage_future(fc, 0, n), (),
                         None, None, 0, ())
    stacks: list[dict] = [dict() for _ in range(n + 1)]
    stacks[0][(0, 0, init_states)] = initial
    full_mask = (1 << n) - 1
    for covered in range(n):
        stack = stacks[covered]
        if not stack:
            continue
        hyps = sorted(stack.values(), key=Hypothesis.sort_key)
        if stack_size > 0:
            hyps = hyps[:stack_size]
        for hyp in hyps:
            for start, end, mask, opts, weighted in plan:
                if hyp.coverage & mask:
                    continue
                jump = abs(start - hyp.last_end)
                if distortion_limit >= 0 and jump > distortion_limit:
                    continue
                coverage = hyp.coverage | mask
                complete = coverage == full_mask
                count = covered + (end - start)
                base = hyp.score + dist_weight * jump
                target_stack = stacks[count]
                for opt, w_static in zip(opts, weighted):
                    score = base + w_static
                    new_states = []
                    lm_scores = []
                    for k in range(len(lms)):
                        lm_delta, state = phrase_lm(k, hyp.lm_states[k], opt.tgt)
                        if complete:
                            end_delta, _ = phrase_lm(k, state, (EOS,))
                            lm_delta += end_delta
                        lm_scores.append(lm_delta)
                        new_states.append(state)
                        score += lm_weights[k] * lm_delta
                    new_states = tuple(new_states)
                    key = (coverage, end, new_states)
                    incumbent = target_stack.get(key)
                    if incumbent is not None and incumbent.score > score:
                        continue
                    target = hyp.target + opt.tgt
                    if (
                        incumbent is None
                        or score > incumbent.score
                        or (score == incumbent.score and target < incumbent.target)
                    ):
                        target_stack[key] = Hypothesis(
                            coverage, end, new_states, score,
                            _coverage_future(fc, coverage, n), target,
                            hyp, opt, jump, tuple(lm_scores),
                        )
    final = stacks[n]
    if not final:
        raise RuntimeError("no complete hypothesis")
    ranked = sorted(final.values(), key=lambda h: (-h.score, h.target))
    results = []
    seen = set()
    for hyp in ranked:
        if hyp.target in seen:
            continue
        seen.add(hyp.target)
        results.append(DecodeResult(hyp.target, _reconstruct_features(hyp, layout), hyp.score))
        if len(results) >= nbest_size:
            break
    return results


def decode_best(sentence, options, weights, lms, **kwargs) -> DecodeResult:
    return decode(sentence, options, weights, lms, nbest_size=1, **kwargs)[0]


NBEST_SEPARATOR = " ||| "


def format_nbest(sent_id, results, layout: FeatureLayout):
    """`sent_id ||| target tokens ||| name=value ... ||| total` lines."""
    lines = []
    names = layout.names()
    for res in results:
        feats = " ".join(f"{n}={v:.10g}" for n, v in zip(names, res.features))
        lines.append(
            NBEST_SEPARATOR.join(
                [str(sent_id), " ".join(res.target), feats, f"{res.score:.10g}"]
            )
        )
    return lines
