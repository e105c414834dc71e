import random

import pytest

import traitmt.align as align_mod
from traitmt.align import (
    GROW_DIAG_FINAL_AND,
    INTERSECTION,
    NULL_TOKEN,
    AlignmentMatrix,
    PhraseTable,
    build_phrase_table,
    extract_phrases,
    ibm1_em,
    read_phrase_table,
    score_phrases,
    symmetrize,
    train_ibm1,
    viterbi_align,
    write_phrase_table,
    LexicalTable,
)

CANONICAL = [(("a", "b"), ("x", "y")), (("a",), ("x",))]


class TestIbm1:
    def test_canonical_corpus_converges(self):
        # the by-hand EM walk on this corpus is done without the null word
        table, history = ibm1_em(CANONICAL, iterations=30, use_null=False)
        assert table.prob("x", "a") >= 0.99
        for prev, cur in zip(history, history[1:]):
            assert cur >= prev - 1e-12

    def test_single_pair_after_one_iteration(self):
        table = train_ibm1([(("a",), ("x",))], iterations=1)
        assert table.prob("x", "a") == pytest.approx(1.0)
        # the null word also explains x completely after one round
        assert table.null_prob("x") == pytest.approx(1.0)

    def test_log_likelihood_monotone_with_null(self):
        rng = random.Random(0)
        words_s = [f"s{i}" for i in range(12)]
        words_t = [f"t{i}" for i in range(12)]
        pairs = []
        for _ in range(60):
            n = rng.randint(1, 8)
            pairs.append(
                (
                    tuple(rng.choice(words_s) for _ in range(n)),
                    tuple(rng.choice(words_t) for _ in range(n)),
                )
            )
        _, history = ibm1_em(pairs, iterations=12)
        assert len(history) == 12
        for prev, cur in zip(history, history[1:]):
            assert cur >= prev - 1e-12

    def test_per_source_normalization(self):
        table, _ = ibm1_em(CANONICAL, iterations=5)
        for source, dist in table.probs.items():
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9), source

    def test_dense_and_sparse_paths_agree(self, monkeypatch):
        rng = random.Random(1)
        pairs = [
            (
                tuple(rng.choice("abcde") for _ in range(rng.randint(1, 5))),
                tuple(rng.choice("vwxyz") for _ in range(rng.randint(1, 5))),
            )
            for _ in range(30)
        ]
        dense_table, dense_hist = ibm1_em(pairs, iterations=6)
        monkeypatch.setattr(align_mod, "_DENSE_LIMIT", 0)
        sparse_table, sparse_hist = ibm1_em(pairs, iterations=6)
        for a, b in zip(dense_hist, sparse_hist):
            assert a == pytest.approx(b, abs=1e-9)
        for source, dist in dense_table.probs.items():
            for target, p in dist.items():
                assert sparse_table.prob(target, source) == pytest.approx(p, abs=1e-9)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            ibm1_em([])


class TestViterbi:
    def test_obvious_alignment(self):
        pairs = [(("der", "hund"), ("the", "dog")), (("der",), ("the",)), (("hund",), ("dog",))]
        table = train_ibm1(pairs, iterations=10)
        matrix = viterbi_align(table, ("der", "hund"), ("the", "dog"))
        assert matrix.links == frozenset({(0, 0), (1, 1)})

    def test_bounds_validated(self):
        with pytest.raises(ValueError):
            AlignmentMatrix(frozenset({(2, 0)}), 2, 1)


class TestSymmetrize:
    def test_identical_inputs(self):
        a = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 2)
        for heuristic in (INTERSECTION, GROW_DIAG_FINAL_AND):
            assert symmetrize(a, a, heuristic).links == a.links

    def test_disjoint_intersection_empty(self):
        fwd = AlignmentMatrix(frozenset({(0, 0)}), 2, 2)
        rev = AlignmentMatrix(frozenset({(1, 1)}), 2, 2)
        assert symmetrize(fwd, rev, INTERSECTION).links == frozenset()

    def test_three_by_three_hand_trace(self):
        # intersection {(0,0),(1,1)}; grow-diag pulls in (2,1) (source 2
        # unaligned, diagonal neighbour of (1,1)) and then (2,2) (target 2
        # unaligned, neighbour of (2,1)); final-and adds nothing
        fwd = AlignmentMatrix(frozenset({(0, 0), (1, 1), (2, 1)}), 3, 3)
        rev = AlignmentMatrix(frozenset({(0, 0), (1, 1), (2, 2)}), 3, 3)
        result = symmetrize(fwd, rev, GROW_DIAG_FINAL_AND)
        assert result.links == frozenset({(0, 0), (1, 1), (2, 1), (2, 2)})

    def test_final_and_rescues_isolated_links(self):
        # no intersection; final-and adds links whose both ends are free
        fwd = AlignmentMatrix(frozenset({(0, 0)}), 2, 2)
        rev = AlignmentMatrix(frozenset({(1, 1)}), 2, 2)
        result = symmetrize(fwd, rev, GROW_DIAG_FINAL_AND)
        assert result.links == frozenset({(0, 0), (1, 1)})

    def test_between_intersection_and_union(self):
        rng = random.Random(2)
        for _ in range(50):
            n, m = rng.randint(1, 5), rng.randint(1, 5)
            mk = lambda: frozenset(
                (rng.randrange(n), rng.randrange(m)) for _ in range(rng.randint(0, 6))
            )
            fwd = AlignmentMatrix(mk(), n, m)
            rev = AlignmentMatrix(mk(), n, m)
            result = symmetrize(fwd, rev, GROW_DIAG_FINAL_AND)
            assert result.links >= (fwd.links & rev.links)
            assert result.links <= (fwd.links | rev.links)

    def test_mismatched_lengths_rejected(self):
        fwd = AlignmentMatrix(frozenset(), 2, 2)
        rev = AlignmentMatrix(frozenset(), 2, 3)
        with pytest.raises(ValueError):
            symmetrize(fwd, rev)


def oracle_extract(n, m, links, max_len):
    """Naive consistency predicate over every pair of spans."""
    out = set()
    for i1 in range(n):
        for i2 in range(i1, min(n, i1 + max_len)):
            for j1 in range(m):
                for j2 in range(j1, min(m, j1 + max_len)):
                    inside = [(i, j) for i, j in links if i1 <= i <= i2 and j1 <= j <= j2]
                    if not inside:
                        continue
                    src_ok = all(j1 <= j <= j2 for i, j in links if i1 <= i <= i2)
                    tgt_ok = all(i1 <= i <= i2 for i, j in links if j1 <= j <= j2)
                    if src_ok and tgt_ok:
                        out.add((i1, i2, j1, j2))
    return out


class TestExtractPhrases:
    def spans(self, phrase_pairs):
        return {pp.src_span + pp.tgt_span for pp in phrase_pairs}

    def test_monotone_two_words(self):
        alignment = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 2)
        pairs = extract_phrases(("w1", "w2"), ("v1", "v2"), alignment)
        as_tokens = {(pp.src, pp.tgt) for pp in pairs}
        assert as_tokens == {
            (("w1",), ("v1",)),
            (("w2",), ("v2",)),
            (("w1", "w2"), ("v1", "v2")),
        }

    def test_crossing_link_blocks_span(self):
        alignment = AlignmentMatrix(frozenset({(0, 1), (1, 0)}), 2, 2)
        pairs = extract_phrases(("w1", "w2"), ("v1", "v2"), alignment)
        spans = self.spans(pairs)
        assert (0, 0, 0, 0) not in spans
        assert spans == {(0, 0, 1, 1), (1, 1, 0, 0), (0, 1, 0, 1)}

    def test_max_len_one(self):
        alignment = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 2)
        pairs = extract_phrases(("w1", "w2"), ("v1", "v2"), alignment, max_len=1)
        assert all(len(pp.src) == 1 and len(pp.tgt) == 1 for pp in pairs)

    def test_matches_brute_force_oracle(self):
        rng = random.Random(3)
        for _ in range(300):
            n, m = rng.randint(1, 6), rng.randint(1, 6)
            links = frozenset(
                (rng.randrange(n), rng.randrange(m)) for _ in range(rng.randint(0, 8))
            )
            alignment = AlignmentMatrix(links, n, m)
            src = tuple(f"s{i}" for i in range(n))
            tgt = tuple(f"t{j}" for j in range(m))
            got = self.spans(extract_phrases(src, tgt, alignment, max_len=4))
            assert got == oracle_extract(n, m, links, 4)


class TestScorePhrases:
    def uniform_table(self, words):
        return LexicalTable({w: {v: 0.5 for v in words} for w in [NULL_TOKEN] + list(words)})

    def test_relative_frequency(self):
        alignment = AlignmentMatrix(frozenset({(0, 0)}), 1, 1)
        extracted = []
        for tgt in ("x", "x", "x", "y"):
            extracted.extend(extract_phrases(("s",), (tgt,), alignment))
        lex = LexicalTable({"s": {"x": 0.7, "y": 0.3}, NULL_TOKEN: {"x": 0.5, "y": 0.5}})
        lex_rev = LexicalTable({"x": {"s": 1.0}, "y": {"s": 1.0}, NULL_TOKEN: {"s": 1.0}})
        table = score_phrases(extracted, lex, lex_rev)
        phi_fwd = table.entries[("s",)][("x",)][0]
        assert phi_fwd == pytest.approx(0.75)

    def test_unique_pair_scores_one(self):
        alignment = AlignmentMatrix(frozenset({(0, 0)}), 1, 1)
        extracted = extract_phrases(("a",), ("x",), alignment)
        lex = LexicalTable({"a": {"x": 0.8}, NULL_TOKEN: {"x": 0.2}})
        lex_rev = LexicalTable({"x": {"a": 0.9}, NULL_TOKEN: {"a": 0.1}})
        table = score_phrases(extracted, lex, lex_rev)
        phi_fwd, lex_f, phi_rev, lex_r = table.entries[("a",)][("x",)]
        assert phi_fwd == 1.0 and phi_rev == 1.0
        # single 1:1 link: lexical weight equals the table probability
        assert lex_f == pytest.approx(0.8)
        assert lex_r == pytest.approx(0.9)

    def test_conditional_normalization_both_directions(self):
        rng = random.Random(4)
        extracted = []
        alignment = AlignmentMatrix(frozenset({(0, 0)}), 1, 1)
        for _ in range(200):
            s = rng.choice(("s1", "s2", "s3"))
            t = rng.choice(("t1", "t2"))
            extracted.extend(extract_phrases((s,), (t,), alignment))
        words = ("s1", "s2", "s3", "t1", "t2")
        table = score_phrases(extracted, self.uniform_table(words), self.uniform_table(words))
        by_src = {}
        by_tgt = {}
        for src, row in table.entries.items():
            for tgt, (pf, _, pr, _) in row.items():
                by_src[src] = by_src.get(src, 0.0) + pf
                by_tgt[tgt] = by_tgt.get(tgt, 0.0) + pr
        for total in list(by_src.values()) + list(by_tgt.values()):
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_scores_in_unit_interval(self):
        table, _, _ = build_phrase_table(
            [(("a", "b"), ("x", "y")), (("b", "c"), ("y", "z")), (("a",), ("x",))],
            iterations=5,
        )
        for row in table.entries.values():
            for scores in row.values():
                for s in scores:
                    assert 0.0 < s <= 1.0

    def test_empty_extraction_rejected(self):
        lex = LexicalTable({})
        with pytest.raises(ValueError):
            score_phrases([], lex, lex)


class TestPhraseTableIo:
    def test_round_trip(self, tmp_path):
        table, _, _ = build_phrase_table(
            [(("a", "b"), ("x", "y")), (("a",), ("x",)), (("b",), ("y",))], iterations=5
        )
        path = tmp_path / "pt.txt"
        write_phrase_table(table, path)
        loaded = read_phrase_table(path)
        assert loaded.entries.keys() == table.entries.keys()
        for src in table.entries:
            assert loaded.entries[src].keys() == table.entries[src].keys()
            for tgt, scores in table.entries[src].items():
                for a, b in zip(loaded.entries[src][tgt], scores):
                    assert a == pytest.approx(b, abs=1e-12)

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "pt.txt"
        path.write_text("a ||| x\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_phrase_table(path)
