import datetime
import random

import pytest

from traitmt.corpus import (
    AnnotatedSentencePair,
    Corpus,
    CorpusFormatError,
    clean_corpus,
    find_duplicate_sources,
    load_corpus,
    normalize_punctuation,
    save_corpus,
    tokenize,
)

HEADER = "src_lang\ttgt_lang\tspeaker_id\tgender\tage\tsession_date\tsource_text\ttarget_text"


def make_pair(src="hello world", tgt="bonjour monde", gender="M", speaker="s1"):
    return AnnotatedSentencePair(
        source_text=src,
        target_text=tgt,
        speaker_id=speaker,
        original_language="en",
        session_date=datetime.date(2005, 6, 1),
        gender=gender,
        age=45,
    )


class TestLoadCorpus:
    def test_well_formed_three_rows(self, tmp_path):
        p = tmp_path / "c.tsv"
        rows = [
            "en\tfr\ts1\tM\t45\t2005-06-01\thello\tbonjour",
            "en\tfr\ts2\tF\t\t2005-06-02\tbye\tau revoir",
            "en\tfr\ts1\tM\t45\t2005-06-03\tyes\toui",
        ]
        p.write_text(HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
        corpus, errors = load_corpus(p)
        assert errors == []
        assert len(corpus) == 3
        assert corpus.source_lang == "en" and corpus.target_lang == "fr"
        assert corpus.pairs[1].age is None
        assert corpus.pairs[0].session_date == datetime.date(2005, 6, 1)

    def test_invalid_gender_is_row_level_error(self, tmp_path):
        p = tmp_path / "c.tsv"
        rows = [
            "en\tfr\ts1\tX\t45\t2005-06-01\thello\tbonjour",
            "en\tfr\ts2\tF\t30\t2005-06-02\tbye\tau revoir",
        ]
        p.write_text(HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
        corpus, errors = load_corpus(p)
        assert len(corpus) == 1
        assert len(errors) == 1
        assert errors[0].line_number == 2
        assert "gender" in errors[0].message

    def test_header_only_gives_empty_corpus(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text(HEADER + "\n", encoding="utf-8")
        corpus, errors = load_corpus(p)
        assert len(corpus) == 0 and errors == []

    def test_header_mismatch_raises(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("a\tb\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError):
            load_corpus(p)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_corpus(tmp_path / "nope.tsv")

    def test_invalid_date_is_row_level_error(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text(HEADER + "\nen\tfr\ts1\tM\t45\tnot-a-date\thello\tbonjour\n", encoding="utf-8")
        corpus, errors = load_corpus(p)
        assert len(corpus) == 0 and len(errors) == 1

    def test_round_trip_identity(self, tmp_path):
        pairs = [
            make_pair("one two", "un deux", "M", "s1"),
            make_pair("three", "trois", "F", "s2"),
            make_pair("four four", "quatre", "U", "s3"),
        ]
        corpus = Corpus(pairs, "en", "fr")
        p = tmp_path / "c.tsv"
        save_corpus(corpus, p)
        loaded, errors = load_corpus(p)
        assert errors == []
        assert loaded.pairs == corpus.pairs
        assert (loaded.source_lang, loaded.target_lang) == ("en", "fr")


class TestCleanCorpus:
    def test_empty_target_removed(self):
        c = Corpus([make_pair(tgt="")], "en", "fr")
        cleaned, report = clean_corpus(c)
        assert len(cleaned) == 0
        assert report.removed_empty == 1

    def test_long_side_removed(self):
        c = Corpus([make_pair(src=" ".join(["w"] * 81), tgt=" ".join(["w"] * 10))], "en", "fr")
        cleaned, report = clean_corpus(c, max_len=80)
        assert len(cleaned) == 0
        assert report.removed_long == 1

    def test_balanced_pair_retained(self):
        c = Corpus([make_pair(src=" ".join(["w"] * 10), tgt=" ".join(["v"] * 10))], "en", "fr")
        cleaned, report = clean_corpus(c)
        assert len(cleaned) == 1 and report.kept == 1

    def test_ratio_removal(self):
        c = Corpus([make_pair(src=" ".join(["w"] * 30), tgt="v w x")], "en", "fr")
        cleaned, report = clean_corpus(c, max_ratio=9.0)
        assert len(cleaned) == 0 and report.removed_ratio == 1

    def test_idempotent(self):
        rng = random.Random(7)
        pairs = []
        for _ in range(200):
            ns = rng.randint(0, 100)
            nt = rng.randint(0, 100)
            pairs.append(make_pair(src=" ".join(["w"] * ns), tgt=" ".join(["v"] * nt)))
        c = Corpus(pairs, "en", "fr")
        once, _ = clean_corpus(c)
        twice, report = clean_corpus(once)
        assert twice.pairs == once.pairs
        assert report.removed_empty == report.removed_long == report.removed_ratio == 0


class TestNormalizePunctuation:
    def test_curly_quotes(self):
        assert normalize_punctuation("“a”") == '"a"'

    def test_ascii_unchanged(self):
        s = 'plain "ascii" text - with hyphen...'
        assert normalize_punctuation(s) == s

    def test_ellipsis(self):
        assert normalize_punctuation("x… y") == "x... y"

    def test_dashes_and_nbsp(self):
        assert normalize_punctuation("a–b—c d") == "a-b-c d"

    def test_idempotent(self):
        rng = random.Random(3)
        chars = 'ab "\'-“”‘’–—… .,'
        for _ in range(100):
            s = "".join(rng.choice(chars) for _ in range(30))
            once = normalize_punctuation(s)
            assert normalize_punctuation(once) == once


class TestTokenize:
    def test_basic_sentence(self):
        assert list(tokenize("Hello, world.").tokens) == ["Hello", ",", "world", "."]

    def test_french_elision(self):
        assert list(tokenize("l'homme", lang="fr").tokens) == ["l'", "homme"]

    def test_elision_only_in_french(self):
        assert list(tokenize("l'homme", lang="en").tokens) == ["l'homme"]

    def test_empty_string(self):
        assert tokenize("").tokens == ()

    def test_ellipsis_kept_whole(self):
        assert list(tokenize("wait... what").tokens) == ["wait", "...", "what"]

    def test_no_empty_tokens_and_fixpoint(self):
        rng = random.Random(11)
        pieces = ["Hello,", "world.", "(l'air)", "qu'est-ce", '"quote"', "...", "a.b", "x!?"]
        for lang in ("en", "fr"):
            for _ in range(100):
                s = " ".join(rng.choice(pieces) for _ in range(rng.randint(0, 6)))
                toks = tokenize(s, lang).tokens
                assert all(t != "" for t in toks)
                again = tokenize(" ".join(toks), lang).tokens
                assert again == toks


class TestDuplicateSources:
    def test_flags_repeated_source(self):
        c = Corpus([make_pair("same src"), make_pair("other"), make_pair("same src")], "en", "fr")
        assert find_duplicate_sources(c) == [2]
