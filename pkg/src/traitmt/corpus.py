"""Speaker-annotated parallel corpora: data model, TSV I/O and preprocessing.

A corpus is an ordered list of sentence pairs, each carrying speaker id,
gender, age, original language and session date.  Preprocessing covers
punctuation normalization, rule-based tokenization and the usual cleaning
pass (empty / over-long / badly misaligned pairs).
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field, replace

GENDERS = ("M", "F", "U")

TSV_COLUMNS = (
    "src_lang",
    "tgt_lang",
    "speaker_id",
    "gender",
    "age",
    "session_date",
    "source_text",
    "target_text",
)


class CorpusFormatError(Exception):
    """Raised when a corpus file cannot be parsed at all (missing file body,
    bad header); row-level problems are reported as RowError values instead."""


@dataclass(frozen=True)
class AnnotatedSentencePair:
    source_text: str
    target_text: str
    speaker_id: str
    original_language: str
    session_date: datetime.date
    gender: str = "U"
    age: int | None = None

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}, got {self.gender!r}")


@dataclass
class Corpus:
    pairs: list[AnnotatedSentencePair]
    source_lang: str
    target_lang: str

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class TokenizedSentence:
    tokens: tuple[str, ...]

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class RowError:
    line_number: int
    message: str


@dataclass
class CleanReport:
    """Per-reason removal counts from clean_corpus."""

    total: int = 0
    kept: int = 0
    removed_empty: int = 0
    removed_long: int = 0
    removed_ratio: int = 0
    removals: dict = field(default_factory=dict)

    def as_text(self) -> str:
        lines = [
            f"pairs total     {self.total}",
            f"pairs kept      {self.kept}",
            f"removed empty   {self.removed_empty}",
            f"removed long    {self.removed_long}",
            f"removed ratio   {self.removed_ratio}",
        ]
        return "\n".join(lines) + "\n"


def load_corpus(path, fmt: str = "tsv") -> tuple[Corpus, list[RowError]]:
    """Parse an annotated-corpus TSV file.

    Malformed rows are collected as RowError values (with the 1-based line
    number) rather than silently dropped.  Returns (corpus, errors).
    """
    if fmt != "tsv":
        raise CorpusFormatError(f"unknown corpus format {fmt!r}")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusFormatError(f"{path}: empty file, expected a header row")
    header = tuple(lines[0].split("\t"))
    if header != TSV_COLUMNS:
        raise CorpusFormatError(
            f"{path}: header mismatch, expected {list(TSV_COLUMNS)}, got {list(header)}"
        )
    pairs: list[AnnotatedSentencePair] = []
    errors: list[RowError] = []
    src_lang = tgt_lang = None
    for lineno, line in enumerate(lines[1:], start=2):
        cols = line.split("\t")
        if len(cols) != len(TSV_COLUMNS):
            errors.append(RowError(lineno, f"expected {len(TSV_COLUMNS)} columns, got {len(cols)}"))
            continue
        sl, tl, speaker, gender, age_s, date_s, src, tgt = cols
        if gender not in GENDERS:
            errors.append(RowError(lineno, f"invalid gender {gender!r}"))
            continue
        try:
            date = datetime.date.fromisoformat(date_s)
        except ValueError:
            errors.append(RowError(lineno, f"invalid session_date {date_s!r}"))
            continue
        age = None
        if age_s != "":
            try:
                age = int(age_s)
            except ValueError:
                errors.append(RowError(lineno, f"invalid age {age_s!r}"))
                continue
        if src_lang is None:
            src_lang, tgt_lang = sl, tl
        elif (sl, tl) != (src_lang, tgt_lang):
            errors.append(
                RowError(lineno, f"language pair {sl}-{tl} differs from {src_lang}-{tgt_lang}")
            )
            continue
        pairs.append(
            AnnotatedSentencePair(
                source_text=src,
                target_text=tgt,
                speaker_id=speaker,
                original_language=sl,
                session_date=date,
                gender=gender,
                age=age,
            )
        )
    if src_lang is None:
        src_lang, tgt_lang = "und", "und"
    return Corpus(pairs, src_lang, tgt_lang), errors


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus back to the TSV layout read by load_corpus."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(TSV_COLUMNS) + "\n")
        for p in corpus.pairs:
            for text in (p.source_text, p.target_text):
                if "\t" in text or "\n" in text:
                    raise CorpusFormatError("text fields must not contain tab or newline")
            fh.write(
                "\t".join(
                    [
                        corpus.source_lang,
                        corpus.target_lang,
                        p.speaker_id,
                        p.gender,
                        "" if p.age is None else str(p.age),
                        p.session_date.isoformat(),
                        p.source_text,
                        p.target_text,
                    ]
                )
                + "\n"
            )


def clean_corpus(corpus: Corpus, max_len: int = 80, max_ratio: float = 9.0) -> tuple[Corpus, CleanReport]:
    """Drop empty, over-long and badly misaligned pairs.

    Length is counted in whitespace tokens.  A pair is misaligned when the
    longer side exceeds max_ratio times the shorter one.  Idempotent.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if max_ratio <= 1:
        raise ValueError("max_ratio must be > 1")
    report = CleanReport(total=len(corpus.pairs))
    kept = []
    for p in corpus.pairs:
        ns, nt = len(p.source_text.split()), len(p.target_text.split())
        if ns == 0 or nt == 0:
            report.removed_empty += 1
        elif ns > max_len or nt > max_len:
            report.removed_long += 1
        elif max(ns, nt) > max_ratio * min(ns, nt):
            report.removed_ratio += 1
        else:
            kept.append(p)
    report.kept = len(kept)
    return Corpus(kept, corpus.source_lang, corpus.target_lang), report


# Punctuation normalization: curly quotes, dashes, ellipsis, nbsp.
_PUNCT_MAP = {
    "“": '"',
    "”": '"',
    "„": '"',
    "«": '"',
    "»": '"',
    "‘": "'",
    "’": "'",
    "‚": "'",
    "–": "-",
    "—": "-",
    "…": "...",
    " ": " ",
}
_PUNCT_RE = re.compile("|".join(re.escape(k) for k in _PUNCT_MAP))


def normalize_punctuation(s: str) -> str:
    return _PUNCT_RE.sub(lambda m: _PUNCT_MAP[m.group(0)], s)


# Characters split off word boundaries by the tokenizer.  The apostrophe is
# deliberately absent: it is handled by the elision rule only.
_SPLIT_PUNCT = set(".,;:!?()[]{}\"%")

# French elision prefixes, longest first ("l'homme" -> "l'", "homme").
_FR_ELISION = ("jusqu", "lorsqu", "puisqu", "quoiqu", "qu", "c", "d", "j", "l", "m", "n", "s", "t")
_FR_ELISION_RE = re.compile(
    r"^(" + "|".join(_FR_ELISION) + r")'(.+)$", re.IGNORECASE
)


def _split_leading(chunk: str) -> tuple[list[str], str]:
    out = []
    while chunk:
        m = re.match(r"^\.{2,}", chunk)
        if m:
            out.append(m.group(0))
            chunk = chunk[m.end():]
        elif chunk[0] in _SPLIT_PUNCT:
            out.append(chunk[0])
            chunk = chunk[1:]
        else:
            break
    return out, chunk


def _split_trailing(chunk: str) -> tuple[str, list[str]]:
    tail = []
    while chunk:
        m = re.search(r"\.{2,}$", chunk)
        if m:
            tail.append(m.group(0))
            chunk = chunk[: m.start()]
        elif chunk[-1] in _SPLIT_PUNCT:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        else:
            break
    tail.reverse()
    return chunk, tail


def tokenize(s: str, lang: str = "en") -> TokenizedSentence:
    """Rule-based tokenizer: whitespace split, then leading/trailing
    punctuation split off (dot runs kept together), then French elision."""
    tokens: list[str] = []
    for chunk in s.split():
        head, rest = _split_leading(chunk)
        tokens.extend(head)
        rest, tail = _split_trailing(rest)
        if rest:
            if lang == "fr":
                m = _FR_ELISION_RE.match(rest)
                if m:
                    tokens.append(m.group(1) + "'")
                    tokens.append(m.group(2))
                else:
                    tokens.append(rest)
            else:
                tokens.append(rest)
        tokens.extend(tail)
    return TokenizedSentence(tuple(tokens))


def find_duplicate_sources(corpus: Corpus) -> list[int]:
    """Indices of pairs whose source text already occurred earlier.

    The TSV layout only carries one-to-one alignments; repeated source lines
    are the symptom of a one-to-many alignment that slipped through.
    """
    seen: dict[str, int] = {}
    dups = []
    for i, p in enumerate(corpus.pairs):
        if p.source_text in seen:
            dups.append(i)
        else:
            seen[p.source_text] = i
    return dups


def pair_with(pair: AnnotatedSentencePair, **kwargs) -> AnnotatedSentencePair:
    """Copy a pair with some fields replaced (pairs are frozen)."""
    return replace(pair, **kwargs)
