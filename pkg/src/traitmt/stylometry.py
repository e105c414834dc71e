"""Text to feature vectors: POS tagging, ~1000-token chunking, function-word
and POS-trigram features normalized by chunk length.

The tagger is a deliberately simple baseline (per-token majority tag with a
suffix fallback); pre-tagged input in the one-sentence-per-line token_TAG
format is accepted everywhere a tagger would run.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

ORIGINAL = "original"
HUMAN_TRANSLATED = "human"


def machine_translated(system_id: str) -> str:
    return f"mt:{system_id}"


BOUNDARY_START = "<S>"
BOUNDARY_END = "</S>"


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"token/tag length mismatch: {len(self.tokens)} vs {len(self.tags)}"
            )

    def __len__(self):
        return len(self.tokens)


class TaggerModel:
    """Most-frequent-tag baseline with a data-driven suffix fallback.

    Each token gets the tag it carried most often in training; unseen tokens
    fall back to the majority tag of the longest matching training suffix
    (length 3, then 2, then 1), then to the global majority tag.  All
    tie-breaks are lexicographic on the tag, so tagging is deterministic.
    """

    def __init__(self, max_suffix: int = 3):
        self.max_suffix = max_suffix
        self.token_tags: dict[str, Counter] = {}
        self.suffix_tags: dict[str, Counter] = {}
        self.global_tags: Counter = Counter()

    @property
    def trained(self) -> bool:
        return bool(self.global_tags)

    def train(self, sentences) -> "TaggerModel":
        for sent in sentences:
            for token, tag in zip(sent.tokens, sent.tags):
                self.token_tags.setdefault(token, Counter())[tag] += 1
                self.global_tags[tag] += 1
                for n in range(1, self.max_suffix + 1):
                    if len(token) > n:
                        self.suffix_tags.setdefault(token[-n:], Counter())[tag] += 1
        return self

    @staticmethod
    def _argmax(counter: Counter) -> str:
        return min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def tag_token(self, token: str) -> str:
        if token in self.token_tags:
            return self._argmax(self.token_tags[token])
        for n in range(self.max_suffix, 0, -1):
            suffix = token[-n:]
            if len(token) > n and suffix in self.suffix_tags:
                return self._argmax(self.suffix_tags[suffix])
        return self._argmax(self.global_tags)

    def tag(self, tokens) -> TaggedSentence:
        if not self.trained:
            raise RuntimeError("tagger model is untrained")
        toks = tuple(tokens)
        return TaggedSentence(toks, tuple(self.tag_token(t) for t in toks))


def tag_sentence(sentence, model: TaggerModel | None = None) -> TaggedSentence:
    """Tag a tokenized sentence; pre-tagged input passes through unchanged."""
    if isinstance(sentence, TaggedSentence):
        return sentence
    if model is None:
        raise RuntimeError("untagged input needs a trained tagger model")
    tokens = getattr(sentence, "tokens", sentence)
    return model.tag(tokens)


def parse_tagged_line(line: str) -> TaggedSentence:
    """Parse one `token_TAG token_TAG ...` line (tag after the last '_')."""
    tokens, tags = [], []
    for item in line.split():
        word, sep, tag = item.rpartition("_")
        if not sep or not word or not tag:
            raise ValueError(f"bad token_TAG item {item!r}")
        tokens.append(word)
        tags.append(tag)
    return TaggedSentence(tuple(tokens), tuple(tags))


def format_tagged_line(sent: TaggedSentence) -> str:
    return " ".join(f"{tok}_{tag}" for tok, tag in zip(sent.tokens, sent.tags))


def read_tagged_file(path):
    with open(path, encoding="utf-8") as fh:
        return [parse_tagged_line(line) for line in fh if line.strip()]


@dataclass
class Chunk:
    sentences: list[TaggedSentence]
    label: str
    status: str
    language: str

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)


def chunk_corpus(sentences, target: int = 1000, min_fraction: float = 0.5,
                 label: str = "U", status: str = ORIGINAL, language: str = "en"):
    """Greedy chunking respecting sentence boundaries.

    A chunk closes at the first sentence boundary at or past `target`
    cumulative tokens; a trailing chunk under target*min_fraction is
    discarded.  No sentence is split or repeated.
    """
    chunks: list[Chunk] = []
    current: list[TaggedSentence] = []
    count = 0
    for sent in sentences:
        current.append(sent)
        count += len(sent)
        if count >= target:
            chunks.append(Chunk(current, label, status, language))
            current, count = [], 0
    if current and count >= target * min_fraction:
        chunks.append(Chunk(current, label, status, language))
    return chunks


@dataclass(frozen=True)
class FeatureSpace:
    function_words: tuple[str, ...]
    pos_trigrams: tuple[tuple[str, str, str], ...]

    @property
    def dimension(self) -> int:
        return len(self.function_words) + len(self.pos_trigrams)

    @property
    def fw_dimension(self) -> int:
        return len(self.function_words)

    def feature_name(self, index: int) -> str:
        if index < len(self.function_words):
            return f"fw:{self.function_words[index]}"
        tri = self.pos_trigrams[index - len(self.function_words)]
        return "pos:" + "+".join(tri)

    def names(self):
        return [self.feature_name(i) for i in range(self.dimension)]


def _padded_trigrams(tags):
    padded = (BOUNDARY_START, BOUNDARY_START) + tuple(tags) + (BOUNDARY_END, BOUNDARY_END)
    return [padded[i: i + 3] for i in range(len(padded) - 2)]


def build_feature_space(chunks, fw_list, k: int = 1000) -> FeatureSpace:
    """Function words (verbatim, lowercased, deduplicated) plus the top-k
    corpus-frequency POS trigrams with lexicographic tie-break."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not chunks:
        raise ValueError("need at least one chunk")
    if not fw_list:
        raise ValueError("function-word list must be non-empty")
    fw_seen = []
    seen = set()
    for w in fw_list:
        lw = w.lower()
        if lw not in seen:
            seen.add(lw)
            fw_seen.append(lw)
    counts: Counter = Counter()
    for chunk in chunks:
        for sent in chunk.sentences:
            counts.update(_padded_trigrams(sent.tags))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    trigrams = tuple(t for t, _ in ranked[:k])
    return FeatureSpace(tuple(fw_seen), trigrams)


@dataclass
class FeatureVector:
    values: dict  # feature index -> count / token_count
    label: str
    status: str

    def dense(self, dimension: int):
        import numpy as np

        out = np.zeros(dimension)
        for i, v in self.values.items():
            out[i] = v
        return out


def vectorize_chunk(chunk: Chunk, space: FeatureSpace) -> FeatureVector:
    """Raw feature counts divided by the chunk's token count.

    Function-word matching is case-insensitive; trigram counting uses the
    same per-sentence boundary padding as build_feature_space.
    """
    n = chunk.token_count
    if n == 0:
        raise ValueError("cannot vectorize an empty chunk")
    fw_index = {w: i for i, w in enumerate(space.function_words)}
    tri_index = {t: len(space.function_words) + i for i, t in enumerate(space.pos_trigrams)}
    counts: dict[int, float] = {}
    for sent in chunk.sentences:
        for token in sent.tokens:
            idx = fw_index.get(token.lower())
            if idx is not None:
                counts[idx] = counts.get(idx, 0.0) + 1.0
        for tri in _padded_trigrams(sent.tags):
            idx = tri_index.get(tri)
            if idx is not None:
                counts[idx] = counts.get(idx, 0.0) + 1.0
    return FeatureVector({i: c / n for i, c in counts.items()}, chunk.label, chunk.status)


def load_function_words(path):
    """One word per line, UTF-8, '#' comments."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.split("#", 1)[0].strip()
            if word:
                words.append(word)
    return words


def default_function_words(lang: str):
    """Vendored per-language lists (en, fr, de)."""
    name = f"fw_{lang}.txt"
    ref = resources.files("traitmt.data").joinpath(name)
    if not ref.is_file():
        raise ValueError(f"no vendored function-word list for language {lang!r}")
    words = []
    for line in ref.read_text(encoding="utf-8").splitlines():
        word = line.split("#", 1)[0].strip()
        if word:
            words.append(word)
    return words


def write_vectors(vectors, space: FeatureSpace, path) -> None:
    """Sparse text export: `#index<TAB>name` header, then one vector per
    line as `label<TAB>status<TAB>idx:value ...` (indices ascending)."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(space.dimension):
            fh.write(f"#{i}\t{space.feature_name(i)}\n")
        for vec in vectors:
            cells = " ".join(f"{i}:{vec.values[i]:.12g}" for i in sorted(vec.values))
            fh.write(f"{vec.label}\t{vec.status}\t{cells}\n")


def read_vectors(path):
    """Inverse of write_vectors; returns (vectors, names)."""
    names: list[str] = []
    vectors: list[FeatureVector] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                idx_s, name = line[1:].split("\t")
                if int(idx_s) != len(names):
                    raise ValueError(f"out-of-order feature header at index {idx_s}")
                names.append(name)
                continue
            label, status, cells = line.split("\t")
            values = {}
            if cells:
                for cell in cells.split(" "):
                    i_s, v_s = cell.split(":")
                    values[int(i_s)] = float(v_s)
            vectors.append(FeatureVector(values, label, status))
    return vectors, names
