"""Speaker gender resolution from multiple evidence sources.

Three automatic sources feed the resolution policy: a curated knowledge
base (trusted outright), a first-name service and an image service (both
probabilistic, confidence-filtered).  Remaining speakers fall back to
manual annotation.  The policy is:

  1. knowledge-base evidence wins when present;
  2. name and image service agreeing -> the agreed label;
  3. name and image service disagreeing -> Unknown (manual queue);
  4. exactly one of the two -> that label;
  5. manual annotation, if present;
  6. otherwise Unknown.

Live HTTP clients are out of scope; evidence is read from JSON-lines
fixture files.
"""

from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass

KNOWLEDGE_BASE = "knowledge_base"
NAME_SERVICE = "name_service"
IMAGE_SERVICE = "image_service"
MANUAL = "manual"
EVIDENCE_SOURCES = (KNOWLEDGE_BASE, NAME_SERVICE, IMAGE_SERVICE, MANUAL)

# provenance values additionally include the two-source agreement case
AGREEMENT = "agreement"
NO_PROVENANCE = "none"

DEFAULT_CONFIDENCE_THRESHOLD = 0.9


@dataclass(frozen=True)
class GenderEvidence:
    source: str
    label: str
    confidence: float

    def __post_init__(self):
        if self.source not in EVIDENCE_SOURCES:
            raise ValueError(f"unknown evidence source {self.source!r}")
        if self.label not in ("M", "F"):
            raise ValueError(f"evidence label must be M or F, got {self.label!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")
        if self.source in (KNOWLEDGE_BASE, MANUAL) and self.confidence != 1.0:
            raise ValueError(f"{self.source} evidence must carry confidence 1.0")


@dataclass
class SpeakerRecord:
    speaker_id: str
    name: str = ""
    country: str = ""
    birth_date: datetime.date | None = None
    resolved_gender: str = "U"
    provenance: str = NO_PROVENANCE

    def __post_init__(self):
        if self.resolved_gender != "U" and self.provenance == NO_PROVENANCE:
            raise ValueError("resolved gender requires a provenance")


@dataclass
class AuditReport:
    total: int
    class_counts: dict          # label -> count over resolved records
    provenance_counts: dict     # provenance -> count (includes "none")
    coverage: dict              # provenance -> percent of total
    accuracy: dict              # provenance -> percent vs gold, or None if no overlap

    def as_text(self) -> str:
        lines = [f"speakers total  {self.total}"]
        for label in ("M", "F"):
            lines.append(f"class {label}         {self.class_counts.get(label, 0)}")
        for prov in sorted(self.provenance_counts):
            acc = self.accuracy.get(prov)
            acc_s = "N/A" if acc is None else f"{acc:.1f}"
            lines.append(
                f"{prov:<15} n={self.provenance_counts[prov]:<6}"
                f" coverage={self.coverage[prov]:.1f} accuracy={acc_s}"
            )
        return "\n".join(lines) + "\n"


def filter_evidence(evidence, threshold: float = DEFAULT_CONFIDENCE_THRESHOLD):
    """Keep evidence with confidence >= threshold, order preserved."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0,1]")
    return [e for e in evidence if e.confidence >= threshold]


def _label_by_source(evidence) -> dict:
    """Collapse an evidence list to one label per source.

    A source whose entries disagree with each other is discarded, which
    keeps resolution independent of evidence order.
    """
    labels: dict[str, str] = {}
    dropped = set()
    for e in evidence:
        if e.source in dropped:
            continue
        if e.source in labels and labels[e.source] != e.label:
            del labels[e.source]
            dropped.add(e.source)
        elif e.source not in labels:
            labels[e.source] = e.label
    return labels


def resolve_gender(evidence) -> tuple[str, str]:
    """Apply the priority policy to confidence-filtered evidence.

    Returns (label, provenance) where label is M, F or U.
    """
    by_source = _label_by_source(evidence)
    if KNOWLEDGE_BASE in by_source:
        return by_source[KNOWLEDGE_BASE], KNOWLEDGE_BASE
    name = by_source.get(NAME_SERVICE)
    image = by_source.get(IMAGE_SERVICE)
    if name is not None and image is not None:
        if name == image:
            return name, AGREEMENT
        return "U", NO_PROVENANCE
    if name is not None:
        return name, NAME_SERVICE
    if image is not None:
        return image, IMAGE_SERVICE
    if MANUAL in by_source:
        return by_source[MANUAL], MANUAL
    return "U", NO_PROVENANCE


def compute_age(birth: datetime.date, session: datetime.date) -> int:
    """Whole completed years between birth and session date."""
    if session < birth:
        raise ValueError(f"session date {session} precedes birth date {birth}")
    years = session.year - birth.year
    if (session.month, session.day) < (birth.month, birth.day):
        years -= 1
    return years


def audit_resource(records, gold: dict) -> AuditReport:
    """Coverage / accuracy / class balance over resolved speaker records.

    Coverage groups records by winning provenance; accuracy compares the
    resolved label with the gold label over records present in gold.
    Provenances with no gold overlap get accuracy None (reported N/A).
    """
    records = list(records)
    if not records:
        raise ValueError("record list must be non-empty")
    if not gold:
        raise ValueError("gold map must be non-empty")
    total = len(records)
    class_counts: dict[str, int] = {}
    prov_counts: dict[str, int] = {}
    agree: dict[str, int] = {}
    overlap: dict[str, int] = {}
    for r in records:
        prov_counts[r.provenance] = prov_counts.get(r.provenance, 0) + 1
        if r.resolved_gender != "U":
            class_counts[r.resolved_gender] = class_counts.get(r.resolved_gender, 0) + 1
            if r.speaker_id in gold:
                overlap[r.provenance] = overlap.get(r.provenance, 0) + 1
                if gold[r.speaker_id] == r.resolved_gender:
                    agree[r.provenance] = agree.get(r.provenance, 0) + 1
    coverage = {p: 100.0 * n / total for p, n in prov_counts.items()}
    accuracy = {
        p: (100.0 * agree.get(p, 0) / overlap[p]) if p in overlap else None
        for p in prov_counts
    }
    return AuditReport(total, class_counts, prov_counts, coverage, accuracy)


def load_evidence_fixture(path) -> dict:
    """Read a JSON-lines evidence fixture.

    Each line holds one lookup result: an object with speaker_id, source,
    label and confidence.  Returns speaker_id -> list of GenderEvidence.
    """
    out: dict[str, list[GenderEvidence]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                ev = GenderEvidence(obj["source"], obj["label"], float(obj["confidence"]))
                out.setdefault(str(obj["speaker_id"]), []).append(ev)
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad evidence record: {exc}") from exc
    return out


def annotate_speakers(evidence_by_speaker: dict, threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
                      metadata: dict | None = None):
    """Resolve every speaker in an evidence map into a SpeakerRecord.

    metadata optionally maps speaker_id -> (name, country, birth_date).
    """
    records = []
    for speaker_id in sorted(evidence_by_speaker):
        kept = filter_evidence(evidence_by_speaker[speaker_id], threshold)
        label, provenance = resolve_gender(kept)
        name, country, birth = "", "", None
        if metadata and speaker_id in metadata:
            name, country, birth = metadata[speaker_id]
        records.append(
            SpeakerRecord(
                speaker_id=speaker_id,
                name=name,
                country=country,
                birth_date=birth,
                resolved_gender=label,
                provenance=provenance,
            )
        )
    return records


SPEAKER_CSV_COLUMNS = ("speaker_id", "name", "country", "birth_date", "gender", "provenance")


def save_speaker_records(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPEAKER_CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.speaker_id,
                    r.name,
                    r.country,
                    "" if r.birth_date is None else r.birth_date.isoformat(),
                    r.resolved_gender,
                    r.provenance,
                ]
            )


def load_speaker_records(path):
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SPEAKER_CSV_COLUMNS:
            raise ValueError(f"{path}: bad speaker CSV header {header}")
        for row in reader:
            speaker_id, name, country, birth_s, gender, provenance = row
            birth = datetime.date.fromisoformat(birth_s) if birth_s else None
            records.append(
                SpeakerRecord(
                    speaker_id=speaker_id,
                    name=name,
                    country=country,
                    birth_date=birth,
                    resolved_gender=gender,
                    provenance=provenance,
                )
            )
    return records
