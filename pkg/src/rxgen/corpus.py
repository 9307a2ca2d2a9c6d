"""Prescription corpus handling: loading, synthesis, outlier filtering, splitting.

A corpus is a list of (label, instruction) records; the annotated variant
additionally carries gold entity spans as byte offsets into the instruction.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    AnnotationError,
    CapacityError,
    CorpusSizeError,
    InputError,
    MalformedRowError,
)

ENTITY_TYPES = ("Drug", "Strength", "Form", "Route", "Frequency")

_FORBIDDEN = {chr(c) for c in range(32)} | {chr(127)}


def _check_text(value: str, name: str) -> None:
    if not value:
        raise ValueError(f"{name} must be non-empty")
    if any(ch in _FORBIDDEN for ch in value):
        raise ValueError(f"{name} contains control characters: {value!r}")


@dataclass(frozen=True)
class Record:
    """One prescription line: a drug label and its full instruction text."""

    label: str
    instruction: str

    def __post_init__(self):
        _check_text(self.label, "label")
        _check_text(self.instruction, "instruction")


class Span(NamedTuple):
    """Entity span as byte offsets [start, end) into the instruction."""

    start: int
    end: int
    entity: str


@dataclass(frozen=True)
class AnnotatedRecord:
    """A record plus gold entity spans.

    Invariants (enforced by :meth:`validate`, called at trust boundaries):
    spans are sorted, non-overlapping, in-bounds, typed, and exactly one
    Drug span matches the label case-insensitively.
    """

    record: Record
    spans: tuple[Span, ...]

    def validate(self) -> "AnnotatedRecord":
        raw = self.record.instruction.encode("utf-8")
        prev_end = 0
        drug_spans = []
        for span in self.spans:
            if span.entity not in ENTITY_TYPES:
                raise AnnotationError(f"unknown entity type {span.entity!r}")
            if not (0 <= span.start < span.end <= len(raw)):
                raise AnnotationError(
                    f"span {span} out of bounds for instruction of {len(raw)} bytes"
                )
            if span.start < prev_end:
                raise AnnotationError(f"span {span} overlaps or is out of order")
            prev_end = span.end
            if span.entity == "Drug":
                drug_spans.append(span)
        if len(drug_spans) != 1:
            raise AnnotationError(f"expected exactly one Drug span, got {len(drug_spans)}")
        drug_text = raw[drug_spans[0].start : drug_spans[0].end].decode("utf-8")
        if drug_text.lower() != self.record.label.lower():
            raise AnnotationError(
                f"Drug span text {drug_text!r} does not match label {self.record.label!r}"
            )
        return self

    def span_text(self, span: Span) -> str:
        return self.record.instruction.encode("utf-8")[span.start : span.end].decode("utf-8")


@dataclass
class SplitCorpus:
    """Train/valid/test partition of a record list."""

    train: list[Record]
    valid: list[Record]
    test: list[Record]


# ---------------------------------------------------------------------------
# File formats: TSV (label<TAB>instruction) and JSONL ({"label", "instruction",
# optional "spans": [[start, end, entity], ...]} with byte offsets).
# ---------------------------------------------------------------------------


def load_records(path: str | Path, format: str = "tsv") -> list[Record]:
    """Load plain records; one per row, order preserved, fields trimmed."""
    if format not in ("tsv", "jsonl"):
        raise InputError(f"unknown corpus format {format!r} (expected tsv or jsonl)")
    records = []
    with open(path, encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if format == "tsv":
                parts = line.split("\t")
                if len(parts) != 2:
                    raise MalformedRowError(row, f"expected 2 tab-separated fields, got {len(parts)}")
                label, instruction = parts[0].strip(), parts[1].strip()
            else:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRowError(row, f"invalid JSON: {exc}") from exc
                if not isinstance(obj, dict) or "label" not in obj or "instruction" not in obj:
                    raise MalformedRowError(row, "object must have 'label' and 'instruction'")
                label, instruction = str(obj["label"]).strip(), str(obj["instruction"]).strip()
            try:
                records.append(Record(label, instruction))
            except ValueError as exc:
                raise MalformedRowError(row, str(exc)) from exc
    return records


def load_annotated(path: str | Path) -> list[AnnotatedRecord]:
    """Load an annotated JSONL corpus, validating span invariants per row."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRowError(row, f"invalid JSON: {exc}") from exc
            if "label" not in obj or "instruction" not in obj or "spans" not in obj:
                raise MalformedRowError(row, "object must have 'label', 'instruction', 'spans'")
            try:
                rec = Record(str(obj["label"]).strip(), str(obj["instruction"]).strip())
                spans = tuple(Span(int(s), int(e), str(t)) for s, e, t in obj["spans"])
                out.append(AnnotatedRecord(rec, spans).validate())
            except (ValueError, TypeError) as exc:
                raise MalformedRowError(row, str(exc)) from exc
            except AnnotationError as exc:
                raise MalformedRowError(row, str(exc)) from exc
    return out


def save_records(records: Iterable[Record], path: str | Path, format: str = "tsv") -> None:
    if format not in ("tsv", "jsonl"):
        raise InputError(f"unknown corpus format {format!r} (expected tsv or jsonl)")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            if format == "tsv":
                fh.write(f"{rec.label}\t{rec.instruction}\n")
            else:
                fh.write(json.dumps({"label": rec.label, "instruction": rec.instruction}) + "\n")


def save_annotated(records: Iterable[AnnotatedRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            obj = {
                "label": rec.record.label,
                "instruction": rec.record.instruction,
                "spans": [[s.start, s.end, s.entity] for s in rec.spans],
            }
            fh.write(json.dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# Synthetic corpus. Instructions follow the shape
#   "<drug> <strength> <form> Sig: <quantity> <form> <route> <frequency>[ clause]"
# with every slot of the five entity types recorded as a gold span.
# ---------------------------------------------------------------------------

DRUGS = (
    "docusate sodium", "acetaminophen", "ibuprofen", "aspirin", "metformin",
    "lisinopril", "atorvastatin", "amlodipine", "omeprazole", "metoprolol",
    "losartan", "gabapentin", "hydrochlorothiazide", "sertraline", "simvastatin",
    "levothyroxine", "azithromycin", "amoxicillin", "prednisone", "tramadol",
    "furosemide", "pantoprazole", "citalopram", "warfarin", "clopidogrel",
    "ferrous sulfate", "magnesium hydroxide", "potassium chloride", "ondansetron",
    "ciprofloxacin", "doxycycline", "cephalexin", "naproxen", "ranitidine",
    "insulin glargine", "albuterol sulfate", "montelukast", "escitalopram",
    "fluoxetine", "duloxetine", "venlafaxine", "bupropion", "trazodone",
    "alprazolam", "lorazepam", "clonazepam", "zolpidem", "melatonin",
    "cetirizine", "loratadine", "diphenhydramine", "famotidine", "sucralfate",
    "allopurinol", "colchicine", "meloxicam",
)

STRENGTHS = (
    "100 mg", "250 mg", "500 mg", "5 mg", "10 mg",
    "20 mg", "40 mg", "75 mg", "81 mg", "1000 mg",
)

FORMS = (
    "Capsule", "Tablet", "Solution", "Suspension", "Syrup", "Lozenge", "Packet", "Appl",
)

ROUTES = ("PO", "IV", "IM", "SC", "NG", "SL")

FREQUENCIES = (
    "BID (2 times a day)", "TID (3 times a day)", "QID (4 times a day)",
    "DAILY (once a day)", "QHS (once a day at bedtime)", "Q4H (every 4 hours)",
    "Q6H (every 6 hours)", "Q8H (every 8 hours)", "Q12H (every 12 hours)",
    "QAM (once a day in the morning)", "QOD (every other day)", "PRN (as needed)",
)

QUANTITIES = ("One (1)", "Two (2)", "Three (3)", "Four (4)", "One-half (0.5)", "Six (6)")

CLAUSES = (
    "",
    " as needed for constipation.",
    " as needed for pain.",
    " as needed for nausea.",
    " with meals.",
    " with a full glass of water.",
    " hold for loose stools.",
)

_GAZETTEERS = {
    "Drug": DRUGS,
    "Strength": STRENGTHS,
    "Form": FORMS,
    "Route": ROUTES,
    "Frequency": FREQUENCIES,
}


def gazetteer(entity: str) -> tuple[str, ...]:
    return _GAZETTEERS[entity]


def _compose(drug: str, rng: random.Random) -> AnnotatedRecord:
    strength = rng.choice(STRENGTHS)
    form = rng.choice(FORMS)
    quantity = rng.choice(QUANTITIES)
    route = rng.choice(ROUTES)
    freq = rng.choice(FREQUENCIES)
    clause = rng.choice(CLAUSES)

    parts: list[str] = []
    spans: list[Span] = []
    offset = 0

    def add(piece: str, entity: str | None = None) -> None:
        nonlocal offset
        if entity is not None:
            spans.append(Span(offset, offset + len(piece.encode("utf-8")), entity))
        parts.append(piece)
        offset += len(piece.encode("utf-8"))

    add(drug, "Drug")
    add(" ")
    add(strength, "Strength")
    add(" ")
    add(form, "Form")
    add(" Sig: ")
    add(quantity)
    add(" ")
    add(form, "Form")
    add(" ")
    add(route, "Route")
    add(" ")
    add(freq, "Frequency")
    if clause:
        add(clause)
    record = Record(drug, "".join(parts))
    return AnnotatedRecord(record, tuple(spans)).validate()


def generate_synthetic_corpus(
    seed: int, n_labels: int, samples_per_label: int
) -> list[AnnotatedRecord]:
    """Deterministically generate annotated prescriptions from fixed gazetteers.

    Within a label, instructions are drawn without replacement (re-drawn on
    collision) so that any two samples differ in at least one non-Drug slot.
    """
    if n_labels < 1 or samples_per_label < 1:
        raise InputError("n_labels and samples_per_label must be >= 1")
    if n_labels > len(DRUGS):
        raise CapacityError(f"at most {len(DRUGS)} labels available, requested {n_labels}")
    rng = random.Random(seed)
    out: list[AnnotatedRecord] = []
    for drug in DRUGS[:n_labels]:
        seen: set[str] = set()
        for _ in range(samples_per_label):
            rec = _compose(drug, rng)
            for _attempt in range(200):
                if rec.record.instruction not in seen:
                    break
                rec = _compose(drug, rng)
            seen.add(rec.record.instruction)
            out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Filtering and splitting.
# ---------------------------------------------------------------------------


def filter_outliers(records: Sequence[Record], k: float = 1.5) -> list[Record]:
    """Drop records whose label or instruction whitespace-token count falls
    outside the Tukey fence [Q1 - k*IQR, Q3 + k*IQR] computed over the input.

    Fewer than 4 records: quartiles are unstable, input is returned unchanged.
    """
    if not records:
        raise InputError("filter_outliers requires a non-empty record list")
    if len(records) < 4:
        return list(records)

    def fence(counts: np.ndarray) -> tuple[float, float]:
        q1, q3 = np.percentile(counts, [25, 75])
        iqr = q3 - q1
        return q1 - k * iqr, q3 + k * iqr

    label_counts = np.array([len(r.label.split()) for r in records], dtype=float)
    instr_counts = np.array([len(r.instruction.split()) for r in records], dtype=float)
    lab_lo, lab_hi = fence(label_counts)
    ins_lo, ins_hi = fence(instr_counts)
    return [
        r
        for r, lc, ic in zip(records, label_counts, instr_counts)
        if lab_lo <= lc <= lab_hi and ins_lo <= ic <= ins_hi
    ]


def split_corpus(records: Sequence[Record], seed: int) -> SplitCorpus:
    """Shuffle and split 9:1 into train/valid; the test set is supplied separately."""
    n = len(records)
    if n < 10:
        raise CorpusSizeError(f"need at least 10 records to split, got {n}")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    n_valid = int(round(n / 10))
    valid_idx = sorted(indices[:n_valid])
    train_idx = sorted(indices[n_valid:])
    return SplitCorpus(
        train=[records[i] for i in train_idx],
        valid=[records[i] for i in valid_idx],
        test=[],
    )


def expand_labels(records: Sequence[Record], multiplier: int) -> list[str]:
    """Repeat each label multiplier * (its frequency) times, grouped by label
    in first-appearance order."""
    if multiplier < 1:
        raise InputError("multiplier must be >= 1")
    freq: dict[str, int] = {}
    for rec in records:
        freq[rec.label] = freq.get(rec.label, 0) + 1
    out: list[str] = []
    for label, count in freq.items():
        out.extend([label] * (multiplier * count))
    return out
