"""Subject records, CSV ingestion and split bookkeeping."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ifra.catalog import Direction, FeatureCatalog
from ifra.errors import DataError

META_COLUMNS = ("subject_id", "outcome", "synthetic", "split")
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none"})


class Outcome(str, Enum):
    FALLER = "faller"
    NON_FALLER = "non_faller"


class Split(str, Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    outcome: Outcome
    synthetic: bool
    split: Split
    values: Mapping[str, float]

    def __post_init__(self):
        if self.synthetic and self.split is not Split.TRAIN:
            raise DataError(
                f"subject {self.subject_id!r}: synthetic records must be in the train split"
            )

    @property
    def is_faller(self) -> bool:
        return self.outcome is Outcome.FALLER


@dataclass(frozen=True)
class Exclusion:
    line: int
    subject_id: str
    reason: str


@dataclass
class IngestionLog:
    rows_read: int = 0
    exclusions: list[Exclusion] = field(default_factory=list)

    @property
    def rows_kept(self) -> int:
        return self.rows_read - len(self.exclusions)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_kept": self.rows_kept,
            "exclusions": [
                {"line": e.line, "subject_id": e.subject_id, "reason": e.reason}
                for e in self.exclusions
            ],
        }


@dataclass(frozen=True)
class Dataset:
    """Immutable cohort: a catalog plus fully populated subject records."""

    catalog: FeatureCatalog
    subjects: tuple[SubjectRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(self.subjects))
        ids = Counter(s.subject_id for s in self.subjects)
        dupes = sorted(k for k, v in ids.items() if v > 1)
        if dupes:
            raise DataError(f"duplicate subject_id: {', '.join(dupes)}")
        names = self.catalog.names
        for s in self.subjects:
            missing = [n for n in names if n not in s.values]
            if missing:
                raise DataError(f"subject {s.subject_id!r} lacks feature {missing[0]!r}")

    def __len__(self) -> int:
        return len(self.subjects)

    def __iter__(self):
        return iter(self.subjects)

    def select(
        self,
        split: Split | str | None = None,
        outcome: Outcome | str | None = None,
        synthetic: bool | None = None,
    ) -> "Dataset":
        """Slice by split, outcome and/or synthetic flag."""
        split = Split(split) if split is not None else None
        outcome = Outcome(outcome) if outcome is not None else None
        kept = tuple(
            s
            for s in self.subjects
            if (split is None or s.split is split)
            and (outcome is None or s.outcome is outcome)
            and (synthetic is None or s.synthetic == synthetic)
        )
        return Dataset(self.catalog, kept)

    def with_subjects(self, subjects: Iterable[SubjectRecord]) -> "Dataset":
        return Dataset(self.catalog, tuple(subjects))

    @cached_property
    def _matrix(self) -> np.ndarray:
        names = self.catalog.names
        out = np.empty((len(self.subjects), len(names)), dtype=float)
        for i, s in enumerate(self.subjects):
            out[i] = [s.values[n] for n in names]
        out.setflags(write=False)
        return out

    def matrix(self, features: Sequence[str] | None = None) -> np.ndarray:
        """Subjects x features array, columns in catalog order unless given."""
        if features is None:
            return self._matrix
        idx = [self.catalog.index(f) for f in features]
        return self._matrix[:, idx]

    def labels(self) -> np.ndarray:
        """+1 for fallers, -1 for non-fallers."""
        return np.array([1 if s.is_faller else -1 for s in self.subjects], dtype=int)

    @property
    def ids(self) -> list[str]:
        return [s.subject_id for s in self.subjects]

    def to_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8", newline="")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = self.catalog.names
        writer.writerow([*META_COLUMNS, *names])
        for s in self.subjects:
            writer.writerow(
                [
                    s.subject_id,
                    s.outcome.value,
                    int(s.synthetic),
                    s.split.value,
                    *(repr(float(s.values[n])) for n in names),
                ]
            )
        return buf.getvalue()


def _parse_token(enum_cls, token: str, column: str, line: int):
    try:
        return enum_cls(token.strip())
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise DataError(f"line {line}: unknown {column} {token!r} (expected one of {allowed})") from None


def _parse_synthetic(token: str, line: int) -> bool:
    token = token.strip()
    if token not in ("0", "1"):
        raise DataError(f"line {line}: synthetic must be 0 or 1, got {token!r}")
    return token == "1"


def load_dataset(path: str | Path, catalog: FeatureCatalog) -> tuple[Dataset, IngestionLog]:
    """Read a cohort CSV against ``catalog``.

    Rows with a blank or missing feature cell are dropped and recorded in the
    returned :class:`IngestionLog`; every other contract violation raises
    :class:`DataError`.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_dataset(fh, catalog, source=str(path))


def parse_dataset(lines: Iterable[str], catalog: FeatureCatalog, source: str = "<csv>"):
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{source}: empty file") from None

    for col in META_COLUMNS:
        if col not in header:
            raise DataError(f"{source}: header lacks required column {col!r}")
    feature_cols = [h for h in header if h not in META_COLUMNS]
    unknown = [h for h in feature_cols if h not in catalog]
    if unknown:
        raise DataError(f"{source}: unknown feature column {unknown[0]!r}")
    for name in catalog.names:
        if name not in header:
            raise DataError(f"{source}: header lacks catalog feature {name!r}")
    if len(set(header)) != len(header):
        raise DataError(f"{source}: duplicated column in header")

    pos = {h: i for i, h in enumerate(header)}
    log = IngestionLog()
    subjects = []
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        log.rows_read += 1
        if len(row) != len(header):
            raise DataError(f"line {line}: expected {len(header)} cells, found {len(row)}")
        sid = row[pos["subject_id"]].strip()
        if not sid:
            raise DataError(f"line {line}: empty subject_id")
        outcome = _parse_token(Outcome, row[pos["outcome"]], "outcome", line)
        split = _parse_token(Split, row[pos["split"]], "split", line)
        synthetic = _parse_synthetic(row[pos["synthetic"]], line)

        values = {}
        missing = []
        for name in catalog.names:
            cell = row[pos[name]].strip()
            if cell.lower() in MISSING_TOKENS:
                missing.append(name)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"line {line}: non-numeric value {cell!r} in {name!r}") from None
            if not math.isfinite(v):
                raise DataError(f"line {line}: non-finite value {cell!r} in {name!r}")
            values[name] = v
        if missing:
            reason = f"missing {len(missing)} feature value(s): {', '.join(missing[:3])}"
            if len(missing) > 3:
                reason += ", ..."
            log.exclusions.append(Exclusion(line, sid, reason))
            continue
        subjects.append(SubjectRecord(sid, outcome, synthetic, split, values))
    return Dataset(catalog, tuple(subjects)), log


def split_summary(dataset: Dataset) -> dict[tuple[str, str, bool], int]:
    """Counts per (split, outcome, synthetic); every combination is present."""
    counts = {(sp.value, oc.value, syn): 0 for sp in Split for oc in Outcome for syn in (False, True)}
    for s in dataset:
        counts[(s.split.value, s.outcome.value, s.synthetic)] += 1
    return counts


def summary_table(counts: Mapping[tuple[str, str, bool], int]) -> list[dict]:
    rows = []
    for sp in Split:
        row = {"split": sp.value}
        for oc in Outcome:
            row[oc.value] = counts[(sp.value, oc.value, False)] + counts[(sp.value, oc.value, True)]
        row["synthetic"] = sum(counts[(sp.value, oc.value, True)] for oc in Outcome)
        row["total"] = row["faller"] + row["non_faller"]
        rows.append(row)
    return rows


def make_splits(
    dataset: Dataset,
    validation: tuple[int, int],
    test: tuple[int, int],
    seed: int,
) -> Dataset:
    """Assign splits, stratified by outcome.

    ``validation`` and ``test`` are ``(non_fallers, fallers)`` counts drawn
    from real subjects only; everything left over goes to train.
    """
    rng = np.random.default_rng(seed)
    assigned: dict[str, Split] = {}
    for outcome, col in ((Outcome.NON_FALLER, 0), (Outcome.FALLER, 1)):
        pool = [s.subject_id for s in dataset if s.outcome is outcome and not s.synthetic]
        need = validation[col] + test[col]
        if need > len(pool):
            raise DataError(
                f"requested {need} real {outcome.value}s for validation+test, only {len(pool)} available"
            )
        order = rng.permutation(len(pool))
        picked = [pool[i] for i in order[:need]]
        for sid in picked[: validation[col]]:
            assigned[sid] = Split.VALIDATION
        for sid in picked[validation[col]:]:
            assigned[sid] = Split.TEST
    out = [
        SubjectRecord(s.subject_id, s.outcome, s.synthetic, assigned.get(s.subject_id, Split.TRAIN), s.values)
        for s in dataset
    ]
    return dataset.with_subjects(out)


def direction_lint(dataset: Dataset) -> list[str]:
    """Features whose faller/non-faller mean ordering contradicts the catalog.

    Advisory only; directions are never inferred from data.
    """
    x = dataset.matrix()
    y = dataset.labels()
    if not (y == 1).any() or not (y == -1).any():
        return []
    diff = x[y == 1].mean(axis=0) - x[y == -1].mean(axis=0)
    flagged = []
    for f, d in zip(dataset.catalog, diff):
        if f.direction is Direction.HIGHER_RISKIER and d < 0:
            flagged.append(f.name)
        elif f.direction is Direction.HIGHER_SAFER and d > 0:
            flagged.append(f.name)
    return flagged
