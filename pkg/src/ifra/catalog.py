"""Feature catalog: names, units, kind and risk direction of every feature."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from ifra.errors import DataError


class Kind(str, Enum):
    CLINICAL = "clinical"
    ITUG = "itug"


class Direction(str, Enum):
    """How a feature's value relates to fall risk."""

    HIGHER_SAFER = "higher_safer"
    HIGHER_RISKIER = "higher_riskier"


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    unit: str
    kind: Kind
    direction: Direction

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "unit": self.unit,
            "kind": self.kind.value,
            "direction": self.direction.value,
        }


@dataclass(frozen=True)
class FeatureCatalog:
    """Ordered, name-unique collection of :class:`FeatureDescriptor`."""

    features: tuple[FeatureDescriptor, ...] = ()

    def __post_init__(self):
        seen = set()
        for f in self.features:
            if f.name in seen:
                raise DataError(f"duplicate feature name: {f.name!r}")
            seen.add(f.name)

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self) -> Iterator[FeatureDescriptor]:
        return iter(self.features)

    def __contains__(self, name: object) -> bool:
        return any(f.name == name for f in self.features)

    def __getitem__(self, name: str) -> FeatureDescriptor:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(name)

    def filter(self, kind: str | Kind | None) -> "FeatureCatalog":
        """Sub-catalog of one kind; ``None`` or ``"all"`` keeps everything."""
        if kind is None or kind == "all":
            return self
        kind = Kind(kind)
        return FeatureCatalog(tuple(f for f in self.features if f.kind is kind))

    def subset(self, names: Iterable[str]) -> "FeatureCatalog":
        wanted = set(names)
        return FeatureCatalog(tuple(f for f in self.features if f.name in wanted))

    def to_json(self) -> str:
        return json.dumps([f.to_dict() for f in self.features], indent=1, ensure_ascii=False)


def _descriptor(obj: dict, position: int) -> FeatureDescriptor:
    if not isinstance(obj, dict):
        raise DataError(f"catalog entry {position} is not an object")
    for key in ("name", "kind", "direction"):
        if key not in obj:
            raise DataError(f"catalog entry {position} is missing {key!r}")
    try:
        return FeatureDescriptor(
            name=str(obj["name"]),
            unit=str(obj.get("unit", "")),
            kind=Kind(obj["kind"]),
            direction=Direction(obj["direction"]),
        )
    except ValueError as exc:
        raise DataError(f"catalog entry {position} ({obj.get('name')!r}): {exc}") from None


def parse_catalog(entries: Sequence[dict]) -> FeatureCatalog:
    if not isinstance(entries, list):
        raise DataError("catalog must be a JSON array of feature objects")
    return FeatureCatalog(tuple(_descriptor(e, i) for i, e in enumerate(entries)))


def load_catalog(path: str | Path) -> FeatureCatalog:
    """Read a catalog JSON file, preserving file order.

    Raises :class:`DataError` on malformed JSON, duplicate names or a
    missing ``direction``.
    """
    try:
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    return parse_catalog(entries)


def _bundled(name: str) -> str:
    return resources.files("ifra.data").joinpath(name).read_text(encoding="utf-8")


def reference_catalog() -> FeatureCatalog:
    """The bundled 108-feature catalog (8 clinical, 100 ITUG)."""
    return parse_catalog(json.loads(_bundled("reference_catalog.json")))


BUILTIN_CATALOGS = ("reference", "clinical", "itug")


def resolve_catalog(spec: str | Path | None) -> FeatureCatalog:
    """Resolve a CLI catalog argument: a builtin name or a file path."""
    if spec is None or str(spec) == "reference":
        return reference_catalog()
    if str(spec) in ("clinical", "itug"):
        return reference_catalog().filter(str(spec))
    return load_catalog(spec)
