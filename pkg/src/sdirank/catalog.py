"""Item catalog and query list ingestion.

Catalog CSV layout: a required ``id`` column, any number of ``text:<name>``
columns (space-joined into the item text used for relevance scoring) and any
number of ``aspect:<name>`` columns holding categorical values. An empty
cell means the item has no value for that aspect.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

TEXT_PREFIX = "text:"
ASPECT_PREFIX = "aspect:"

# The 21 shoe features used for the Kaggle benchmark. Documentation only:
# aspects are discovered from the CSV header.
KAGGLE_SHOE_ASPECTS = (
    "Season",
    "Material",
    "Gender",
    "Shoe Size",
    "Color",
    "Brand",
    "Age Group",
    "Heel Height",
    "Fabric Material",
    "Shoe Width",
    "Occasion",
    "Shoe Category",
    "Casual & Dress Shoe Style",
    "Shoe Closure",
    "Assembled Product Dimensions (L x W x H)",
    "Fabric Content",
    "Shipping Weight (in pounds)",
    "prices.offer",
    "prices.amountMin",
    "prices.amountMax",
    "prices.isSale",
)


class CatalogError(ValueError):
    """Raised for malformed catalog or query files."""


class UnknownAspectError(KeyError):
    pass


def normalize_value(value: str) -> str:
    return value.strip().casefold()


@dataclass(frozen=True)
class Item:
    id: str
    text: str
    aspects: Mapping[str, str]


@dataclass(frozen=True)
class IngestReport:
    read: int
    kept: int
    dropped: int


@dataclass(frozen=True, eq=False)
class Catalog:
    """Immutable ordered collection of items.

    ``codes`` is an ``(n_items, n_aspects)`` integer matrix giving, for each
    item and aspect, the index of its value in ``vocab[aspect]`` or -1 when
    the value is missing. It is what every numeric module works from.
    """

    items: tuple[Item, ...]
    aspect_names: tuple[str, ...]
    report: IngestReport | None = None
    codes: np.ndarray = field(init=False, repr=False)
    vocab: dict[str, tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        vocab: dict[str, dict[str, int]] = {a: {} for a in self.aspect_names}
        codes = np.full((len(self.items), len(self.aspect_names)), -1, dtype=np.int64)
        for i, item in enumerate(self.items):
            for j, name in enumerate(self.aspect_names):
                value = item.aspects.get(name)
                if value is None:
                    continue
                codes[i, j] = vocab[name].setdefault(value, len(vocab[name]))
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(
            self, "vocab", {a: tuple(v) for a, v in vocab.items()}
        )

    def __len__(self) -> int:
        return len(self.items)

    @classmethod
    def from_items(cls, items: Iterable[Item], report: IngestReport | None = None) -> "Catalog":
        items = tuple(items)
        seen: Counter[str] = Counter(it.id for it in items)
        dupes = sorted(i for i, c in seen.items() if c > 1)
        if dupes:
            raise CatalogError(f"duplicate item ids: {', '.join(dupes)}")
        names: dict[str, None] = {}
        for it in items:
            for name in it.aspects:
                names.setdefault(name, None)
        return cls(items, tuple(names), report)

    def aspect_index(self, aspect: str) -> int:
        try:
            return self.aspect_names.index(aspect)
        except ValueError:
            raise UnknownAspectError(aspect) from None

    def aspect_codes(self, aspect: str, subset: Sequence[int] | None = None) -> np.ndarray:
        col = self.codes[:, self.aspect_index(aspect)]
        return col if subset is None else col[np.asarray(subset, dtype=np.int64)]

    def index_of(self, item_id: str) -> int:
        for i, it in enumerate(self.items):
            if it.id == item_id:
                return i
        raise KeyError(item_id)


@dataclass(frozen=True)
class IngestConfig:
    """Filtering applied while loading a catalog.

    ``exclude`` maps an aspect name to values whose items are dropped (e.g.
    ``{"shoe category": {"jewelry", "gloves"}}``); matching uses the
    normalized value. ``keep`` is an optional arbitrary item predicate.
    """

    min_aspects: int = 1
    aspects: tuple[str, ...] | None = None
    exclude: Mapping[str, frozenset[str]] = field(default_factory=dict)
    keep: Callable[[Item], bool] | None = None

    def accepts(self, item: Item) -> bool:
        if len(item.aspects) < self.min_aspects:
            return False
        for aspect, values in self.exclude.items():
            v = item.aspects.get(aspect)
            if v is not None and v in {normalize_value(x) for x in values}:
                return False
        return self.keep is None or self.keep(item)


def _parse_header(header: list[str]) -> tuple[int, list[tuple[int, str]], list[tuple[int, str]]]:
    id_col = None
    text_cols: list[tuple[int, str]] = []
    aspect_cols: list[tuple[int, str]] = []
    seen: set[str] = set()
    for j, raw in enumerate(header):
        col = raw.strip()
        if col in seen:
            raise CatalogError(f"duplicate column {col!r}")
        seen.add(col)
        if col == "id":
            id_col = j
        elif col.startswith(TEXT_PREFIX) and col[len(TEXT_PREFIX):].strip():
            text_cols.append((j, col[len(TEXT_PREFIX):].strip()))
        elif col.startswith(ASPECT_PREFIX) and col[len(ASPECT_PREFIX):].strip():
            aspect_cols.append((j, col[len(ASPECT_PREFIX):].strip()))
        else:
            raise CatalogError(f"malformed header: unrecognized column {raw!r}")
    if id_col is None:
        raise CatalogError("malformed header: missing required column 'id'")
    return id_col, text_cols, aspect_cols


def load_catalog(path: str | Path, config: IngestConfig | None = None) -> Catalog:
    config = config or IngestConfig()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CatalogError(f"{path}: empty file, header row required") from None
        id_col, text_cols, aspect_cols = _parse_header(header)
        if config.aspects is not None:
            wanted = set(config.aspects)
            aspect_cols = [(j, a) for j, a in aspect_cols if a in wanted]

        items: list[Item] = []
        n_read = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CatalogError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            n_read += 1
            text = " ".join(row[j].strip() for j, _ in text_cols if row[j].strip())
            aspects = {}
            for j, name in aspect_cols:
                value = normalize_value(row[j])
                if value:
                    aspects[name] = value
            item = Item(row[id_col].strip(), text, aspects)
            if config.accepts(item):
                items.append(item)

    report = IngestReport(read=n_read, kept=len(items), dropped=n_read - len(items))
    logger.info("loaded %s: read=%d kept=%d dropped=%d", path, report.read, report.kept, report.dropped)
    return Catalog.from_items(items, report)


def write_catalog(catalog: Catalog, path: str | Path) -> None:
    """Write ``catalog`` in the CSV layout accepted by :func:`load_catalog`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "text:body"] + [ASPECT_PREFIX + a for a in catalog.aspect_names])
        for it in catalog.items:
            w.writerow([it.id, it.text] + [it.aspects.get(a, "") for a in catalog.aspect_names])


@dataclass(frozen=True)
class QuerySet:
    queries: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)


def load_queries(path: str | Path) -> QuerySet:
    queries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            q = line.strip()
            if q and not q.startswith("#"):
                queries.append(q)
    return QuerySet(tuple(queries))


def aspect_value_counts(catalog: Catalog, subset: Sequence[int], aspect: str) -> dict[str, int]:
    """Count aspect values among ``subset``; items missing the aspect are skipped."""
    codes = catalog.aspect_codes(aspect, subset)
    vocab = catalog.vocab[aspect]
    counts: dict[str, int] = {}
    for c in codes:
        if c >= 0:
            counts[vocab[c]] = counts.get(vocab[c], 0) + 1
    return counts
