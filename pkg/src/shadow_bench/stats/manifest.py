"""Dataset manifest CSV and the per-category 7:1:2 split."""

from __future__ import annotations

import csv
import io
import random
from collections import Counter, OrderedDict
from dataclasses import dataclass, replace
from pathlib import Path

from ..errors import ParseError

CUHK_CATEGORIES = ("Shadow-ADE", "Shadow-KITTI", "Shadow-MAP", "Shadow-USR", "Shadow-WEB")
SPLITS = ("train", "val", "test", "unassigned")
SPLIT_WEIGHTS = (("train", 7), ("val", 1), ("test", 2))
HEADER = ("path", "category", "split")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    category: str
    split: str = "unassigned"


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.path in seen:
                raise ParseError(f"duplicate manifest path {e.path!r}")
            seen.add(e.path)
            if e.split not in SPLITS:
                raise ParseError(f"unknown split {e.split!r} for {e.path!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def categories(self) -> list[str]:
        """Categories in order of first appearance."""
        return list(OrderedDict.fromkeys(e.category for e in self.entries))

    def select(self, split: str | None) -> "DatasetManifest":
        if split in (None, "all"):
            return self
        return DatasetManifest(tuple(e for e in self.entries if e.split == split))

    def split_counts(self) -> dict[str, Counter]:
        out: dict[str, Counter] = OrderedDict()
        for e in self.entries:
            out.setdefault(e.category, Counter())[e.split] += 1
        return out


def parse_manifest(text: str) -> DatasetManifest:
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and not (len(r) == 1 and not r[0].strip())]
    if not rows:
        raise ParseError("manifest is empty")
    header = tuple(c.strip() for c in rows[0])
    if header[:2] != HEADER[:2] or (len(header) > 2 and header[2] != "split") or len(header) > 3:
        raise ParseError(f"manifest header must be 'path,category,split', got {','.join(header)!r}")
    entries = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) not in (2, 3) or len(row) > len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        path, category = row[0].strip(), row[1].strip()
        split = row[2].strip() if len(row) == 3 else ""
        if not path or not category:
            raise ParseError(f"line {lineno}: empty path or category")
        entries.append(ManifestEntry(path, category, split or "unassigned"))
    return DatasetManifest(tuple(entries))


def read_manifest(path) -> DatasetManifest:
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    return parse_manifest(text)


def format_manifest(manifest: DatasetManifest) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for e in manifest.entries:
        w.writerow((e.path, e.category, e.split))
    return buf.getvalue()


def write_manifest(manifest: DatasetManifest, path) -> None:
    Path(path).write_text(format_manifest(manifest), encoding="utf-8")


def split_sizes(n: int, weights=SPLIT_WEIGHTS) -> dict[str, int]:
    """Largest-remainder apportionment of ``n`` items over integer weights.

    Ties in the remainder go to the earlier split.
    """
    total = sum(w for _, w in weights)
    floors = {name: n * w // total for name, w in weights}
    rest = n - sum(floors.values())
    order = sorted(range(len(weights)), key=lambda i: -(n * weights[i][1] % total))
    for i in order[:rest]:
        floors[weights[i][0]] += 1
    return floors


def split_dataset(manifest: DatasetManifest, seed: int) -> DatasetManifest:
    """Shuffle each category with a seeded generator and cut it 7:1:2.

    The generator is keyed on (seed, category), so the result depends only
    on the seed and on the entry order within each category.
    """
    by_cat: dict[str, list[int]] = OrderedDict()
    for i, e in enumerate(manifest.entries):
        by_cat.setdefault(e.category, []).append(i)
    assigned = list(manifest.entries)
    for cat, idx in by_cat.items():
        order = list(idx)
        random.Random(f"{seed}:{cat}").shuffle(order)
        sizes = split_sizes(len(order))
        pos = 0
        for name, _ in SPLIT_WEIGHTS:
            for i in order[pos : pos + sizes[name]]:
                assigned[i] = replace(assigned[i], split=name)
            pos += sizes[name]
    return DatasetManifest(tuple(assigned))
