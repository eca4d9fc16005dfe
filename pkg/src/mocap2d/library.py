"""Tagged BVH motion library with keyword search.

A library directory holds BVH files plus a JSON tags file mapping each file
name to a list of tags.  Queries score by token overlap with an entry's tags.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .bvh import read_bvh
from .errors import EmptyLibrary, Mocap2dError, MissingTagsFile

log = logging.getLogger(__name__)

TAGS_FILE = "tags.json"


@dataclass(frozen=True)
class MotionEntry:
    id: str
    bvh_path: str
    tags: tuple[str, ...]
    duration: float
    joint_count: int


@dataclass
class MotionLibrary:
    entries: list[MotionEntry]
    warnings: list[str] = field(default_factory=list)
    tag_index: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("motion entry ids must be unique")
        index: dict[str, list[str]] = {}
        for e in self.entries:
            for t in e.tags:
                index.setdefault(t, []).append(e.id)
        self.tag_index = index

    def entry(self, id) -> MotionEntry:
        for e in self.entries:
            if e.id == id:
                return e
        raise KeyError(id)


def tokenize(text: str) -> set[str]:
    return {t for t in re.split(r"[^0-9a-z]+", text.lower()) if t}


def index_library(root, tags_file=None) -> MotionLibrary:
    """Parse every BVH the tags file lists; broken files become warnings."""
    root = Path(root)
    bvhs = sorted(p for p in root.glob("*") if p.suffix.lower() == ".bvh") if root.is_dir() else []
    tags_path = Path(tags_file) if tags_file is not None else root / TAGS_FILE
    if not bvhs and not tags_path.is_file():
        raise EmptyLibrary(f"no BVH files in {root}")
    if not tags_path.is_file():
        raise MissingTagsFile(f"tags file {tags_path} not found")
    try:
        tag_map = json.loads(tags_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MissingTagsFile(f"tags file {tags_path} unreadable: {exc}") from None
    if not isinstance(tag_map, dict):
        raise MissingTagsFile(f"tags file {tags_path} must map file names to tag lists")

    entries, warnings = [], []
    for fname in sorted(tag_map):
        tags = tag_map[fname]
        if not isinstance(tags, list) or not tags or not all(isinstance(t, str) and t.strip() for t in tags):
            warnings.append(f"{fname}: tags must be a non-empty list of strings")
            continue
        path = root / fname
        try:
            doc = read_bvh(path)
        except (OSError, UnicodeDecodeError, Mocap2dError) as exc:
            warnings.append(f"{fname}: {type(exc).__name__}: {exc}")
            continue
        seen = []
        for t in tags:
            t = t.strip().lower()
            if t not in seen:
                seen.append(t)
        entries.append(MotionEntry(Path(fname).stem, str(path), tuple(seen),
                                   doc.motion.duration, len(doc.joints())))
    for w in warnings:
        log.warning("skipped %s", w)
    if not entries:
        raise EmptyLibrary(f"no loadable motions in {root}", warnings)
    return MotionLibrary(entries, warnings)


def overlap_score(query_tokens: set[str], entry: MotionEntry) -> float:
    if not query_tokens:
        return 0.0
    return len(query_tokens & set(entry.tags)) / len(query_tokens)


def search(lib: MotionLibrary, query: str, k: int = 5,
           scorer: Callable[[set, MotionEntry], float] = overlap_score) -> list[tuple[MotionEntry, float]]:
    """Top ``k`` entries by score; ties go to shorter duration, then id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    tokens = tokenize(query)
    scored = [(e, scorer(tokens, e)) for e in lib.entries]
    scored = [(e, s) for e, s in scored if s > 0]
    scored.sort(key=lambda es: (-es[1], es[0].duration, es[0].id))
    return scored[:k]
