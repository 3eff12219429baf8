"""Triplet storage: TSV I/O, vocab, splits, filter index, synthetic graphs.

A dataset is a list of (head, relation, tail) id triples plus a Vocab
mapping ids to names. Files are tab-separated name triples, one per
line, LF-terminated; ids are assigned in first-appearance order so a
load is reproducible from the file alone.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .errors import DomainError, EmptyDatasetError, ParseError
from .rng import RngStream


class Triplet(NamedTuple):
    head: int
    relation: int
    tail: int


@dataclass
class Vocab:
    """Entity and relation name tables; row index is the id."""

    entities: list[str]
    relations: list[str]
    entity_ids: dict[str, int] = field(default_factory=dict)
    relation_ids: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.entity_ids:
            self.entity_ids = {n: i for i, n in enumerate(self.entities)}
        if not self.relation_ids:
            self.relation_ids = {n: i for i, n in enumerate(self.relations)}

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)


@dataclass
class IngestReport:
    n_lines: int
    n_triplets: int
    n_duplicates: int
    n_entities: int
    n_relations: int

    def to_text(self) -> str:
        return (
            f"lines\t{self.n_lines}\n"
            f"triplets\t{self.n_triplets}\n"
            f"duplicates\t{self.n_duplicates}\n"
            f"entities\t{self.n_entities}\n"
            f"relations\t{self.n_relations}\n"
        )


@dataclass
class DatasetSplit:
    train: list[Triplet]
    valid: list[Triplet]
    test: list[Triplet]

    def all_triplets(self) -> list[Triplet]:
        return self.train + self.valid + self.test


# ---------------------------------------------------------------------------
# TSV I/O


def parse_tsv_text(text: str, has_header: bool = False):
    """Parse TSV text into (triplets, vocab, report). Duplicates are dropped,
    keeping the first occurrence; a malformed row raises ParseError with its
    1-based line number."""
    entities: list[str] = []
    relations: list[str] = []
    ent_ids: dict[str, int] = {}
    rel_ids: dict[str, int] = {}
    triplets: list[Triplet] = []
    seen: set[Triplet] = set()
    n_lines = 0
    n_dups = 0
    lines = text.splitlines()
    start = 1 if has_header and lines else 0
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        n_lines += 1
        parts = line.split("\t")
        if len(parts) != 3 or any(p == "" for p in parts):
            raise ParseError(f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}")
        hn, rn, tn = parts
        if hn not in ent_ids:
            ent_ids[hn] = len(entities)
            entities.append(hn)
        if tn not in ent_ids:
            ent_ids[tn] = len(entities)
            entities.append(tn)
        if rn not in rel_ids:
            rel_ids[rn] = len(relations)
            relations.append(rn)
        trip = Triplet(ent_ids[hn], rel_ids[rn], ent_ids[tn])
        if trip in seen:
            n_dups += 1
            continue
        seen.add(trip)
        triplets.append(trip)
    vocab = Vocab(entities, relations, ent_ids, rel_ids)
    report = IngestReport(n_lines, len(triplets), n_dups, len(entities), len(relations))
    return triplets, vocab, report


def load_tsv(path: str, has_header: bool = False):
    """Load a triplet TSV file; see parse_tsv_text."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_tsv_text(text, has_header=has_header)


def load_tsv_with_vocab(path: str, vocab: Vocab) -> list[Triplet]:
    """Load a TSV using an existing vocab; unknown names are an error."""
    triplets = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3 or any(p == "" for p in parts):
                raise ParseError(f"{path} line {lineno}: expected 3 tab-separated fields")
            hn, rn, tn = parts
            try:
                triplets.append(Triplet(vocab.entity_ids[hn], vocab.relation_ids[rn],
                                        vocab.entity_ids[tn]))
            except KeyError as missing:
                raise ParseError(f"{path} line {lineno}: name {missing} not in vocab")
    return triplets


def triplets_to_text(triplets: Iterable[Triplet], vocab: Vocab) -> str:
    """Canonical TSV form: names, single tabs, LF line endings."""
    rows = []
    for h, r, t in triplets:
        rows.append(f"{vocab.entities[h]}\t{vocab.relations[r]}\t{vocab.entities[t]}\n")
    return "".join(rows)


def save_tsv(path: str, triplets: Iterable[Triplet], vocab: Vocab) -> None:
    _atomic_write_text(path, triplets_to_text(triplets, vocab))


def save_vocab(dir_path: str, vocab: Vocab) -> None:
    """Write entities.tsv and relations.tsv (id <tab> name)."""
    os.makedirs(dir_path, exist_ok=True)
    ent = "".join(f"{i}\t{n}\n" for i, n in enumerate(vocab.entities))
    rel = "".join(f"{i}\t{n}\n" for i, n in enumerate(vocab.relations))
    _atomic_write_text(os.path.join(dir_path, "entities.tsv"), ent)
    _atomic_write_text(os.path.join(dir_path, "relations.tsv"), rel)


def _read_vocab_names(path: str) -> list[str]:
    names = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path} line {lineno}: expected id<tab>name")
            idx, name = parts
            if not idx.isdigit() or int(idx) != len(names):
                raise ParseError(f"{path} line {lineno}: ids must be contiguous from 0")
            names.append(name)
    return names


def load_vocab_files(entities_path: str, relations_path: str) -> Vocab:
    return Vocab(_read_vocab_names(entities_path), _read_vocab_names(relations_path))


def load_vocab(dir_path: str) -> Vocab:
    return load_vocab_files(
        os.path.join(dir_path, "entities.tsv"),
        os.path.join(dir_path, "relations.tsv"),
    )


def _atomic_write_text(path: str, text: str) -> None:
    """Write-then-rename so a failed run leaves no partial file."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_bytes(path: str, blob: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# splits


def split(
    triplets: list[Triplet],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
    by_pair: bool = False,
) -> DatasetSplit:
    """Shuffle once with the seed and cut contiguous train/valid/test slices.

    Valid and test sizes are floor(n * ratio); the remainder goes to train.
    With by_pair=True, unordered (head, tail) pairs are kept whole: pairs are
    shuffled and assigned to test until its quota is met, then valid, then
    train, so no pair straddles two splits.
    """
    n = len(triplets)
    if n < 3:
        raise EmptyDatasetError(f"need at least 3 triplets to split, got {n}")
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise DomainError(f"ratios must be 3 non-negative numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DomainError(f"ratios must sum to 1, got {ratios}")
    n_valid = math.floor(n * ratios[1])
    n_test = math.floor(n * ratios[2])
    rng = RngStream(seed)

    if not by_pair:
        order = rng.permutation(n)
        shuffled = [triplets[i] for i in order]
        n_train = n - n_valid - n_test
        return DatasetSplit(
            shuffled[:n_train],
            shuffled[n_train : n_train + n_valid],
            shuffled[n_train + n_valid :],
        )

    groups: dict[tuple[int, int], list[Triplet]] = {}
    for trip in triplets:
        key = (min(trip.head, trip.tail), max(trip.head, trip.tail))
        groups.setdefault(key, []).append(trip)
    keys = list(groups)
    order = rng.permutation(len(keys))
    train: list[Triplet] = []
    valid: list[Triplet] = []
    test: list[Triplet] = []
    for gi in order:
        grp = groups[keys[gi]]
        if len(test) < n_test:
            test.extend(grp)
        elif len(valid) < n_valid:
            valid.extend(grp)
        else:
            train.extend(grp)
    return DatasetSplit(train, valid, test)


# ---------------------------------------------------------------------------
# split manifests


@dataclass
class SplitManifest:
    """Paths (resolved) and provenance of one dataset split."""

    train_path: str
    valid_path: str
    test_path: str
    entities_path: str
    relations_path: str
    seed: int
    by_pair: bool


def write_split_manifest(path: str, manifest: SplitManifest) -> None:
    """Write a manifest with paths stored relative to its own directory."""
    base = os.path.dirname(os.path.abspath(path))
    rel = lambda p: os.path.relpath(os.path.abspath(p), base)
    text = (
        f"train = {rel(manifest.train_path)}\n"
        f"valid = {rel(manifest.valid_path)}\n"
        f"test = {rel(manifest.test_path)}\n"
        f"entities = {rel(manifest.entities_path)}\n"
        f"relations = {rel(manifest.relations_path)}\n"
        f"seed = {manifest.seed}\n"
        f"by_pair = {'true' if manifest.by_pair else 'false'}\n"
    )
    _atomic_write_text(path, text)


def read_split_manifest(path: str) -> SplitManifest:
    """Read a manifest, resolving paths against its directory."""
    base = os.path.dirname(os.path.abspath(path))
    kv: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path} line {lineno}: expected key = value")
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
    required = ("train", "valid", "test", "entities", "relations", "seed", "by_pair")
    missing = [k for k in required if k not in kv]
    if missing:
        raise ParseError(f"{path}: missing manifest keys {missing}")
    resolve = lambda p: os.path.normpath(os.path.join(base, p))
    return SplitManifest(
        resolve(kv["train"]),
        resolve(kv["valid"]),
        resolve(kv["test"]),
        resolve(kv["entities"]),
        resolve(kv["relations"]),
        int(kv["seed"]),
        kv["by_pair"] in ("true", "True", "1"),
    )


# ---------------------------------------------------------------------------
# filter index


class FilterIndex:
    """Set views of known-true triplets for filtered ranking."""

    def __init__(self, triplets: Iterable[Triplet]):
        self._all: set[Triplet] = set()
        self._tails: dict[tuple[int, int], set[int]] = {}
        self._heads: dict[tuple[int, int], set[int]] = {}
        for trip in triplets:
            self.add(trip)

    def add(self, trip: Triplet) -> None:
        trip = Triplet(*trip)
        if trip in self._all:
            return
        self._all.add(trip)
        self._tails.setdefault((trip.head, trip.relation), set()).add(trip.tail)
        self._heads.setdefault((trip.relation, trip.tail), set()).add(trip.head)

    def __contains__(self, trip) -> bool:
        return Triplet(*trip) in self._all

    def __len__(self) -> int:
        return len(self._all)

    def tails_of(self, head: int, relation: int) -> set[int]:
        """Known true tails for (head, relation)."""
        return self._tails.get((head, relation), set())

    def heads_of(self, relation: int, tail: int) -> set[int]:
        """Known true heads for (relation, tail)."""
        return self._heads.get((relation, tail), set())


def build_filter_index(*triplet_lists: Iterable[Triplet]) -> FilterIndex:
    """Union all given triplet lists into one FilterIndex."""
    idx = FilterIndex([])
    for lst in triplet_lists:
        for trip in lst:
            idx.add(trip)
    return idx


# ---------------------------------------------------------------------------
# synthetic graphs


def synth_kg(
    n_entities: int,
    n_relations: int,
    n_clusters: int,
    density: float,
    noise_rate: float,
    seed: int,
):
    """Generate a clustered synthetic KG; returns (triplets, vocab).

    Entity i belongs to cluster i mod n_clusters. Each relation draws a
    (source, target) cluster pair and keeps round(density * n_compatible)
    of its compatible (h, t) pairs, h != t, chosen by seeded shuffle. On
    top of that, round(noise_rate * n_structured) uniform random triplets
    are added, deduplicated against everything emitted so far.
    """
    if n_entities < 2:
        raise DomainError(f"need at least 2 entities, got {n_entities}")
    if n_relations < 1:
        raise DomainError(f"need at least 1 relation, got {n_relations}")
    if not 1 <= n_clusters <= n_entities:
        raise DomainError(f"n_clusters must be in [1, {n_entities}], got {n_clusters}")
    if not 0.0 <= density <= 1.0:
        raise DomainError(f"density must be in [0, 1], got {density}")
    if not 0.0 <= noise_rate <= 1.0:
        raise DomainError(f"noise_rate must be in [0, 1], got {noise_rate}")

    ew = max(4, len(str(n_entities - 1)))
    rw = max(2, len(str(n_relations - 1)))
    entities = [f"E{i:0{ew}d}" for i in range(n_entities)]
    relations = [f"R{i:0{rw}d}" for i in range(n_relations)]
    clusters: list[list[int]] = [[] for _ in range(n_clusters)]
    for i in range(n_entities):
        clusters[i % n_clusters].append(i)

    rng = RngStream(seed)
    triplets: list[Triplet] = []
    seen: set[Triplet] = set()
    for rel in range(n_relations):
        src = int(rng.integers(0, n_clusters))
        tgt = int(rng.integers(0, n_clusters))
        pairs = [(h, t) for h in clusters[src] for t in clusters[tgt] if h != t]
        keep = round(density * len(pairs))
        order = rng.permutation(len(pairs))
        for k in range(keep):
            h, t = pairs[order[k]]
            trip = Triplet(h, rel, t)
            if trip not in seen:
                seen.add(trip)
                triplets.append(trip)

    n_structured = len(triplets)
    n_noise = round(noise_rate * n_structured)
    attempts = 0
    added = 0
    while added < n_noise and attempts < 50 * max(n_noise, 1):
        attempts += 1
        h = int(rng.integers(0, n_entities))
        t = int(rng.integers(0, n_entities))
        rel = int(rng.integers(0, n_relations))
        if h == t:
            continue
        trip = Triplet(h, rel, t)
        if trip in seen:
            continue
        seen.add(trip)
        triplets.append(trip)
        added += 1

    if not triplets:
        raise EmptyDatasetError("synthetic graph came out empty; raise density")
    return triplets, Vocab(entities, relations)
