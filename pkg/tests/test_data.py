"""Ingestion, splitting, filtering, and the synthetic KG generator."""

from __future__ import annotations

import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ddikge.data as dt
from ddikge.data import Triplet
from ddikge.errors import DomainError, EmptyDatasetError, ParseError


SAMPLE = "aspirin\tinhibits\twarfarin\nwarfarin\tboosts\theparin\naspirin\tboosts\theparin\n"


# ---------------------------------------------------------------------------
# parsing


def test_parse_assigns_first_appearance_ids():
    triplets, vocab, report = dt.parse_tsv_text(SAMPLE)
    assert vocab.entities == ["aspirin", "warfarin", "heparin"]
    assert vocab.relations == ["inhibits", "boosts"]
    assert triplets == [Triplet(0, 0, 1), Triplet(1, 1, 2), Triplet(0, 1, 2)]
    assert report.n_lines == 3
    assert report.n_triplets == 3
    assert report.n_duplicates == 0


def test_parse_drops_duplicates_keeping_first():
    text = SAMPLE + "aspirin\tinhibits\twarfarin\n"
    triplets, _, report = dt.parse_tsv_text(text)
    assert len(triplets) == 3
    assert report.n_duplicates == 1


def test_parse_skips_blank_lines_and_tolerates_crlf():
    text = "a\tr\tb\r\n\n   \nb\tr\tc\r\n"
    triplets, vocab, _ = dt.parse_tsv_text(text)
    assert len(triplets) == 2
    assert vocab.entities == ["a", "b", "c"]


def test_parse_header_skip():
    text = "head\trelation\ttail\na\tr\tb\n"
    triplets, vocab, _ = dt.parse_tsv_text(text, has_header=True)
    assert triplets == [Triplet(0, 0, 1)]
    assert vocab.entities == ["a", "b"]


def test_parse_error_names_one_based_line():
    with pytest.raises(ParseError, match="line 2"):
        dt.parse_tsv_text("a\tr\tb\na\tr\n")
    with pytest.raises(ParseError, match="line 1"):
        dt.parse_tsv_text("a\tr\t\n")


def test_parse_error_line_numbers_count_header_and_blanks():
    text = "h\tr\tt\n\na\tr\tb\nbad line\n"
    with pytest.raises(ParseError, match="line 4"):
        dt.parse_tsv_text(text, has_header=True)


def test_round_trip_is_byte_identical(tmp_path):
    triplets, vocab, _ = dt.parse_tsv_text(SAMPLE)
    path = str(tmp_path / "kg.tsv")
    dt.save_tsv(path, triplets, vocab)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        assert fh.read() == SAMPLE
    again, vocab2, _ = dt.load_tsv(path)
    assert again == triplets
    assert vocab2.entities == vocab.entities


def test_load_tsv_with_vocab_maps_and_rejects_unknowns(tmp_path):
    _, vocab, _ = dt.parse_tsv_text(SAMPLE)
    path = str(tmp_path / "extra.tsv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("heparin\tinhibits\taspirin\n")
    assert dt.load_tsv_with_vocab(path, vocab) == [Triplet(2, 0, 0)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("unknown_drug\tinhibits\taspirin\n")
    with pytest.raises(ParseError, match="unknown_drug"):
        dt.load_tsv_with_vocab(path, vocab)


def test_vocab_round_trip(tmp_path):
    _, vocab, _ = dt.parse_tsv_text(SAMPLE)
    dt.save_vocab(str(tmp_path), vocab)
    back = dt.load_vocab(str(tmp_path))
    assert back.entities == vocab.entities
    assert back.relations == vocab.relations
    assert back.entity_ids == vocab.entity_ids


# ---------------------------------------------------------------------------
# splitting


def _id_triplets(n: int) -> list[Triplet]:
    return [Triplet(i, i % 3, (i + 1) % n) for i in range(n)]


def test_split_sizes_use_floor_rule():
    ds = dt.split(_id_triplets(10), (0.8, 0.1, 0.1), seed=0)
    assert (len(ds.train), len(ds.valid), len(ds.test)) == (8, 1, 1)
    # Remainder goes to train: floor quotas for valid and test.
    ds = dt.split(_id_triplets(7), (0.6, 0.2, 0.2), seed=0)
    assert (len(ds.valid), len(ds.test)) == (1, 1)
    assert len(ds.train) == 5


def test_split_sizes_at_deepddi_scale():
    # 192,284 triplets at 80/10/10 cut into 153,828 / 19,228 / 19,228.
    n = 192_284
    n_valid = n_test = int(n * 0.1)
    assert n_valid == 19_228
    assert n - n_valid - n_test == 153_828


def test_split_partitions_without_loss():
    trips = _id_triplets(29)
    ds = dt.split(trips, (0.7, 0.2, 0.1), seed=3)
    assert sorted(ds.all_triplets()) == sorted(trips)
    assert len(set(ds.all_triplets())) == 29


def test_split_is_seed_deterministic():
    trips = _id_triplets(20)
    a = dt.split(trips, seed=5)
    b = dt.split(trips, seed=5)
    c = dt.split(trips, seed=6)
    assert a.train == b.train and a.valid == b.valid and a.test == b.test
    assert a.train != c.train


def test_split_by_pair_keeps_pairs_whole():
    trips = []
    for h in range(6):
        for t in range(h + 1, 6):
            trips.append(Triplet(h, 0, t))
            trips.append(Triplet(t, 1, h))  # same unordered pair, other direction
    ds = dt.split(trips, (0.6, 0.2, 0.2), seed=1, by_pair=True)
    seen = {}
    for name, part in (("train", ds.train), ("valid", ds.valid), ("test", ds.test)):
        for trip in part:
            key = (min(trip.head, trip.tail), max(trip.head, trip.tail))
            assert seen.setdefault(key, name) == name
    assert sorted(ds.all_triplets()) == sorted(trips)


def test_split_validation():
    with pytest.raises(EmptyDatasetError):
        dt.split(_id_triplets(2))
    with pytest.raises(DomainError):
        dt.split(_id_triplets(5), (0.5, 0.2, 0.2))
    with pytest.raises(DomainError):
        dt.split(_id_triplets(5), (1.2, -0.1, -0.1))


@given(st.integers(3, 60), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_split_property_sizes_and_partition(n, seed):
    trips = _id_triplets(n)
    ds = dt.split(trips, (0.8, 0.1, 0.1), seed=seed)
    assert len(ds.valid) == n // 10
    assert len(ds.test) == n // 10
    assert sorted(ds.all_triplets()) == sorted(trips)


def test_manifest_round_trip_relocates_paths(tmp_path):
    man = dt.SplitManifest(
        str(tmp_path / "train.tsv"), str(tmp_path / "valid.tsv"),
        str(tmp_path / "test.tsv"), str(tmp_path / "entities.tsv"),
        str(tmp_path / "relations.tsv"), seed=17, by_pair=True,
    )
    path = str(tmp_path / "split.manifest")
    dt.write_split_manifest(path, man)
    back = dt.read_split_manifest(path)
    assert back == man
    # Stored paths are relative, so the manifest text has no tmp_path prefix.
    with open(path, "r", encoding="utf-8") as fh:
        assert str(tmp_path) not in fh.read()


def test_manifest_missing_key_rejected(tmp_path):
    path = str(tmp_path / "bad.manifest")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("train = t.tsv\n")
    with pytest.raises(ParseError, match="missing"):
        dt.read_split_manifest(path)


# ---------------------------------------------------------------------------
# filter index


def test_filter_index_matches_linear_scan(rank_kg):
    triplets, _, _, index = rank_kg
    store = set(triplets)
    for trip in triplets[:50]:
        assert trip in index
        assert index.tails_of(trip.head, trip.relation) == {
            t.tail for t in store if t.head == trip.head and t.relation == trip.relation
        }
        assert index.heads_of(trip.relation, trip.tail) == {
            t.head for t in store if t.relation == trip.relation and t.tail == trip.tail
        }
    assert Triplet(10**6, 0, 0) not in index


def test_filter_index_add_is_idempotent():
    index = dt.FilterIndex([])
    index.add(Triplet(1, 2, 3))
    index.add(Triplet(1, 2, 3))
    assert len(index) == 1
    assert index.tails_of(1, 2) == {3}
    assert index.heads_of(2, 3) == {1}


def test_build_filter_index_unions_lists():
    index = dt.build_filter_index([Triplet(0, 0, 1)], [Triplet(0, 0, 2)])
    assert index.tails_of(0, 0) == {1, 2}


# ---------------------------------------------------------------------------
# synthetic KG


def test_synth_kg_is_deterministic():
    a, va = dt.synth_kg(40, 4, 3, 0.2, 0.1, seed=9)
    b, vb = dt.synth_kg(40, 4, 3, 0.2, 0.1, seed=9)
    assert a == b
    assert va.entities == vb.entities
    c, _ = dt.synth_kg(40, 4, 3, 0.2, 0.1, seed=10)
    assert a != c


def test_synth_kg_ids_in_range_no_self_loops_no_duplicates():
    triplets, vocab = dt.synth_kg(30, 5, 4, 0.25, 0.1, seed=2)
    assert len(set(triplets)) == len(triplets)
    for h, r, t in triplets:
        assert 0 <= h < 30 and 0 <= t < 30 and 0 <= r < 5
    # Structured triplets never connect an entity to itself; only noise may.
    structured = [x for x in triplets if x.head != x.tail]
    assert len(structured) >= 0.9 * len(triplets)


def test_synth_kg_respects_cluster_structure():
    triplets, _ = dt.synth_kg(60, 6, 3, 0.3, 0.0, seed=4)
    # With no noise, each relation connects exactly one (source, target)
    # cluster pair under entity i -> cluster i mod 3.
    by_rel: dict[int, set[tuple[int, int]]] = {}
    for h, r, t in triplets:
        by_rel.setdefault(r, set()).add((h % 3, t % 3))
    for pairs in by_rel.values():
        assert len(pairs) == 1


def test_synth_kg_validation():
    with pytest.raises(DomainError):
        dt.synth_kg(10, 2, 20, 0.2, 0.0, seed=0)  # more clusters than entities
    with pytest.raises(DomainError):
        dt.synth_kg(10, 2, 2, 1.5, 0.0, seed=0)  # density above 1
    with pytest.raises(DomainError):
        dt.synth_kg(10, 2, 2, 0.2, -0.1, seed=0)  # negative noise


def test_synth_kg_names_are_zero_padded():
    _, vocab = dt.synth_kg(12, 3, 2, 0.3, 0.0, seed=1)
    assert all(name.startswith("E") and len(name) == 5 for name in vocab.entities)
    assert all(name.startswith("R") and len(name) == 3 for name in vocab.relations)


# ---------------------------------------------------------------------------
# atomic writes


def test_atomic_write_leaves_no_temp_files(tmp_path):
    _, vocab, _ = dt.parse_tsv_text(SAMPLE)
    dt.save_vocab(str(tmp_path), vocab)
    leftovers = [n for n in os.listdir(tmp_path) if "tmp" in n.lower()]
    assert leftovers == []
