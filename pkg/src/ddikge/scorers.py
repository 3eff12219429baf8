"""Embedding models and triplet scorers.

Five scorers behind one interface. All scores are "higher is better";
the distance-based models (translation and rotation) return negated
distances. Storage rows are flat float64 vectors:

    transe    entity d           relation d
    distmult  entity d           relation d
    complex   entity 2d [re|im]  relation 2d [re|im]
    simple    entity 2d [head-role|tail-role], relation 2d [forward|inverse]
    rotate    entity 2d [re|im]  relation d (phase angles, unit modulus)
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .backend import kern
from .data import Triplet, Vocab
from .errors import CheckpointError, ConfigError, DomainError, ShapeError
from .rng import RngStream

SCORERS = ("transe", "distmult", "complex", "simple", "rotate")

_HEADER = struct.Struct("<4sI16sIQQQQQ")
_MAGIC = b"DDKG"
_VERSION = 1


def storage_dims(scorer: str, dim: int) -> tuple[int, int]:
    """(entity_dim, relation_dim) of the flat storage for a scorer."""
    if scorer in ("transe", "distmult"):
        return dim, dim
    if scorer in ("complex", "simple"):
        return 2 * dim, 2 * dim
    if scorer == "rotate":
        return 2 * dim, dim
    raise ConfigError(f"unknown scorer {scorer!r}, expected one of {SCORERS}")


def kernel_tag(scorer: str, norm: str = "l2") -> int:
    """Map a scorer name (plus transe norm) to the kernel dispatch tag."""
    if scorer == "transe":
        if norm not in ("l1", "l2"):
            raise ConfigError(f"transe norm must be l1 or l2, got {norm!r}")
        return kern.TRANSE_L1 if norm == "l1" else kern.TRANSE_L2
    tags = {"distmult": kern.DISTMULT, "complex": kern.COMPLEX,
            "simple": kern.SIMPLE, "rotate": kern.ROTATE}
    if scorer not in tags:
        raise ConfigError(f"unknown scorer {scorer!r}, expected one of {SCORERS}")
    return tags[scorer]


@dataclass
class EmbeddingModel:
    """Entity and relation embedding tables for one scorer."""

    scorer: str
    dim: int
    entity_table: np.ndarray
    relation_table: np.ndarray
    norm: str = "l2"

    def __post_init__(self):
        ed, rd = storage_dims(self.scorer, self.dim)
        if self.entity_table.shape[1] != ed:
            raise ShapeError(
                f"{self.scorer} entity rows must have {ed} columns, "
                f"got {self.entity_table.shape}"
            )
        if self.relation_table.shape[1] != rd:
            raise ShapeError(
                f"{self.scorer} relation rows must have {rd} columns, "
                f"got {self.relation_table.shape}"
            )

    @property
    def n_entities(self) -> int:
        return self.entity_table.shape[0]

    @property
    def n_relations(self) -> int:
        return self.relation_table.shape[0]

    @property
    def tag(self) -> int:
        return kernel_tag(self.scorer, self.norm)


def init_model(
    scorer: str,
    n_entities: int,
    n_relations: int,
    dim: int,
    rng: RngStream,
    norm: str = "l2",
) -> EmbeddingModel:
    """Uniform init in [-6/sqrt(d), 6/sqrt(d)], entity table drawn first."""
    if dim < 1:
        raise DomainError(f"dim must be positive, got {dim}")
    if n_entities < 1 or n_relations < 1:
        raise DomainError("need at least one entity and one relation")
    ed, rd = storage_dims(scorer, dim)
    bound = 6.0 / np.sqrt(float(dim))
    ent = (2.0 * rng.uniform((n_entities, ed)) - 1.0) * bound
    rel = (2.0 * rng.uniform((n_relations, rd)) - 1.0) * bound
    return EmbeddingModel(scorer, dim, ent, rel, norm=norm)


# ---------------------------------------------------------------------------
# scoring


def score_vectors(model: EmbeddingModel, h_vec, r_vec, t_vec) -> float:
    """Score raw storage rows; used for soft (mixture) entity vectors too."""
    return float(kern.score_one(
        model.tag,
        np.ascontiguousarray(h_vec, dtype=np.float64),
        np.ascontiguousarray(r_vec, dtype=np.float64),
        np.ascontiguousarray(t_vec, dtype=np.float64),
    ))


def score(model: EmbeddingModel, triplet: Triplet) -> float:
    """Score one (head, relation, tail) id triple."""
    h, r, t = triplet
    return float(kern.score_one(
        model.tag,
        model.entity_table[h],
        model.relation_table[r],
        model.entity_table[t],
    ))


def score_gradients_vectors(model: EmbeddingModel, h_vec, r_vec, t_vec):
    """d(score)/d(h, r, t) for raw storage rows."""
    return kern.grad_one(
        model.tag,
        np.ascontiguousarray(h_vec, dtype=np.float64),
        np.ascontiguousarray(r_vec, dtype=np.float64),
        np.ascontiguousarray(t_vec, dtype=np.float64),
    )


def score_gradients(model: EmbeddingModel, triplet: Triplet):
    """d(score)/d(head row, relation row, tail row) for one triple."""
    h, r, t = triplet
    return kern.grad_one(
        model.tag,
        model.entity_table[h],
        model.relation_table[r],
        model.entity_table[t],
    )


def score_all_candidates(model: EmbeddingModel, triplet: Triplet, side: str) -> np.ndarray:
    """Scores of every entity substituted into one side of the triplet.

    side "tail": head and relation fixed, out[i] = score(h, r, i).
    side "head": relation and tail fixed, out[i] = score(i, r, t).
    Bit-equal to scoring each candidate with score().
    """
    h, r, t = triplet
    rel = model.relation_table[r]
    if side == "tail":
        return kern.sweep_scores(model.tag, model.entity_table, rel, model.entity_table[h], 0)
    if side == "head":
        return kern.sweep_scores(model.tag, model.entity_table, rel, model.entity_table[t], 1)
    raise DomainError(f"side must be 'head' or 'tail', got {side!r}")


# ---------------------------------------------------------------------------
# checkpoints


def config_hash(text: str) -> str:
    """Stable short hash of a resolved config text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def save_checkpoint(path: str, model: EmbeddingModel, seed: int = 0,
                    cfg_hash: str = "") -> None:
    """Write the model as a fixed-layout binary file plus a text sidecar.

    Layout: magic, version, scorer tag, norm flag, then n_entities,
    n_relations, dim, entity_dim, relation_dim as u64, then both tables
    as little-endian float64 in row-major order.
    """
    from .data import _atomic_write_bytes, _atomic_write_text

    tag = model.scorer.encode("ascii").ljust(16, b"\0")
    norm_flag = 1 if (model.scorer == "transe" and model.norm == "l1") else 0
    ed, rd = storage_dims(model.scorer, model.dim)
    header = _HEADER.pack(
        _MAGIC, _VERSION, tag, norm_flag,
        model.n_entities, model.n_relations, model.dim, ed, rd,
    )
    ent = np.ascontiguousarray(model.entity_table, dtype="<f8").tobytes()
    rel = np.ascontiguousarray(model.relation_table, dtype="<f8").tobytes()
    _atomic_write_bytes(path, header + ent + rel)
    manifest = (
        f"scorer = {model.scorer}\n"
        f"norm = {model.norm}\n"
        f"dim = {model.dim}\n"
        f"n_entities = {model.n_entities}\n"
        f"n_relations = {model.n_relations}\n"
        f"seed = {seed}\n"
        f"config_hash = {cfg_hash}\n"
    )
    _atomic_write_text(path + ".manifest", manifest)


def load_checkpoint(path: str) -> EmbeddingModel:
    """Read a checkpoint written by save_checkpoint."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, tag, norm_flag, ne, nr, dim, ed, rd = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    scorer = tag.rstrip(b"\0").decode("ascii")
    if scorer not in SCORERS:
        raise CheckpointError(f"{path}: unknown scorer {scorer!r}")
    if storage_dims(scorer, dim) != (ed, rd):
        raise CheckpointError(f"{path}: dims {(ed, rd)} inconsistent with {scorer}/{dim}")
    want = _HEADER.size + 8 * (ne * ed + nr * rd)
    if len(blob) != want:
        raise CheckpointError(f"{path}: expected {want} bytes, found {len(blob)}")
    off = _HEADER.size
    ent = np.frombuffer(blob, dtype="<f8", count=ne * ed, offset=off)
    rel = np.frombuffer(blob, dtype="<f8", count=nr * rd, offset=off + 8 * ne * ed)
    model = EmbeddingModel(
        scorer, dim,
        ent.astype(np.float64).reshape(ne, ed),
        rel.astype(np.float64).reshape(nr, rd),
        norm="l1" if norm_flag == 1 else "l2",
    )
    return model


# ---------------------------------------------------------------------------
# CSV export


def export_csv(model: EmbeddingModel, vocab: Vocab, ent_path: str, rel_path: str) -> None:
    """Write embeddings as CSV with round-trippable float formatting."""
    from .data import _atomic_write_text

    if vocab.n_entities != model.n_entities or vocab.n_relations != model.n_relations:
        raise ShapeError(
            f"vocab ({vocab.n_entities} entities, {vocab.n_relations} relations) does not "
            f"match model ({model.n_entities}, {model.n_relations})"
        )

    def table_csv(names, table):
        cols = ",".join(f"c{j}" for j in range(table.shape[1]))
        rows = [f"name,{cols}\n"]
        for name, row in zip(names, table):
            vals = ",".join(repr(float(v)) for v in row)
            rows.append(f"{name},{vals}\n")
        return "".join(rows)

    _atomic_write_text(ent_path, table_csv(vocab.entities, model.entity_table))
    _atomic_write_text(rel_path, table_csv(vocab.relations, model.relation_table))
