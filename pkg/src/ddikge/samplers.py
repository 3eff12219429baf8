"""Negative sampling: uniform, self-adversarial, and adversarial autoencoder.

The autoencoder sampler generates corrupted entities instead of drawing
them: the given entity and relation rows (from sampler-private tables)
are stacked into a 2-row image, convolved, projected to entity logits,
and pushed through Gumbel-Softmax. The soft output keeps the whole
pipeline differentiable; argmax gives the hard corrupted id. A linear
decoder reconstructs the one-hot input from the soft output, giving the
autoencoder its reconstruction loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics as nk
from .data import Triplet
from .errors import DomainError, ShapeError
from .rng import RngStream

SAMPLERS = ("uniform", "self_adversarial", "aae")


@dataclass
class NegativeSample:
    """A corrupted triplet; soft holds the mixture weights when generated."""

    triplet: Triplet
    side: str
    soft: np.ndarray | None = None


# ---------------------------------------------------------------------------
# baseline samplers


def uniform_corrupt(
    triplet: Triplet,
    n_entities: int,
    rng: RngStream,
    side: str | None = None,
    n: int = 1,
) -> list[NegativeSample]:
    """Replace one side with a uniform entity, never the original one."""
    if n_entities < 2:
        raise DomainError(f"need at least 2 entities to corrupt, got {n_entities}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    out = []
    for _ in range(n):
        s = side if side is not None else ("head" if rng.integers(0, 2) == 0 else "tail")
        if s not in ("head", "tail"):
            raise DomainError(f"side must be 'head' or 'tail', got {s!r}")
        orig = triplet.head if s == "head" else triplet.tail
        c = int(rng.integers(0, n_entities - 1))
        if c >= orig:
            c += 1
        if s == "head":
            out.append(NegativeSample(Triplet(c, triplet.relation, triplet.tail), s))
        else:
            out.append(NegativeSample(Triplet(triplet.head, triplet.relation, c), s))
    return out


def self_adversarial_weights(scores, alpha: float) -> np.ndarray:
    """softmax(alpha * scores) over a set of negatives.

    The caller treats the weights as constants (no gradient flows through
    them). alpha = 0 recovers uniform weights.
    """
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.shape[0] == 0:
        raise ShapeError(f"scores must be a non-empty vector, got shape {scores.shape}")
    if alpha < 0.0:
        raise DomainError(f"alpha must be non-negative, got {alpha}")
    return nk.softmax(alpha * scores, 1.0)


# ---------------------------------------------------------------------------
# Gumbel-Softmax


def gumbel_softmax_sample(logits, tau: float, rng: RngStream | None = None, noise=None):
    """softmax((logits + g) / tau) with g standard Gumbel noise.

    Fresh noise is drawn from rng unless an explicit noise vector is given
    (test hook; zeros recover plain tempered softmax).
    """
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    if noise is None:
        if rng is None:
            raise DomainError("gumbel_softmax_sample needs rng when noise is not given")
        noise = nk.gumbel_noise(logits.shape[0], rng)
    else:
        noise = np.ascontiguousarray(noise, dtype=np.float64)
        if noise.shape != logits.shape:
            raise ShapeError(f"noise {noise.shape} does not match logits {logits.shape}")
    return nk.softmax(logits + noise, tau)


def soft_embedding_lookup(entity_table, soft) -> np.ndarray:
    """Convex combination of entity rows: sum_i soft[i] * table[i]."""
    entity_table = np.ascontiguousarray(entity_table, dtype=np.float64)
    soft = np.ascontiguousarray(soft, dtype=np.float64)
    if soft.shape[0] != entity_table.shape[0]:
        raise ShapeError(
            f"soft weights {soft.shape} do not match table {entity_table.shape}"
        )
    return nk.matvec_t(entity_table, soft)


# ---------------------------------------------------------------------------
# generator


@dataclass
class GeneratorParams:
    """Sampler-private embeddings plus the conv/projection stack."""

    entity_table: np.ndarray    # (n_entities, dim)
    relation_table: np.ndarray  # (n_relations, dim)
    filters: np.ndarray         # (n_filters, kh, kw)
    projection: np.ndarray      # (feature_len, n_entities)
    tau: float = 1.0

    def __post_init__(self):
        if self.tau <= 0.0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        dim = self.entity_table.shape[1]
        if self.relation_table.shape[1] != dim:
            raise ShapeError("generator entity and relation dims differ")
        nf, kh, kw = self.filters.shape
        if kh > 2 or kw > dim:
            raise ShapeError(f"filters {self.filters.shape} exceed the (2, {dim}) input")
        if self.projection.shape != (self.feature_len, self.entity_table.shape[0]):
            raise ShapeError(
                f"projection must be {(self.feature_len, self.entity_table.shape[0])}, "
                f"got {self.projection.shape}"
            )

    @property
    def feature_len(self) -> int:
        nf, kh, kw = self.filters.shape
        dim = self.entity_table.shape[1]
        return nf * (2 - kh + 1) * (dim - kw + 1)


@dataclass
class GeneratorContext:
    """Activations of one generator forward pass, kept for the backward."""

    entity: int
    relation: int
    side: str
    x: np.ndarray
    feat: np.ndarray
    tvec: np.ndarray
    logits: np.ndarray
    noise: np.ndarray
    soft: np.ndarray
    corrupted: int


@dataclass
class GeneratorGrads:
    """Per-sample generator gradients (projection as a dense outer product)."""

    entity_row: np.ndarray
    relation_row: np.ndarray
    filters: np.ndarray
    projection: np.ndarray


def init_generator(
    n_entities: int,
    n_relations: int,
    dim: int,
    rng: RngStream,
    n_filters: int = 8,
    kh: int = 2,
    kw: int = 3,
    tau: float = 1.0,
) -> GeneratorParams:
    """Uniform init, bound 6/sqrt(fan) per tensor; draw order is pinned."""
    if kw > dim:
        raise DomainError(f"filter width {kw} exceeds embedding dim {dim}")
    if kh not in (1, 2):
        raise DomainError(f"filter height must be 1 or 2, got {kh}")
    if n_filters < 1:
        raise DomainError(f"need at least one filter, got {n_filters}")
    b_emb = 6.0 / np.sqrt(float(dim))
    ent = (2.0 * rng.uniform((n_entities, dim)) - 1.0) * b_emb
    rel = (2.0 * rng.uniform((n_relations, dim)) - 1.0) * b_emb
    b_f = 6.0 / np.sqrt(float(kh * kw))
    filters = (2.0 * rng.uniform((n_filters, kh, kw)) - 1.0) * b_f
    flen = n_filters * (2 - kh + 1) * (dim - kw + 1)
    b_w = 6.0 / np.sqrt(float(flen))
    proj = (2.0 * rng.uniform((flen, n_entities)) - 1.0) * b_w
    return GeneratorParams(ent, rel, filters, proj, tau)


def generator_forward(
    gen: GeneratorParams,
    entity: int,
    relation: int,
    side: str,
    rng: RngStream | None = None,
    noise=None,
) -> GeneratorContext:
    """Generate a soft corrupted entity for the open slot of a triplet.

    side "tail": entity is the head, the generated id replaces the tail.
    side "head": entity is the tail, the generated id replaces the head.
    Row 0 of the conv input is the given entity, row 1 the relation.
    """
    if side not in ("head", "tail"):
        raise DomainError(f"side must be 'head' or 'tail', got {side!r}")
    x = np.stack([gen.entity_table[entity], gen.relation_table[relation]])
    feat = nk.conv2d(x, gen.filters)
    tvec = np.ascontiguousarray(feat.ravel())
    logits = nk.matvec_t(gen.projection, tvec)
    if noise is None:
        if rng is None:
            raise DomainError("generator_forward needs rng when noise is not given")
        noise = nk.gumbel_noise(logits.shape[0], rng)
    else:
        noise = np.ascontiguousarray(noise, dtype=np.float64)
        if noise.shape != logits.shape:
            raise ShapeError(f"noise {noise.shape} does not match logits {logits.shape}")
    soft = nk.softmax(logits + noise, gen.tau)
    corrupted = int(np.argmax(soft))
    return GeneratorContext(entity, relation, side, x, feat, tvec, logits, noise,
                            soft, corrupted)


def generator_sample(
    gen: GeneratorParams,
    triplet: Triplet,
    side: str,
    rng: RngStream | None = None,
    noise=None,
) -> tuple[NegativeSample, GeneratorContext]:
    """Corrupt one side of a full triplet through the generator."""
    given = triplet.head if side == "tail" else triplet.tail
    ctx = generator_forward(gen, given, triplet.relation, side, rng=rng, noise=noise)
    if side == "tail":
        neg = Triplet(triplet.head, triplet.relation, ctx.corrupted)
    else:
        neg = Triplet(ctx.corrupted, triplet.relation, triplet.tail)
    return NegativeSample(neg, side, ctx.soft), ctx


def generator_backward(gen: GeneratorParams, ctx: GeneratorContext, grad_soft) -> GeneratorGrads:
    """Backprop d(loss)/d(soft) to the generator parameters.

    Gumbel noise is a constant of the pass, so the softmax backward covers
    the sampling step exactly.
    """
    grad_logits = nk.softmax_backward(ctx.soft, grad_soft, gen.tau)
    grad_tvec = nk.matvec(gen.projection, grad_logits)
    grad_proj = np.outer(ctx.tvec, grad_logits)
    grad_feat = grad_tvec.reshape(ctx.feat.shape)
    gx, gf = nk.conv2d_backward(ctx.x, gen.filters, grad_feat)
    return GeneratorGrads(gx[0], gx[1], gf, grad_proj)


# ---------------------------------------------------------------------------
# decoder


@dataclass
class DecoderParams:
    """Two literal linear layers: soft entity -> hidden -> both one-hots."""

    w1: np.ndarray  # (hidden, n_entities)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n_entities + n_relations, hidden)
    b2: np.ndarray  # (n_entities + n_relations,)
    n_entities: int
    n_relations: int

    def __post_init__(self):
        hidden = self.w1.shape[0]
        if self.w1.shape != (hidden, self.n_entities):
            raise ShapeError(f"w1 must be (hidden, {self.n_entities}), got {self.w1.shape}")
        if self.w2.shape != (self.n_entities + self.n_relations, hidden):
            raise ShapeError(
                f"w2 must be ({self.n_entities + self.n_relations}, {hidden}), "
                f"got {self.w2.shape}"
            )
        if self.b1.shape != (hidden,) or self.b2.shape != (self.n_entities + self.n_relations,):
            raise ShapeError("decoder bias shapes do not match the weights")


@dataclass
class DecoderGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    soft: np.ndarray


def init_decoder(n_entities: int, n_relations: int, hidden: int, rng: RngStream) -> DecoderParams:
    """Uniform init, bound 6/sqrt(fan_in); biases start at zero."""
    if hidden < 1:
        raise DomainError(f"hidden size must be positive, got {hidden}")
    b1w = 6.0 / np.sqrt(float(n_entities))
    w1 = (2.0 * rng.uniform((hidden, n_entities)) - 1.0) * b1w
    b2w = 6.0 / np.sqrt(float(hidden))
    w2 = (2.0 * rng.uniform((n_entities + n_relations, hidden)) - 1.0) * b2w
    return DecoderParams(w1, np.zeros(hidden), w2, np.zeros(n_entities + n_relations),
                         n_entities, n_relations)


def decoder_forward(dec: DecoderParams, soft):
    """Returns (reconstruction over entity+relation slots, hidden activations)."""
    soft = np.ascontiguousarray(soft, dtype=np.float64)
    h1 = nk.matvec(dec.w1, soft) + dec.b1
    out = nk.matvec(dec.w2, h1) + dec.b2
    return out, h1


def decoder_backward(dec: DecoderParams, soft, h1, grad_out) -> DecoderGrads:
    """Backprop through both linear layers."""
    grad_out = np.ascontiguousarray(grad_out, dtype=np.float64)
    gw2 = np.outer(grad_out, h1)
    gh1 = nk.matvec_t(dec.w2, grad_out)
    gw1 = np.outer(gh1, soft)
    gsoft = nk.matvec_t(dec.w1, gh1)
    return DecoderGrads(gw1, gh1, gw2, grad_out.copy(), gsoft)


def reconstruction_target(entity: int, relation: int, n_entities: int, n_relations: int) -> np.ndarray:
    """Concatenated one-hots of the given entity and relation."""
    x = np.zeros(n_entities + n_relations)
    x[entity] = 1.0
    x[n_entities + relation] = 1.0
    return x


def reconstruction_loss_and_grad(recon, target):
    """Squared reconstruction error and its gradient wrt the reconstruction."""
    loss = nk.sq_diff_sum(recon, target)
    return loss, 2.0 * (np.asarray(recon, dtype=np.float64) - np.asarray(target, dtype=np.float64))
