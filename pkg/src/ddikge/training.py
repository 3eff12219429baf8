"""Training loops.

Two families share the embedding model and scorers:

* Baselines ("uniform", "self_adversarial"): per positive, draw corrupted
  triplets and minimize the margin logistic loss. Self-adversarial
  weighting multiplies each negative's term by softmax(alpha * score),
  treated as a constant.

* Adversarial autoencoder ("aae"): per mini-batch, three phases in order.
  (1) autoencoder: update generator and decoder on the reconstruction
  loss; (2) critic: n_dis updates of the embedding model on the
  Wasserstein objective D(fake) - D(real), each followed by weight
  clipping; (3) generator: update the generator alone on -D(fake).
  The fake triplet enters the critic through a soft embedding lookup,
  so critic gradients reach every entity row and generator gradients
  flow through the Gumbel-Softmax output.

All updates are mean-of-batch gradients applied with per-parameter
Adagrad. Every random draw comes from one seeded stream in a pinned
order, so a run is reproducible bit for bit.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nk
from .data import Triplet
from .errors import ConfigError, DataError, EmptyDatasetError, TrainingError
from .rng import RngStream
from .samplers import (
    SAMPLERS,
    DecoderParams,
    GeneratorParams,
    decoder_backward,
    decoder_forward,
    generator_backward,
    generator_forward,
    init_decoder,
    init_generator,
    reconstruction_loss_and_grad,
    reconstruction_target,
    self_adversarial_weights,
    soft_embedding_lookup,
    uniform_corrupt,
)
from .scorers import (
    SCORERS,
    EmbeddingModel,
    init_model,
    score_gradients,
    score_gradients_vectors,
    score_vectors,
)


@dataclass
class TrainConfig:
    scorer: str = "complex"
    sampler: str = "uniform"
    dim: int = 200
    epochs: int = 100
    batch_size: int = 512
    lr_gen: float = 0.001       # autoencoder and generator phases
    lr_disc: float = 0.05       # critic / baseline embedding updates
    n_dis: int = 1              # critic updates per batch
    clip: float = 1.0           # critic weight clip bound
    clip_scope: str = "embeddings"  # embeddings | none
    tau: float = 1.0            # Gumbel-Softmax temperature
    margin: float = 1.0         # gamma in the logistic loss
    adv_alpha: float = 1.0      # self-adversarial weighting temperature
    n_neg: int = 1              # negatives per positive (baselines)
    transe_norm: str = "l2"
    n_filters: int = 8
    filter_kh: int = 2
    filter_kw: int = 3
    decoder_hidden: int = 0     # 0 means 2 * dim
    seed: int = 0
    checkpoint_every: int = 0   # epochs between snapshots; 0 = final only

    def validate(self) -> None:
        if self.scorer not in SCORERS:
            raise ConfigError(f"unknown scorer {self.scorer!r}, expected one of {SCORERS}")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"unknown sampler {self.sampler!r}, expected one of {SAMPLERS}")
        if self.transe_norm not in ("l1", "l2"):
            raise ConfigError(f"transe_norm must be l1 or l2, got {self.transe_norm!r}")
        if self.clip_scope not in ("embeddings", "none"):
            raise ConfigError(f"clip_scope must be embeddings or none, got {self.clip_scope!r}")
        positive = {"dim": self.dim, "batch_size": self.batch_size, "n_dis": self.n_dis,
                    "tau": self.tau, "n_neg": self.n_neg, "n_filters": self.n_filters,
                    "filter_kw": self.filter_kw}
        for name, val in positive.items():
            if val <= 0:
                raise ConfigError(f"{name} must be positive, got {val}")
        non_negative = {"epochs": self.epochs, "lr_gen": self.lr_gen,
                        "lr_disc": self.lr_disc, "margin": self.margin,
                        "adv_alpha": self.adv_alpha, "seed": self.seed,
                        "decoder_hidden": self.decoder_hidden,
                        "checkpoint_every": self.checkpoint_every}
        for name, val in non_negative.items():
            if val < 0:
                raise ConfigError(f"{name} must be non-negative, got {val}")
        if self.filter_kh not in (1, 2):
            raise ConfigError(f"filter_kh must be 1 or 2, got {self.filter_kh}")
        if self.clip_scope == "embeddings" and self.clip <= 0:
            raise ConfigError(f"clip must be positive, got {self.clip}")

    def hidden_size(self) -> int:
        return self.decoder_hidden if self.decoder_hidden > 0 else 2 * self.dim


@dataclass
class EpochReport:
    """Per-epoch mean losses; unused phases report 0.0."""

    epoch: int
    loss: float
    recon_loss: float
    critic_loss: float
    generator_loss: float
    seconds: float


EPOCH_CSV_HEADER = "epoch,loss,recon_loss,critic_loss,generator_loss,seconds\n"


def reports_to_csv(reports: list[EpochReport]) -> str:
    rows = [EPOCH_CSV_HEADER]
    for r in reports:
        rows.append(
            f"{r.epoch},{r.loss!r},{r.recon_loss!r},{r.critic_loss!r},"
            f"{r.generator_loss!r},{r.seconds!r}\n"
        )
    return "".join(rows)


@dataclass
class TrainResult:
    model: EmbeddingModel
    reports: list[EpochReport]
    generator: GeneratorParams | None = None
    decoder: DecoderParams | None = None


# ---------------------------------------------------------------------------
# stable scalar helpers (shared by both kernel backends)


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _softplus(z: float) -> float:
    if z > 0.0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


def _draw_sides(rng: RngStream, n: int) -> list[str]:
    flags = rng.integers(0, 2, n)
    return ["head" if f == 0 else "tail" for f in flags]


def _given_entity(trip: Triplet, side: str) -> int:
    return trip.head if side == "tail" else trip.tail


# ---------------------------------------------------------------------------
# adversarial autoencoder phase updates


def update_autoencoder(
    gen: GeneratorParams,
    dec: DecoderParams,
    batch: list[Triplet],
    states: dict,
    lr: float,
    rng: RngStream | None,
    sides: list[str] | None = None,
    noises: list | None = None,
):
    """One mean-batch Adagrad step on generator and decoder parameters.

    Minimizes the squared reconstruction of the (entity, relation) one-hot
    input from the generated soft entity. Returns (gen, dec, mean loss).
    """
    mb = len(batch)
    if sides is None:
        sides = _draw_sides(rng, mb)
    n_ent, n_rel = dec.n_entities, dec.n_relations
    g_ent = np.zeros_like(gen.entity_table)
    g_rel = np.zeros_like(gen.relation_table)
    g_fil = np.zeros_like(gen.filters)
    g_proj = np.zeros_like(gen.projection)
    g_w1 = np.zeros_like(dec.w1)
    g_b1 = np.zeros_like(dec.b1)
    g_w2 = np.zeros_like(dec.w2)
    g_b2 = np.zeros_like(dec.b2)
    loss_sum = 0.0
    for i, trip in enumerate(batch):
        side = sides[i]
        given = _given_entity(trip, side)
        noise = noises[i] if noises is not None else None
        ctx = generator_forward(gen, given, trip.relation, side, rng=rng, noise=noise)
        recon, h1 = decoder_forward(dec, ctx.soft)
        target = reconstruction_target(given, trip.relation, n_ent, n_rel)
        loss, grad_out = reconstruction_loss_and_grad(recon, target)
        loss_sum += loss
        dg = decoder_backward(dec, ctx.soft, h1, grad_out)
        gg = generator_backward(gen, ctx, dg.soft)
        g_ent[given] += gg.entity_row
        g_rel[trip.relation] += gg.relation_row
        g_fil += gg.filters
        g_proj += gg.projection
        g_w1 += dg.w1
        g_b1 += dg.b1
        g_w2 += dg.w2
        g_b2 += dg.b2
    inv = 1.0 / mb
    gen = dataclasses.replace(
        gen,
        entity_table=nk.adagrad_step(gen.entity_table, g_ent * inv, states["gen.entity"], lr, "gen.entity"),
        relation_table=nk.adagrad_step(gen.relation_table, g_rel * inv, states["gen.relation"], lr, "gen.relation"),
        filters=nk.adagrad_step(gen.filters, g_fil * inv, states["gen.filters"], lr, "gen.filters"),
        projection=nk.adagrad_step(gen.projection, g_proj * inv, states["gen.projection"], lr, "gen.projection"),
    )
    dec = dataclasses.replace(
        dec,
        w1=nk.adagrad_step(dec.w1, g_w1 * inv, states["dec.w1"], lr, "dec.w1"),
        b1=nk.adagrad_step(dec.b1, g_b1 * inv, states["dec.b1"], lr, "dec.b1"),
        w2=nk.adagrad_step(dec.w2, g_w2 * inv, states["dec.w2"], lr, "dec.w2"),
        b2=nk.adagrad_step(dec.b2, g_b2 * inv, states["dec.b2"], lr, "dec.b2"),
    )
    return gen, dec, loss_sum * inv


def _negative_path(model: EmbeddingModel, trip: Triplet, side: str, svec):
    """Score and gradients of a triplet whose `side` slot holds a soft vector.

    Returns (score, grad_given_row, grad_relation_row, grad_soft_vec)."""
    rel = model.relation_table[trip.relation]
    if side == "tail":
        h = model.entity_table[trip.head]
        s = score_vectors(model, h, rel, svec)
        gh, gr, gt = score_gradients_vectors(model, h, rel, svec)
        return s, gh, gr, gt
    t = model.entity_table[trip.tail]
    s = score_vectors(model, svec, rel, t)
    gh, gr, gt = score_gradients_vectors(model, svec, rel, t)
    return s, gt, gr, gh


def update_discriminator(
    model: EmbeddingModel,
    gen: GeneratorParams,
    batch: list[Triplet],
    states: dict,
    lr: float,
    clip: float,
    clip_scope: str,
    rng: RngStream | None,
    sides: list[str] | None = None,
    noises: list | None = None,
):
    """One critic step: minimize D(fake) - D(real), then clip the weights.

    Only the embedding model moves; the generator is frozen. The fake
    entity enters as a soft lookup, so its gradient densely touches the
    entity table. Returns (model, mean loss).
    """
    mb = len(batch)
    if sides is None:
        sides = _draw_sides(rng, mb)
    g_ent = np.zeros_like(model.entity_table)
    g_rel = np.zeros_like(model.relation_table)
    loss_sum = 0.0
    for i, trip in enumerate(batch):
        side = sides[i]
        given = _given_entity(trip, side)
        noise = noises[i] if noises is not None else None
        ctx = generator_forward(gen, given, trip.relation, side, rng=rng, noise=noise)
        svec = soft_embedding_lookup(model.entity_table, ctx.soft)

        s_pos = score_vectors(
            model,
            model.entity_table[trip.head],
            model.relation_table[trip.relation],
            model.entity_table[trip.tail],
        )
        ph, pr, pt = score_gradients(model, trip)
        s_neg, g_given, g_rel_row, g_soft_vec = _negative_path(model, trip, side, svec)
        loss_sum += s_neg - s_pos

        g_ent[trip.head] -= ph
        g_rel[trip.relation] -= pr
        g_ent[trip.tail] -= pt
        g_ent[given] += g_given
        g_rel[trip.relation] += g_rel_row
        g_ent += ctx.soft[:, None] * g_soft_vec[None, :]
    inv = 1.0 / mb
    ent = nk.adagrad_step(model.entity_table, g_ent * inv, states["model.entity"], lr, "model.entity")
    rel = nk.adagrad_step(model.relation_table, g_rel * inv, states["model.relation"], lr, "model.relation")
    if clip_scope == "embeddings":
        ent = nk.clip_params(ent, clip)
        rel = nk.clip_params(rel, clip)
    model = EmbeddingModel(model.scorer, model.dim, ent, rel, norm=model.norm)
    return model, loss_sum * inv


def update_generator(
    model: EmbeddingModel,
    gen: GeneratorParams,
    batch: list[Triplet],
    states: dict,
    lr: float,
    rng: RngStream | None,
    sides: list[str] | None = None,
    noises: list | None = None,
):
    """One generator step: minimize -D(fake) with the critic frozen.

    The decoder is untouched in this phase. Returns (gen, mean loss).
    """
    mb = len(batch)
    if sides is None:
        sides = _draw_sides(rng, mb)
    g_ent = np.zeros_like(gen.entity_table)
    g_rel = np.zeros_like(gen.relation_table)
    g_fil = np.zeros_like(gen.filters)
    g_proj = np.zeros_like(gen.projection)
    loss_sum = 0.0
    for i, trip in enumerate(batch):
        side = sides[i]
        given = _given_entity(trip, side)
        noise = noises[i] if noises is not None else None
        ctx = generator_forward(gen, given, trip.relation, side, rng=rng, noise=noise)
        svec = soft_embedding_lookup(model.entity_table, ctx.soft)
        s_neg, _, _, g_soft_vec = _negative_path(model, trip, side, svec)
        loss_sum += -s_neg
        grad_soft = -nk.matvec(model.entity_table, g_soft_vec)
        gg = generator_backward(gen, ctx, grad_soft)
        g_ent[given] += gg.entity_row
        g_rel[trip.relation] += gg.relation_row
        g_fil += gg.filters
        g_proj += gg.projection
    inv = 1.0 / mb
    gen = dataclasses.replace(
        gen,
        entity_table=nk.adagrad_step(gen.entity_table, g_ent * inv, states["gen.entity"], lr, "gen.entity"),
        relation_table=nk.adagrad_step(gen.relation_table, g_rel * inv, states["gen.relation"], lr, "gen.relation"),
        filters=nk.adagrad_step(gen.filters, g_fil * inv, states["gen.filters"], lr, "gen.filters"),
        projection=nk.adagrad_step(gen.projection, g_proj * inv, states["gen.projection"], lr, "gen.projection"),
    )
    return gen, loss_sum * inv


# ---------------------------------------------------------------------------
# baseline update


def update_baseline_batch(
    model: EmbeddingModel,
    batch: list[Triplet],
    states: dict,
    cfg: TrainConfig,
    rng: RngStream,
):
    """Margin logistic loss over a batch with drawn corruptions.

    Per positive: softplus(-(margin + s_pos)) plus the weighted sum of
    softplus(margin + s_neg) over n_neg negatives. Weights are 1/n_neg
    for the uniform sampler and softmax(adv_alpha * scores), held
    constant, for the self-adversarial one. Returns (model, mean loss).
    """
    mb = len(batch)
    g_ent = np.zeros_like(model.entity_table)
    g_rel = np.zeros_like(model.relation_table)
    gamma = cfg.margin
    loss_sum = 0.0
    for trip in batch:
        s_pos = score_vectors(
            model,
            model.entity_table[trip.head],
            model.relation_table[trip.relation],
            model.entity_table[trip.tail],
        )
        ph, pr, pt = score_gradients(model, trip)
        loss = _softplus(-(gamma + s_pos))
        coef_pos = -_sigmoid(-(gamma + s_pos))
        g_ent[trip.head] += coef_pos * ph
        g_rel[trip.relation] += coef_pos * pr
        g_ent[trip.tail] += coef_pos * pt

        negs = uniform_corrupt(trip, model.n_entities, rng, n=cfg.n_neg)
        neg_scores = np.array([score_vectors(
            model,
            model.entity_table[ns.triplet.head],
            model.relation_table[ns.triplet.relation],
            model.entity_table[ns.triplet.tail],
        ) for ns in negs])
        if cfg.sampler == "self_adversarial":
            weights = self_adversarial_weights(neg_scores, cfg.adv_alpha)
        else:
            weights = np.full(len(negs), 1.0 / len(negs))
        for ns, s_neg, w in zip(negs, neg_scores, weights):
            loss += w * _softplus(gamma + s_neg)
            coef = w * _sigmoid(gamma + s_neg)
            nh, nr, nt = score_gradients(model, ns.triplet)
            g_ent[ns.triplet.head] += coef * nh
            g_rel[ns.triplet.relation] += coef * nr
            g_ent[ns.triplet.tail] += coef * nt
        loss_sum += loss
    inv = 1.0 / mb
    ent = nk.adagrad_step(model.entity_table, g_ent * inv, states["model.entity"], lr=cfg.lr_disc, name="model.entity")
    rel = nk.adagrad_step(model.relation_table, g_rel * inv, states["model.relation"], lr=cfg.lr_disc, name="model.relation")
    model = EmbeddingModel(model.scorer, model.dim, ent, rel, norm=model.norm)
    return model, loss_sum * inv


# ---------------------------------------------------------------------------
# full loop


def _init_states(model: EmbeddingModel, gen: GeneratorParams | None,
                 dec: DecoderParams | None) -> dict:
    states = {
        "model.entity": nk.AdagradState.zeros_like(model.entity_table),
        "model.relation": nk.AdagradState.zeros_like(model.relation_table),
    }
    if gen is not None:
        states.update({
            "gen.entity": nk.AdagradState.zeros_like(gen.entity_table),
            "gen.relation": nk.AdagradState.zeros_like(gen.relation_table),
            "gen.filters": nk.AdagradState.zeros_like(gen.filters),
            "gen.projection": nk.AdagradState.zeros_like(gen.projection),
        })
    if dec is not None:
        states.update({
            "dec.w1": nk.AdagradState.zeros_like(dec.w1),
            "dec.b1": nk.AdagradState.zeros_like(dec.b1),
            "dec.w2": nk.AdagradState.zeros_like(dec.w2),
            "dec.b2": nk.AdagradState.zeros_like(dec.b2),
        })
    return states


def train(
    triplets: list[Triplet],
    n_entities: int,
    n_relations: int,
    cfg: TrainConfig,
    on_epoch=None,
) -> TrainResult:
    """Train an embedding model on id triplets; see the module docstring.

    One epoch is a full shuffled pass in batches of cfg.batch_size (the
    last batch may be short). With epochs=0 the initialized model is
    returned untouched. on_epoch(report, result) runs after each epoch.
    """
    cfg.validate()
    if not triplets:
        raise EmptyDatasetError("cannot train on an empty triplet list")
    for trip in triplets:
        if not (0 <= trip.head < n_entities and 0 <= trip.tail < n_entities
                and 0 <= trip.relation < n_relations):
            raise DataError(f"triplet {trip} outside vocab "
                            f"({n_entities} entities, {n_relations} relations)")

    rng = RngStream(cfg.seed)
    model = init_model(cfg.scorer, n_entities, n_relations, cfg.dim, rng,
                       norm=cfg.transe_norm)
    gen = dec = None
    if cfg.sampler == "aae":
        gen = init_generator(n_entities, n_relations, cfg.dim, rng,
                             n_filters=cfg.n_filters, kh=cfg.filter_kh,
                             kw=cfg.filter_kw, tau=cfg.tau)
        dec = init_decoder(n_entities, n_relations, cfg.hidden_size(), rng)
    states = _init_states(model, gen, dec)

    reports: list[EpochReport] = []
    n = len(triplets)
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.monotonic()
        order = rng.permutation(n)
        recon_sum = critic_sum = gen_sum = base_sum = 0.0
        critic_n = base_n = 0
        for b_start in range(0, n, cfg.batch_size):
            idx = order[b_start : b_start + cfg.batch_size]
            batch = [triplets[i] for i in idx]
            b_no = b_start // cfg.batch_size
            try:
                if cfg.sampler == "aae":
                    gen, dec, l_ae = update_autoencoder(
                        gen, dec, batch, states, cfg.lr_gen, rng)
                    recon_sum += l_ae * len(batch)
                    for _ in range(cfg.n_dis):
                        model, l_d = update_discriminator(
                            model, gen, batch, states, cfg.lr_disc,
                            cfg.clip, cfg.clip_scope, rng)
                        critic_sum += l_d * len(batch)
                        critic_n += len(batch)
                    gen, l_g = update_generator(
                        model, gen, batch, states, cfg.lr_gen, rng)
                    gen_sum += l_g * len(batch)
                    bad = not (math.isfinite(l_ae) and math.isfinite(l_d)
                               and math.isfinite(l_g))
                else:
                    model, l = update_baseline_batch(model, batch, states, cfg, rng)
                    base_sum += l * len(batch)
                    base_n += len(batch)
                    bad = not math.isfinite(l)
            except TrainingError as err:
                raise TrainingError(f"epoch {epoch} batch {b_no}: {err}") from err
            if bad:
                raise TrainingError(f"epoch {epoch} batch {b_no}: non-finite loss")
        if cfg.sampler == "aae":
            report = EpochReport(
                epoch=epoch,
                loss=critic_sum / max(critic_n, 1),
                recon_loss=recon_sum / n,
                critic_loss=critic_sum / max(critic_n, 1),
                generator_loss=gen_sum / n,
                seconds=time.monotonic() - t0,
            )
        else:
            report = EpochReport(
                epoch=epoch,
                loss=base_sum / max(base_n, 1),
                recon_loss=0.0,
                critic_loss=0.0,
                generator_loss=0.0,
                seconds=time.monotonic() - t0,
            )
        reports.append(report)
        if on_epoch is not None:
            on_epoch(report, TrainResult(model, reports, gen, dec))
    return TrainResult(model, reports, gen, dec)
