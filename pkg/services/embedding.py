import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, logsumexp

from schemas.embedding import EmbeddingConfig, TrainingMode
from services.walks import WalkCorpus
from utils.decorators.timing import log_stage
from utils.exceptions.io import InputOutputException
from utils.exceptions.learning import EmbeddingException

logger = logging.getLogger(__name__)

# epoch loss above this multiple of the initial loss counts as divergence
DIVERGENCE_FACTOR = 100.0


@dataclass(frozen=True, eq=False)
class Embedding:
    """
    Node vectors learned by skip-gram with negative sampling.

    ``in_vectors`` are the published node vectors z_u; ``out_vectors`` are the
    context table used only during training.
    """
    in_vectors: np.ndarray
    out_vectors: np.ndarray
    epoch_losses: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def n_nodes(self) -> int:
        return int(self.in_vectors.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.in_vectors.shape[1])

    def _check_node(self, u: int) -> int:
        if not 0 <= u < self.n_nodes:
            raise EmbeddingException(f"node {u} outside embedding of {self.n_nodes} nodes", node=u)
        return int(u)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def initial_embedding(n_nodes: int, cfg: EmbeddingConfig) -> Embedding:
    """in_vectors uniform in [-0.5/d, 0.5/d], out_vectors zero"""
    d = cfg.dimension
    rng = _rng(cfg.seed, 0)
    return Embedding(
        in_vectors=rng.uniform(-0.5 / d, 0.5 / d, size=(n_nodes, d)),
        out_vectors=np.zeros((n_nodes, d), dtype=np.float64),
    )


def cosine_similarity(emb: Embedding, u: int, v: int) -> float:
    """Unnormalized dot product z_u . z_v of the published vectors"""
    u, v = emb._check_node(u), emb._check_node(v)
    return float(emb.in_vectors[u] @ emb.in_vectors[v])


def sgns_pair_loss(z_u: np.ndarray, z_v: np.ndarray, z_negs: np.ndarray) -> float:
    """-log sigma(z_u.z_v) - sum_n log sigma(-z_u.z_n), computed without overflow"""
    z_negs = np.atleast_2d(z_negs)
    positive = np.logaddexp(0.0, -(z_u @ z_v))
    negative = np.logaddexp(0.0, z_negs @ z_u).sum() if z_negs.size else 0.0
    return float(positive + negative)


def sgns_pair_gradients(z_u: np.ndarray, z_v: np.ndarray,
                        z_negs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of sgns_pair_loss with respect to z_u, z_v and each row of z_negs"""
    z_negs = np.atleast_2d(z_negs)
    g_pos = expit(z_u @ z_v) - 1.0
    g_neg = expit(z_negs @ z_u)
    grad_u = g_pos * z_v + g_neg @ z_negs
    grad_v = g_pos * z_u
    grad_negs = g_neg[:, None] * z_u[None, :]
    return grad_u, grad_v, grad_negs


def sgns_loss(emb: Embedding, center: int, context: int, negative_nodes: Sequence[int]) -> float:
    """Negative-sampling loss of one (center, context) pair"""
    center, context = emb._check_node(center), emb._check_node(context)
    negs = [emb._check_node(n) for n in negative_nodes]
    z_negs = emb.out_vectors[negs] if negs else np.zeros((0, emb.dimension))
    return sgns_pair_loss(emb.in_vectors[center], emb.out_vectors[context], z_negs)


def full_softmax_loss(emb: Embedding, center: int, context: int) -> float:
    """-log softmax over every node; quadratic cost, for small graphs only"""
    center, context = emb._check_node(center), emb._check_node(context)
    scores = emb.out_vectors @ emb.in_vectors[center]
    return float(logsumexp(scores) - scores[context])


def context_pairs(corpus: WalkCorpus, window: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Positive (center, context) pairs ordered by walk, position, then offset
    from -window to +window.
    """
    offsets = np.array([o for o in range(-window, window + 1) if o != 0])
    centers, contexts = [], []
    for walk in corpus.walks:
        length = walk.size
        if length < 2:
            continue
        positions = np.arange(length)[:, None]
        targets = positions + offsets[None, :]
        valid = (targets >= 0) & (targets < length)
        centers.append(np.broadcast_to(walk[:, None], targets.shape)[valid])
        contexts.append(walk[targets[valid]])
    if not centers:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def noise_distribution(corpus: WalkCorpus, n_nodes: int) -> np.ndarray:
    """Corpus unigram frequencies raised to 3/4, as a cumulative table"""
    weights = corpus.node_counts(n_nodes).astype(np.float64) ** 0.75
    cumulative = np.cumsum(weights)
    return cumulative / cumulative[-1]


def _draw_negatives(rng: np.random.Generator, cdf: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    drawn = np.searchsorted(cdf, rng.random(shape), side="right")
    return np.minimum(drawn, cdf.size - 1)


def _update_batch(emb: Embedding, centers: np.ndarray, contexts: np.ndarray,
                  negatives: np.ndarray, lr: float) -> float:
    """
    One SGD step over a batch of pairs sharing a parameter snapshot; returns
    the batch loss. A node touched m times in the batch moves by the mean of
    its m gradients, so its step never exceeds one per-pair step.
    """
    W_in, W_out = emb.in_vectors, emb.out_vectors
    n_nodes = W_in.shape[0]
    z_u = W_in[centers]
    z_v = W_out[contexts]
    z_n = W_out[negatives]

    pos = np.einsum("bd,bd->b", z_u, z_v)
    neg = np.einsum("bd,bkd->bk", z_u, z_n)
    loss = float(np.logaddexp(0.0, -pos).sum() + np.logaddexp(0.0, neg).sum())

    g_pos = expit(pos) - 1.0
    g_neg = expit(neg)
    grad_u = g_pos[:, None] * z_v + np.einsum("bk,bkd->bd", g_neg, z_n)
    grad_v = g_pos[:, None] * z_u
    grad_n = g_neg[:, :, None] * z_u[:, None, :]

    in_share = 1.0 / np.bincount(centers, minlength=n_nodes)[centers]
    out_rows = np.concatenate([contexts, negatives.ravel()])
    out_share = 1.0 / np.bincount(out_rows, minlength=n_nodes)[out_rows]
    out_grads = np.concatenate([grad_v, grad_n.reshape(-1, W_out.shape[1])])

    np.add.at(W_in, centers, -lr * in_share[:, None] * grad_u)
    np.add.at(W_out, out_rows, -lr * out_share[:, None] * out_grads)
    return loss


def _learning_rate(cfg: EmbeddingConfig, processed: int, total: int) -> float:
    fraction = processed / total if total else 1.0
    return cfg.lr_initial - (cfg.lr_initial - cfg.lr_final) * fraction


def _run_batches(emb: Embedding, centers: np.ndarray, contexts: np.ndarray, cdf: np.ndarray,
                 cfg: EmbeddingConfig, rng: np.random.Generator, starts: Sequence[int],
                 offset: int, total: int) -> float:
    loss = 0.0
    for start in starts:
        stop = min(start + cfg.batch_pairs, centers.size)
        negatives = _draw_negatives(rng, cdf, (stop - start, cfg.negatives))
        lr = _learning_rate(cfg, offset + start, total)
        loss += _update_batch(emb, centers[start:stop], contexts[start:stop], negatives, lr)
    return loss


@log_stage("embedding")
def train_embedding(corpus: WalkCorpus, n_nodes: int, cfg: EmbeddingConfig) -> Embedding:
    """
    Skip-gram with negative sampling over the walk corpus.

    The context pairs are permuted once from the seed and every epoch walks
    that order in batches of ``cfg.batch_pairs``; the learning rate decays
    linearly in the number of processed pairs.
    Sequential mode is bitwise reproducible for a given seed. Parallel mode
    splits batches across threads that update the shared tables without
    locking.

    Raises:
        EmbeddingException: empty corpus, a node index >= n_nodes, or an epoch
            loss beyond DIVERGENCE_FACTOR times the initial loss
    """
    if corpus.is_empty:
        raise EmbeddingException("cannot train an embedding on an empty walk corpus")
    counts = corpus.node_counts(n_nodes)
    if counts.size > n_nodes:
        raise EmbeddingException(f"walk corpus references nodes beyond {n_nodes}", node=counts.size - 1)

    emb = initial_embedding(n_nodes, cfg)
    if cfg.epochs == 0:
        return emb

    centers, contexts = context_pairs(corpus, cfg.window)
    if centers.size == 0:
        raise EmbeddingException("walk corpus yields no context pairs")
    # one seeded order for every epoch; batches then mix walks from across the graph
    order = _rng(cfg.seed, 4).permutation(centers.size)
    centers, contexts = centers[order], contexts[order]
    cdf = noise_distribution(corpus, n_nodes)
    n_pairs = int(centers.size)
    total = cfg.epochs * n_pairs
    starts = list(range(0, n_pairs, cfg.batch_pairs))

    # loss of the initial vectors: out_vectors start at zero
    reference_loss = n_pairs * (1 + cfg.negatives) * np.log(2.0)
    losses: List[float] = []
    sequential_rng = _rng(cfg.seed, 1)
    for epoch in range(cfg.epochs):
        offset = epoch * n_pairs
        if cfg.mode == TrainingMode.PARALLEL and cfg.workers > 1 and len(starts) > 1:
            chunks = [list(chunk) for chunk in np.array_split(starts, cfg.workers) if len(chunk)]
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                parts = pool.map(
                    lambda item: _run_batches(emb, centers, contexts, cdf, cfg,
                                              _rng(cfg.seed, 2, epoch, item[0]), item[1], offset, total),
                    enumerate(chunks),
                )
                epoch_loss = float(sum(parts))
        else:
            epoch_loss = _run_batches(emb, centers, contexts, cdf, cfg, sequential_rng, starts, offset, total)
        losses.append(epoch_loss)
        logger.debug("Embedding epoch finished",
                     extra={"amg_data": {"epoch": epoch, "loss": epoch_loss, "pairs": n_pairs}})
        if not np.isfinite(epoch_loss) or epoch_loss > DIVERGENCE_FACTOR * reference_loss:
            raise EmbeddingException(
                f"embedding training diverged: epoch {epoch} loss {epoch_loss:.3e} "
                f"against initial {reference_loss:.3e}",
                details={"epoch": epoch, "loss": epoch_loss, "batch_pairs": cfg.batch_pairs},
            )

    if not np.all(np.isfinite(emb.in_vectors)):
        raise EmbeddingException("embedding diverged to non-finite values")
    return Embedding(in_vectors=emb.in_vectors, out_vectors=emb.out_vectors, epoch_losses=tuple(losses))


def sgns_corpus_loss(emb: Embedding, corpus: WalkCorpus, cfg: EmbeddingConfig, seed: int = 0) -> float:
    """Total negative-sampling loss of every corpus pair with negatives drawn from ``seed``"""
    centers, contexts = context_pairs(corpus, cfg.window)
    if centers.size == 0:
        return 0.0
    cdf = noise_distribution(corpus, emb.n_nodes)
    negatives = _draw_negatives(_rng(seed, 3), cdf, (centers.size, cfg.negatives))
    z_u = emb.in_vectors[centers]
    pos = np.einsum("bd,bd->b", z_u, emb.out_vectors[contexts])
    neg = np.einsum("bd,bkd->bk", z_u, emb.out_vectors[negatives])
    return float(np.logaddexp(0.0, -pos).sum() + np.logaddexp(0.0, neg).sum())


def export_embedding(emb: Embedding, path: Union[str, Path]) -> None:
    """Header 'n d' then one row of d values per node"""
    try:
        np.savetxt(path, emb.in_vectors, fmt="%.17g", header=f"{emb.n_nodes} {emb.dimension}", comments="")
    except OSError as e:
        raise InputOutputException(f"cannot write embedding: {e}", path=path, original_exception=e)
