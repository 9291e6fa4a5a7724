import math

import numpy as np
import pytest

from schemas.embedding import EmbeddingConfig, TrainingMode
from schemas.walks import WalkConfig
from services.embedding import (
    Embedding,
    context_pairs,
    cosine_similarity,
    export_embedding,
    full_softmax_loss,
    initial_embedding,
    sgns_corpus_loss,
    sgns_loss,
    sgns_pair_gradients,
    sgns_pair_loss,
    train_embedding,
)
from services.graph import graph_from_matrix
from services.walks import WalkCorpus, generate_walks
from utils.exceptions.learning import EmbeddingException


def _embedding(in_rows, out_rows=None) -> Embedding:
    in_vectors = np.asarray(in_rows, dtype=float)
    out_vectors = np.zeros_like(in_vectors) if out_rows is None else np.asarray(out_rows, dtype=float)
    return Embedding(in_vectors=in_vectors, out_vectors=out_vectors)


def _numeric_gradient(func, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        plus, minus = x.copy(), x.copy()
        plus[idx] += step
        minus[idx] -= step
        grad[idx] = (func(plus) - func(minus)) / (2 * step)
    return grad


class TestSimilarity:

    def test_dot_product(self):
        emb = _embedding([[1.0, 2.0], [3.0, -1.0]])
        assert cosine_similarity(emb, 0, 1) == pytest.approx(1.0)
        assert cosine_similarity(emb, 0, 0) == pytest.approx(5.0)

    def test_orthogonal(self):
        assert cosine_similarity(_embedding([[1.0, 0.0], [0.0, 2.0]]), 0, 1) == 0.0

    def test_bad_index(self):
        with pytest.raises(EmbeddingException):
            cosine_similarity(_embedding([[1.0, 0.0]]), 0, 1)


class TestSgnsLoss:

    def test_zero_vectors(self):
        emb = _embedding(np.zeros((3, 4)))
        assert sgns_loss(emb, 0, 1, [2]) == pytest.approx(2 * math.log(2), abs=1e-4)

    def test_unit_vectors(self):
        emb = _embedding([[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [1, 0]])
        assert sgns_loss(emb, 0, 1, [2]) == pytest.approx(1.6265, abs=1e-4)

    def test_saturated_pair_has_no_loss(self):
        z_u = np.array([50.0, 0.0])
        loss = sgns_pair_loss(z_u, np.array([50.0, 0.0]), np.array([[-50.0, 0.0], [-40.0, 1.0]]))
        assert 0.0 <= loss < 1e-6

    def test_loss_is_nonnegative(self, rng):
        for _ in range(20):
            assert sgns_pair_loss(rng.standard_normal(3), rng.standard_normal(3), rng.standard_normal((4, 3))) >= 0

    def test_gradients_match_finite_differences(self, rng):
        for _ in range(100):
            z_u, z_v = rng.standard_normal(4), rng.standard_normal(4)
            z_negs = rng.standard_normal((3, 4))
            grad_u, grad_v, grad_negs = sgns_pair_gradients(z_u, z_v, z_negs)
            np.testing.assert_allclose(
                grad_u, _numeric_gradient(lambda x: sgns_pair_loss(x, z_v, z_negs), z_u), rtol=1e-5, atol=1e-8)
            np.testing.assert_allclose(
                grad_v, _numeric_gradient(lambda x: sgns_pair_loss(z_u, x, z_negs), z_v), rtol=1e-5, atol=1e-8)
            np.testing.assert_allclose(
                grad_negs, _numeric_gradient(lambda x: sgns_pair_loss(z_u, z_v, x), z_negs), rtol=1e-5, atol=1e-8)

    def test_full_softmax_of_untrained_table(self):
        emb = _embedding(np.ones((4, 2)))
        assert full_softmax_loss(emb, 0, 3) == pytest.approx(math.log(4))


class TestContextPairs:

    def test_window_one(self):
        centers, contexts = context_pairs(WalkCorpus(walks=[np.array([3, 4, 5])]), window=1)
        assert list(zip(centers.tolist(), contexts.tolist())) == [(3, 4), (4, 3), (4, 5), (5, 4)]

    def test_window_wider_than_walk(self):
        centers, _ = context_pairs(WalkCorpus(walks=[np.array([0, 1])]), window=5)
        assert centers.size == 2


class TestTrainEmbedding:

    def test_zero_epochs_returns_initial(self):
        corpus = WalkCorpus(walks=[np.array([0, 1, 2])])
        cfg = EmbeddingConfig(dimension=4, epochs=0, seed=9)
        emb = train_embedding(corpus, 3, cfg)
        np.testing.assert_array_equal(emb.in_vectors, initial_embedding(3, cfg).in_vectors)

    def test_initial_ranges(self):
        emb = initial_embedding(50, EmbeddingConfig(dimension=8))
        assert np.all(np.abs(emb.in_vectors) <= 0.5 / 8)
        assert not np.any(emb.out_vectors)

    def test_empty_corpus(self):
        with pytest.raises(EmbeddingException):
            train_embedding(WalkCorpus(walks=[]), 3, EmbeddingConfig())

    def test_node_out_of_range(self):
        with pytest.raises(EmbeddingException):
            train_embedding(WalkCorpus(walks=[np.array([0, 5])]), 3, EmbeddingConfig(dimension=4))

    def test_co_occurring_nodes_are_similar(self):
        walks = [np.array([0, 1] * 5)] * 20 + [np.array([2, 3] * 5)] * 20
        cfg = EmbeddingConfig(dimension=8, epochs=10, batch_pairs=1)
        emb = train_embedding(WalkCorpus(walks=walks), 4, cfg)
        assert cosine_similarity(emb, 0, 1) > cosine_similarity(emb, 0, 2)

    def test_repeated_nodes_in_a_batch_stay_bounded(self):
        # every batch holds each node hundreds of times
        walks = [np.array([0, 1] * 5)] * 20 + [np.array([2, 3] * 5)] * 20
        emb = train_embedding(WalkCorpus(walks=walks), 4, EmbeddingConfig(dimension=8, epochs=10))
        assert np.abs(emb.in_vectors).max() < 10.0
        assert np.abs(emb.out_vectors).max() < 10.0
        assert all(np.isfinite(emb.epoch_losses))

    def test_diverging_training_raises(self):
        walks = [np.array([0, 1] * 5)] * 20 + [np.array([2, 3] * 5)] * 20
        cfg = EmbeddingConfig(dimension=8, epochs=3, batch_pairs=1, lr_initial=1e6, lr_final=1e6)
        with pytest.raises(EmbeddingException, match="diverged"):
            train_embedding(WalkCorpus(walks=walks), 4, cfg)

    def test_barbell_communities(self, barbell):
        corpus = generate_walks(graph_from_matrix(barbell), WalkConfig(seed=0))
        emb = train_embedding(corpus, 10, EmbeddingConfig(dimension=16, epochs=10, batch_pairs=1))
        blocks = [range(0, 5), range(5, 10)]
        intra = [cosine_similarity(emb, u, v) for b in blocks for u in b for v in b if u < v]
        inter = [cosine_similarity(emb, u, v) for u in blocks[0] for v in blocks[1]]
        assert np.mean(intra) > np.mean(inter)

    @pytest.mark.parametrize("batch_pairs", [1, 256])
    def test_first_epoch_lowers_loss(self, barbell, batch_pairs):
        G = graph_from_matrix(barbell)
        improved = 0
        for seed in range(20):
            corpus = generate_walks(G, WalkConfig(seed=seed))
            cfg = EmbeddingConfig(dimension=16, epochs=1, seed=seed, batch_pairs=batch_pairs)
            before = sgns_corpus_loss(initial_embedding(10, cfg), corpus, cfg, seed=seed)
            after = sgns_corpus_loss(train_embedding(corpus, 10, cfg), corpus, cfg, seed=seed)
            improved += after < before
        assert improved >= 19

    def test_sequential_training_is_reproducible(self, barbell):
        corpus = generate_walks(graph_from_matrix(barbell), WalkConfig(seed=1))
        cfg = EmbeddingConfig(dimension=8, epochs=2, seed=4)
        first = train_embedding(corpus, 10, cfg)
        second = train_embedding(corpus, 10, cfg)
        np.testing.assert_array_equal(first.in_vectors, second.in_vectors)
        np.testing.assert_array_equal(first.out_vectors, second.out_vectors)
        assert len(first.epoch_losses) == 2

    def test_parallel_mode(self, barbell):
        corpus = generate_walks(graph_from_matrix(barbell), WalkConfig(seed=1))
        cfg = EmbeddingConfig(dimension=8, epochs=2, batch_pairs=32, mode=TrainingMode.PARALLEL, workers=3)
        emb = train_embedding(corpus, 10, cfg)
        assert emb.in_vectors.shape == (10, 8)
        assert np.all(np.isfinite(emb.in_vectors))


class TestExport:

    def test_header_and_rows(self, tmp_path):
        emb = _embedding([[1.0, 2.0], [0.5, -0.25], [0.0, 3.0]])
        path = tmp_path / "emb.txt"
        export_embedding(emb, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "3 2"
        assert len(lines) == 4
        np.testing.assert_array_equal([float(x) for x in lines[2].split()], [0.5, -0.25])
