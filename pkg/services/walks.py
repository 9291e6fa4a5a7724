import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from schemas.walks import WalkConfig
from services.graph import WeightedGraph, average_degree
from utils.decorators.timing import log_stage
from utils.exceptions.io import InputOutputException
from utils.exceptions.learning import GraphException

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WalkCorpus:
    """Walks ordered by start node, then walk index"""
    walks: List[np.ndarray] = field(default_factory=list)
    walks_per_node: int = 0

    def __len__(self) -> int:
        return len(self.walks)

    @property
    def is_empty(self) -> bool:
        return not any(walk.size for walk in self.walks)

    def node_counts(self, n_nodes: int) -> np.ndarray:
        """Occurrences of every node across the corpus"""
        if not self.walks:
            return np.zeros(n_nodes, dtype=np.int64)
        return np.bincount(np.concatenate(self.walks), minlength=n_nodes)


def default_walks_per_node(G: WeightedGraph) -> int:
    """ceil(2 x average degree), at least one"""
    if G.n_nodes == 0:
        return 1
    return max(1, math.ceil(2.0 * average_degree(G)))


def _biased_weights(G: WeightedGraph, prev: int, cur: int, p: float, q: float) -> Tuple[np.ndarray, np.ndarray]:
    nbrs = G.neighbors(cur)
    weights = G.neighbor_weights(cur)
    if nbrs.size == 0:
        return nbrs, weights
    prev_nbrs = G.neighbors(prev)
    if prev_nbrs.size:
        pos = np.minimum(np.searchsorted(prev_nbrs, nbrs), prev_nbrs.size - 1)
        shared = prev_nbrs[pos] == nbrs
    else:
        shared = np.zeros(nbrs.size, dtype=bool)
    alpha = np.where(nbrs == prev, 1.0 / p, np.where(shared, 1.0, 1.0 / q))
    return nbrs, weights * alpha


def walk_step_weights(G: WeightedGraph, prev: int, cur: int, cfg: WalkConfig) -> List[Tuple[int, float]]:
    """
    Unnormalized transition weights out of ``cur`` after arriving from ``prev``.

    Weight is w(cur, x) * alpha, alpha = 1/p when x == prev, 1 when x is also a
    neighbour of prev, 1/q otherwise.
    """
    if not G.has_edge(prev, cur):
        raise GraphException(f"no edge ({prev}, {cur}) to continue a walk from",
                             details={"prev": int(prev), "cur": int(cur)})
    nbrs, weights = _biased_weights(G, prev, cur, cfg.return_p, cfg.in_out_q)
    return list(zip(nbrs.tolist(), weights.tolist()))


def node_rng(seed: int, node: int) -> np.random.Generator:
    """Independent counter-based stream per start node"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(node),))))


def _draw(rng: np.random.Generator, weights: np.ndarray) -> int:
    cumulative = np.cumsum(weights)
    k = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    return min(k, weights.size - 1)


def _walks_from(G: WeightedGraph, start: int, cfg: WalkConfig, n_walks: int) -> List[np.ndarray]:
    rng = node_rng(cfg.seed, start)
    walks = []
    for _ in range(n_walks):
        walk = [start]
        nbrs = G.neighbors(start)
        walk.append(int(nbrs[_draw(rng, G.neighbor_weights(start))]))
        while len(walk) < cfg.walk_length:
            nbrs, weights = _biased_weights(G, walk[-2], walk[-1], cfg.return_p, cfg.in_out_q)
            if nbrs.size == 0:
                break
            walk.append(int(nbrs[_draw(rng, weights)]))
        walks.append(np.asarray(walk, dtype=np.int64))
    return walks


@log_stage("walks")
def generate_walks(G: WeightedGraph, cfg: WalkConfig) -> WalkCorpus:
    """
    ``walks_per_node`` walks from every node that has a neighbour.

    The first step is drawn proportional to edge weight, later steps by
    walk_step_weights. Output depends only on the graph and cfg.seed.
    """
    n_walks = cfg.walks_per_node or default_walks_per_node(G)
    starts = [u for u in range(G.n_nodes) if G.degree(u) > 0]

    def run(start: int) -> List[np.ndarray]:
        return _walks_from(G, start, cfg, n_walks)

    if cfg.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            per_node = list(pool.map(run, starts))
    else:
        per_node = [run(start) for start in starts]

    walks = [walk for node_walks in per_node for walk in node_walks]
    logger.debug("Generated walk corpus",
                 extra={"amg_data": {"walks": len(walks), "walks_per_node": n_walks,
                                     "isolated_nodes": G.n_nodes - len(starts)}})
    return WalkCorpus(walks=walks, walks_per_node=n_walks)


def dump_corpus(corpus: WalkCorpus, path: Union[str, Path]) -> None:
    """One walk per line, space-separated node indices"""
    path = Path(path)
    try:
        with path.open("w") as handle:
            for walk in corpus.walks:
                handle.write(" ".join(str(int(u)) for u in walk) + "\n")
    except OSError as e:
        raise InputOutputException(f"cannot write walk corpus: {e}", path=path, original_exception=e)
