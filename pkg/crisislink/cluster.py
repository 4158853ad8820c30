# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Short-text clustering with the collapsed Gibbs sampler of the Dirichlet multinomial mixture.

The number of non-empty clusters is emergent; K only bounds it.
"""

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from crisislink.errors import ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GsdmmConfig:
    K: int = 15
    alpha: float = 0.1
    beta: float = 0.1
    iters: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError('k', 'must be at least 1, got {0}'.format(self.K))
        if self.alpha <= 0.0:
            raise ConfigError('alpha', 'must be positive, got {0}'.format(self.alpha))
        if self.beta <= 0.0:
            raise ConfigError('beta', 'must be positive, got {0}'.format(self.beta))
        if self.iters < 1:
            raise ConfigError('iters', 'must be at least 1, got {0}'.format(self.iters))


class ClusterState(object):
    """
    Assignments and sufficient statistics of one sampler chain.

    :param docs: token multisets (lists of tokens or Counters)
    :param config: GsdmmConfig
    """

    def __init__(self, docs, config):
        self.config = config
        self.docs = [Counter(doc) for doc in docs]
        self.vocabulary = sorted(set(word for doc in self.docs for word in doc))
        self.word_ids = dict((word, i) for i, word in enumerate(self.vocabulary))

        self.D = len(self.docs)
        self.V = len(self.vocabulary)
        self.K = config.K

        # per document: (word ids, occurrence counts), total length
        self._doc_words = [(np.array([self.word_ids[word] for word in sorted(doc)], dtype=np.int64),
                            np.array([doc[word] for word in sorted(doc)], dtype=np.int64)) for doc in self.docs]
        self._doc_lengths = np.array([sum(doc.values()) for doc in self.docs], dtype=np.int64)

        self.z = np.full(self.D, -1, dtype=np.int64)
        self.m_k = np.zeros(self.K, dtype=np.int64)
        self.n_k = np.zeros(self.K, dtype=np.int64)
        self.n_kw = np.zeros((self.K, self.V), dtype=np.int64)

    def add(self, d, k):
        words, counts = self._doc_words[d]
        self.z[d] = k
        self.m_k[k] += 1
        self.n_k[k] += self._doc_lengths[d]
        self.n_kw[k, words] += counts

    def remove(self, d):
        k = self.z[d]
        words, counts = self._doc_words[d]
        self.m_k[k] -= 1
        self.n_k[k] -= self._doc_lengths[d]
        self.n_kw[k, words] -= counts
        self.z[d] = -1
        return k

    def conditional(self, d):
        """
        Normalised p(z_d = k | all other assignments), for a document currently removed from the
        counts. Products of rising factorials are summed in log space.

        :param d: document position
        :return ndarray: K probabilities
        """

        alpha, beta = self.config.alpha, self.config.beta
        log_p = np.log(self.m_k + alpha)

        words, counts = self._doc_words[d]
        for word, count in zip(words, counts):
            offsets = np.arange(count)
            log_p += np.log(self.n_kw[:, word][:, None] + beta + offsets[None, :]).sum(axis=1)

        positions = np.arange(self._doc_lengths[d])
        log_p -= np.log(self.n_k[:, None] + self.V * beta + positions[None, :]).sum(axis=1)

        probabilities = np.exp(log_p - log_p.max())
        total = probabilities.sum()
        if not np.isfinite(total) or total <= 0.0:
            raise FloatingPointError('conditional of document {0} cannot be normalised: mass {1}'.format(d, total))

        return probabilities / total

    def check_invariants(self):
        """
        Raises AssertionError when the counts disagree with the assignments.
        """

        if self.m_k.sum() != self.D:
            raise AssertionError('cluster sizes sum to {0}, expected {1}'.format(self.m_k.sum(), self.D))
        if not np.array_equal(self.n_kw.sum(axis=1), self.n_k):
            raise AssertionError('per-cluster word counts disagree with cluster totals')
        if (self.m_k < 0).any() or (self.n_k < 0).any() or (self.n_kw < 0).any():
            raise AssertionError('negative count')

    def sizes(self):
        return [int(size) for size in self.m_k]

    def assignments(self):
        return [int(k) for k in self.z]


def fit(docs, config=None, on_sweep=None):
    """
    Runs the sampler for config.iters sweeps from a seeded uniform random initialisation.

    :param docs: token multisets
    :param config: GsdmmConfig
    :param on_sweep: optional callable(sweep, state) invoked after each sweep
    :return ClusterState:
    """

    config = config or GsdmmConfig()
    rng = np.random.default_rng(config.seed)
    state = ClusterState(docs, config)

    for d, k in enumerate(rng.integers(0, config.K, size=state.D)):
        state.add(d, int(k))

    for sweep in range(1, config.iters + 1):
        moved = 0
        for d in range(state.D):
            previous = state.remove(d)
            k = int(rng.choice(config.K, p=state.conditional(d)))
            state.add(d, k)
            moved += int(k != previous)

        state.check_invariants()
        log.debug('Sweep %d: %d documents moved, %d non-empty clusters', sweep, moved, int((state.m_k > 0).sum()))
        if on_sweep is not None:
            on_sweep(sweep, state)

    log.info('GSDMM finished: %d documents in %d clusters', state.D, int((state.m_k > 0).sum()))

    return state


def cluster_stats(state):
    """
    Size statistics over the non-empty clusters.

    :param state: fitted ClusterState
    :return dict: clusters, min, max, mean and mode (ties to the smaller size); None values when empty
    """

    sizes = [size for size in state.sizes() if size > 0]
    if not sizes:
        return dict(clusters=0, min=None, max=None, mean=None, mode=None)

    counts = Counter(sizes)
    mode = min(counts, key=lambda size: (-counts[size], size))

    return dict(clusters=len(sizes), min=min(sizes), max=max(sizes), mean=sum(sizes) / float(len(sizes)), mode=mode)


def top_terms(state, k, n=10):
    """
    The n most frequent terms of cluster k, ties in lexicographic order.

    :return list: (term, count)
    """

    row = state.n_kw[k]
    terms = [(state.vocabulary[w], int(row[w])) for w in np.flatnonzero(row)]
    return sorted(terms, key=lambda item: (-item[1], item[0]))[:n]


def purity(assignments, labels):
    """
    Fraction of documents carrying the majority label of their cluster.
    """

    if not assignments:
        return None

    members = dict()
    for cluster, label in zip(assignments, labels):
        members.setdefault(cluster, Counter())[label] += 1

    return sum(max(counter.values()) for counter in members.values()) / float(len(assignments))
