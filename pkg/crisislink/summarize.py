# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Extractive single-document summarizers under a word budget, and post collections read as summaries.

Every summarizer takes an Article and returns a Summary whose picked sentence indices are 1-based
and in document order. Budgets count post-tokenization words.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
from scipy import sparse

from crisislink import textproc
from crisislink.retrieval import build_index

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 100
SCORE_EPSILON = 1e-12


@dataclass(frozen=True)
class SummarizerConfig:
    budget: int = DEFAULT_BUDGET
    lexrank_threshold: float = 0.1
    damping: float = 0.85
    tolerance: float = 1e-6
    max_iter: int = 100
    redundancy: float = 0.95
    exact_cap: int = 25

    def __post_init__(self):
        if int(self.budget) < 1:
            raise ValueError('budget must be positive, got {0}'.format(self.budget))
        if not 0.0 < self.damping < 1.0:
            raise ValueError('damping must lie in (0, 1), got {0}'.format(self.damping))
        if self.exact_cap < 0:
            raise ValueError('exact_cap must not be negative, got {0}'.format(self.exact_cap))


@dataclass(frozen=True)
class Summary:
    article_id: str
    method: str
    picked: Tuple[int, ...]
    text: str
    word_count: int
    approximate: bool = False
    truncated: bool = False

    def to_dict(self):
        return dict(article_id=self.article_id, method=self.method, picked=list(self.picked), text=self.text,
                    word_count=self.word_count, approximate=self.approximate, truncated=self.truncated)

    @classmethod
    def from_dict(cls, data):
        return cls(article_id=data['article_id'], method=data['method'], picked=tuple(data.get('picked') or ()),
                   text=data.get('text', ''), word_count=int(data.get('word_count', 0)),
                   approximate=bool(data.get('approximate')), truncated=bool(data.get('truncated')))


class SentenceSpace(object):
    """
    Per-sentence tokens, word counts and TFIDF vectors of one article.

    Without a corpus index, sentences are the documents of a private index, so a term found in
    every sentence carries no weight.
    """

    def __init__(self, sentences, index=None, stopwords=None):
        self.sentences = tuple(sentences)
        self.tokenized = [textproc.tokenize(sentence, stopwords) for sentence in self.sentences]
        self.words = [textproc.word_count(sentence) for sentence in self.sentences]
        self.index = index if index is not None else build_index(self.tokenized)
        self.weights = [self.index.weights(tokens.content_stems) for tokens in self.tokenized]
        self.vectors = sparse.vstack([self.index.vectorize(tokens.content_stems) for tokens in self.tokenized],
                                     format='csr')
        self.terms = [set(tokens.content_stems) for tokens in self.tokenized]

    def __len__(self):
        return len(self.sentences)

    def similarity_matrix(self):
        return np.asarray(self.vectors.dot(self.vectors.T).todense())

    def idf(self, term):
        return self.index.idf_of(term)


# ---------------------------------------------------------------------------------------------------
#
#   Selection primitives
#
# ---------------------------------------------------------------------------------------------------

def knapsack(values, costs, budget):
    """
    Exact 0/1 knapsack by dynamic programming over integer capacities. An item is taken only when
    it strictly improves the value, so zero-value items are never selected.

    :param values: non-negative item values
    :param costs: non-negative integer costs
    :param budget: capacity
    :return tuple: selected item positions, ascending
    """

    count = len(values)
    # capacities past the total cost admit every subset, so they add nothing to the table
    budget = max(0, min(int(budget), sum(int(cost) for cost in costs)))
    table = np.zeros((count + 1, budget + 1))

    for j in range(1, count + 1):
        cost = int(costs[j - 1])
        value = float(values[j - 1])
        table[j] = table[j - 1]
        if cost > budget:
            continue
        candidate = table[j - 1, :budget + 1 - cost] + value
        better = candidate > table[j - 1, cost:] + SCORE_EPSILON
        table[j, cost:][better] = candidate[better]

    picked = []
    capacity = budget
    for j in range(count, 0, -1):
        if table[j, capacity] != table[j - 1, capacity]:
            picked.append(j - 1)
            capacity -= int(costs[j - 1])

    return tuple(sorted(picked))


def coverage_value(selection, term_sets, term_weights):
    """
    Total weight of the distinct terms covered by the selected items.
    """

    covered = set()
    for i in selection:
        covered.update(term_sets[i])
    return sum(term_weights.get(term, 0.0) for term in covered)


def submodular_value(selection, term_counts, term_weights):
    """
    Concave coverage: sum over terms of weight times the square root of the selected occurrences.
    """

    totals = dict()
    for i in selection:
        for term, count in term_counts[i].items():
            totals[term] = totals.get(term, 0) + count
    return sum(term_weights.get(term, 0.0) * math.sqrt(count) for term, count in totals.items())


def max_coverage_exact(term_sets, costs, budget, term_weights):
    """
    Exact budgeted maximum coverage by depth-first branch and bound. The bound of a node is its
    value plus a fractional knapsack over the marginal gains of the remaining items, which never
    underestimates a submodular objective.

    :param term_sets: set of terms per item
    :param costs: cost per item
    :param budget: cost limit
    :param term_weights: term -> weight
    :return tuple: selected item positions, ascending
    """

    count = len(term_sets)
    best = dict(value=0.0, selection=())

    def bound(position, covered, value, remaining):
        ratios = []
        for i in range(position, count):
            gain = sum(term_weights.get(term, 0.0) for term in term_sets[i] - covered)
            if gain > 0.0 and costs[i] <= remaining:
                ratios.append((gain / costs[i] if costs[i] else float('inf'), gain, costs[i]))

        total = value
        for ratio, gain, cost in sorted(ratios, reverse=True):
            if cost <= remaining:
                total += gain
                remaining -= cost
            else:
                total += ratio * remaining
                break
        return total

    def search(position, selection, covered, value, remaining):
        if value > best['value'] + SCORE_EPSILON:
            best['value'] = value
            best['selection'] = tuple(selection)

        if position == count or bound(position, covered, value, remaining) <= best['value'] + SCORE_EPSILON:
            return

        if costs[position] <= remaining:
            gain = sum(term_weights.get(term, 0.0) for term in term_sets[position] - covered)
            if gain > 0.0:
                search(position + 1, selection + [position], covered | term_sets[position], value + gain,
                       remaining - costs[position])

        search(position + 1, selection, covered, value, remaining)

    search(0, [], frozenset(), 0.0, budget)

    return best['selection']


def budgeted_greedy(value, costs, budget):
    """
    Cost-scaled greedy for a monotone set function: repeatedly add the affordable item with the
    largest gain per unit cost, then return the better of that set and the best single item.

    :param value: callable mapping a tuple of positions to a float
    :param costs: cost per item
    :param budget: cost limit
    :return tuple: selected positions, ascending
    """

    selection = []
    current = value(())
    remaining = budget

    while True:
        choice = None
        for i in range(len(costs)):
            if i in selection or costs[i] > remaining:
                continue
            gain = value(tuple(selection + [i])) - current
            if gain <= SCORE_EPSILON:
                continue
            ratio = gain / max(costs[i], 1)
            if choice is None or ratio > choice[0] + SCORE_EPSILON:
                choice = (ratio, i, gain)
        if choice is None:
            break

        selection.append(choice[1])
        current += choice[2]
        remaining -= costs[choice[1]]

    singles = [(value((i,)), -i) for i in range(len(costs)) if costs[i] <= budget]
    if singles:
        single_value, negative_index = max(singles)
        if single_value > current + SCORE_EPSILON:
            return (-negative_index,)

    return tuple(sorted(selection))


def _power_iteration(weights, damping, tolerance, max_iter):
    """
    Stationary scores of a weighted sentence graph with uniform teleportation. Rows without edges
    jump uniformly.
    """

    size = weights.shape[0]
    totals = weights.sum(axis=1)
    transition = np.full((size, size), 1.0 / size)
    linked = totals > 0.0
    transition[linked] = weights[linked] / totals[linked][:, None]

    scores = np.full(size, 1.0 / size)
    for iteration in range(max_iter):
        updated = (1.0 - damping) / size + damping * transition.T.dot(scores)
        delta = np.abs(updated - scores).sum()
        scores = updated
        if delta < tolerance:
            log.debug('Power iteration converged after %d iterations', iteration + 1)
            break

    return scores


# ---------------------------------------------------------------------------------------------------
#
#   Summary assembly
#
# ---------------------------------------------------------------------------------------------------

def _resolve(article, budget, config, space, index=None):
    config = config or SummarizerConfig()
    if budget is not None:
        config = replace(config, budget=int(budget))
    if space is None:
        space = SentenceSpace(article.sentences, index=index)
    return config, space


def _assemble(article, method, positions, space, approximate=False):
    positions = sorted(set(positions))
    text = u' '.join(space.sentences[i] for i in positions)
    return Summary(article_id=article.id, method=method, picked=tuple(i + 1 for i in positions), text=text,
                   word_count=textproc.word_count(text), approximate=approximate)


def truncate_words(sentence, budget):
    """
    The longest whitespace-token prefix of a sentence whose word count is within budget.
    """

    kept = []
    used = 0
    for token in sentence.split():
        words = textproc.word_count(token)
        if used + words > budget:
            break
        kept.append(token)
        used += words

    return u' '.join(kept)


def _truncated(article, method, position, space, budget):
    text = truncate_words(space.sentences[position], budget)
    return Summary(article_id=article.id, method=method, picked=(position + 1,), text=text,
                   word_count=textproc.word_count(text), truncated=True)


def _fill_by_rank(article, method, order, space, budget, redundant=None):
    """
    Walks sentences from best to worst and keeps each one that fits the remaining budget. When
    no sentence fits at all, the best one is truncated at the budget.
    """

    picked = []
    used = 0
    for i in order:
        if used + space.words[i] > budget:
            continue
        if redundant is not None and any(redundant(i, j) for j in picked):
            continue
        picked.append(i)
        used += space.words[i]

    if not picked and order:
        return _truncated(article, method, order[0], space, budget)

    return _assemble(article, method, picked, space)


def _rank_order(scores):
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def _from_lead(article, method, config, space):
    log.debug('%s has no usable scores for %s, falling back to lead', article.id, method)
    return replace(lead(article, config=config, space=space), method=method)


# ---------------------------------------------------------------------------------------------------
#
#   Summarizers
#
# ---------------------------------------------------------------------------------------------------

def lead(article, budget=None, config=None, space=None):
    """
    Leading sentences up to the budget. A first sentence longer than the budget is truncated.

    :param article: Article
    :param budget: word budget, overrides config.budget
    :return Summary:
    """

    config, space = _resolve(article, budget, config, space)

    picked = []
    used = 0
    for i, words in enumerate(space.words):
        if used + words > config.budget:
            break
        picked.append(i)
        used += words

    if not picked and len(space):
        return _truncated(article, 'lead', 0, space, config.budget)

    return _assemble(article, 'lead', picked, space)


def centroid(article, budget=None, config=None, space=None, index=None):
    """
    Ranks sentences by cosine to the document centroid and fills the budget, skipping any
    sentence too similar to one already picked.
    """

    config, space = _resolve(article, budget, config, space, index)

    center = np.asarray(space.vectors.sum(axis=0)).ravel()
    norm = np.linalg.norm(center)
    if norm == 0.0:
        return _from_lead(article, 'centroid', config, space)

    scores = space.vectors.dot(center / norm)
    similarity = space.similarity_matrix()

    return _fill_by_rank(article, 'centroid', _rank_order(list(scores)), space, config.budget,
                         redundant=lambda i, j: similarity[i, j] >= config.redundancy)


def lexrank_scores(space, config):
    similarity = space.similarity_matrix()
    np.fill_diagonal(similarity, 0.0)
    similarity[similarity < config.lexrank_threshold] = 0.0
    return _power_iteration(similarity, config.damping, config.tolerance, config.max_iter)


def lexrank(article, budget=None, config=None, space=None, index=None):
    """
    Stationary distribution of the thresholded cosine graph of the sentences.
    """

    config, space = _resolve(article, budget, config, space, index)
    scores = lexrank_scores(space, config)
    return _fill_by_rank(article, 'lexrank', _rank_order(list(scores)), space, config.budget)


def textrank_weight(terms_i, terms_j, length_i, length_j):
    """
    Shared content stems over the sum of log sentence lengths; 0 when either sentence has at most
    one token.
    """

    if length_i <= 1 or length_j <= 1:
        return 0.0
    return len(terms_i & terms_j) / (math.log(length_i) + math.log(length_j))


def textrank_scores(space, config):
    size = len(space)
    lengths = [len(tokens.content_stems) for tokens in space.tokenized]
    weights = np.zeros((size, size))
    for i in range(size):
        for j in range(i + 1, size):
            weights[i, j] = weights[j, i] = textrank_weight(space.terms[i], space.terms[j], lengths[i], lengths[j])
    return _power_iteration(weights, config.damping, config.tolerance, config.max_iter)


def textrank(article, budget=None, config=None, space=None, index=None):
    config, space = _resolve(article, budget, config, space, index)
    scores = textrank_scores(space, config)
    return _fill_by_rank(article, 'textrank', _rank_order(list(scores)), space, config.budget)


def _term_counts(space):
    return [Counter(tokens.content_stems) for tokens in space.tokenized]


def _idf_weights(space):
    terms = set()
    for sentence_terms in space.terms:
        terms.update(sentence_terms)
    return dict((term, space.idf(term)) for term in terms)


def submodular(article, budget=None, config=None, space=None, index=None, method='submodular'):
    """
    Cost-scaled greedy maximisation of square-root concave coverage weighted by idf.
    """

    config, space = _resolve(article, budget, config, space, index)
    term_weights = _idf_weights(space)
    if not any(weight > 0.0 for weight in term_weights.values()):
        return _from_lead(article, method, config, space)

    counts = _term_counts(space)
    picked = budgeted_greedy(lambda selection: submodular_value(selection, counts, term_weights),
                             space.words, config.budget)
    return _assemble(article, method, picked, space)


def _greedy_cover(space, positions, budget):
    covered = set()
    picked = []
    used = 0

    while True:
        choice = None
        for i in positions:
            if i in picked or used + space.words[i] > budget:
                continue
            gain = sum(weight for term, weight in space.weights[i].items() if term not in covered)
            if choice is None or gain > choice[0] + SCORE_EPSILON:
                choice = (gain, i)
        if choice is None or choice[0] <= SCORE_EPSILON:
            break

        picked.append(choice[1])
        covered.update(space.weights[choice[1]])
        used += space.words[choice[1]]

    return picked


def greedy_tfidf(article, budget=None, config=None, space=None, index=None, method='greedy_tfidf'):
    """
    Repeatedly picks the sentence with the largest TFIDF mass over terms no picked sentence
    covers yet, until nothing fits or nothing new is covered.
    """

    config, space = _resolve(article, budget, config, space, index)
    if not any(space.weights):
        return _from_lead(article, method, config, space)

    picked = _greedy_cover(space, range(len(space)), config.budget)
    return _assemble(article, method, picked, space)


def ilp_budget(article, budget=None, config=None, space=None, index=None):
    """
    Exact idf-weighted concept coverage under the word budget. Articles with more sentences than
    config.exact_cap are summarized by the submodular method and flagged approximate.
    """

    config, space = _resolve(article, budget, config, space, index)
    term_weights = _idf_weights(space)
    if not any(weight > 0.0 for weight in term_weights.values()):
        return _from_lead(article, 'ilp_budget', config, space)

    if sum(space.words) <= config.budget:
        return _assemble(article, 'ilp_budget', range(len(space)), space)

    if len(space) > config.exact_cap:
        log.info('%s has %d sentences, above the exact cap of %d; using the greedy approximation',
                 article.id, len(space), config.exact_cap)
        summary = submodular(article, config=config, space=space, method='ilp_budget')
        return replace(summary, approximate=True)

    picked = max_coverage_exact([frozenset(terms) for terms in space.terms], space.words, config.budget,
                                term_weights)
    return _assemble(article, 'ilp_budget', picked, space)


def score_ilp_tfidf(article, budget=None, config=None, space=None, index=None):
    """
    0/1 knapsack with sentence value the sum of its TFIDF weights and cost its word count. May be
    empty when every sentence exceeds the budget.
    """

    config, space = _resolve(article, budget, config, space, index)
    values = [sum(weights.values()) for weights in space.weights]
    picked = knapsack(values, space.words, config.budget)
    return _assemble(article, 'score_ilp_tfidf', picked, space)


def title_pool(article, space):
    """
    Positions of sentences sharing at least one content stem with the title.
    """

    title_terms = set(textproc.tokenize(article.title).content_stems)
    return [i for i, terms in enumerate(space.terms) if terms & title_terms]


def title_reduction(article, budget=None, config=None, space=None, index=None):
    """
    greedy_tfidf restricted to the sentences that share a content stem with the title, or over the
    whole article when none does.
    """

    config, space = _resolve(article, budget, config, space, index)
    pool = title_pool(article, space)
    if not pool:
        log.debug('%s: no sentence shares a title stem, summarizing the full document', article.id)
        return greedy_tfidf(article, config=config, space=space, method='title_reduction')

    if not any(space.weights[i] for i in pool):
        return _from_lead(article, 'title_reduction', config, space)

    picked = _greedy_cover(space, pool, config.budget)
    return _assemble(article, 'title_reduction', picked, space)


def tweets_as_summary(article_id, linked, threshold):
    """
    Reads the posts linked to an article at or above a relevance level as one summary.

    :param article_id:
    :param linked: iterable of (Post, probability, final label)
    :param threshold: 1 for the partially relevant set, 2 for the relevant set
    :return Summary: post texts by probability descending (ties by post id), exact duplicates dropped
    """

    qualifying = sorted(((post, probability) for post, probability, final in linked
                         if final is not None and int(final) >= threshold),
                        key=lambda item: (-item[1], item[0].id))

    texts = []
    for post, _ in qualifying:
        if post.text not in texts:
            texts.append(post.text)

    text = u' '.join(texts)
    method = 'tweets_relevant' if threshold >= 2 else 'tweets_partial'

    return Summary(article_id=article_id, method=method, picked=(), text=text,
                   word_count=textproc.word_count(text))


SUMMARIZERS = dict(
    lead=lead,
    centroid=centroid,
    lexrank=lexrank,
    textrank=textrank,
    submodular=submodular,
    greedy_tfidf=greedy_tfidf,
    ilp_budget=ilp_budget,
    score_ilp_tfidf=score_ilp_tfidf,
    title_reduction=title_reduction,
)

METHODS = ('lead', 'centroid', 'lexrank', 'textrank', 'submodular', 'greedy_tfidf', 'ilp_budget',
           'score_ilp_tfidf', 'title_reduction')


def summarize_article(article, methods=METHODS, config=None, index=None):
    """
    Runs several summarizers over one article, sharing its sentence space.

    :return list: Summary per method, in the order given
    """

    config = config or SummarizerConfig()
    if not article.sentences:
        return []

    space = SentenceSpace(article.sentences, index=index)
    return [SUMMARIZERS[method](article, config=config, space=space) for method in methods]
