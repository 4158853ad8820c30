# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Post-article linking: pair features, balanced training of a calibrated linear margin model,
probability ranking and the arithmetic used to evaluate annotated links.
"""

import io
import json
import logging
import math
import re
from collections import Counter, namedtuple
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from crisislink import textproc
from crisislink.errors import ArtifactError, TrainingError
from crisislink.retrieval import cosine

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0

FEATURE_NAMES = ('char2gramSim', 'char3gramSim', 'exp_char2gramSim', 'exp_char3gramSim',
                 'temporal_distance', 'tfidf_sim', 'hashtag_sim')

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_FOLDS = 5
VALIDATION_FRACTION = 0.2
HOLDOUT_FRACTION = 0.3
EXPORT_TOP = 10

CAMEL_CASE_RE = re.compile(r'[A-Z]+(?![a-z])|[A-Z]?[a-z]+|[0-9]+')

AGREEMENT_WEIGHTS = {0: 1.0, 1: 0.5, 2: 0.0}

Agreement = namedtuple('Agreement', ['score', 'pairs', 'skipped'])


@dataclass(frozen=True)
class PairFeatures:
    char2gramSim: float
    char3gramSim: float
    exp_char2gramSim: float
    exp_char3gramSim: float
    temporal_distance: float
    tfidf_sim: float
    hashtag_sim: float
    missing_time: bool = False

    def as_vector(self):
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)

    def to_dict(self):
        row = dict((name, getattr(self, name)) for name in FEATURE_NAMES)
        row['missing_time'] = self.missing_time
        return row


@dataclass(frozen=True)
class LinkResult:
    article_id: str
    ranked: tuple

    def export(self, top=EXPORT_TOP):
        """
        The view handed to annotators: the `top` most probable posts.
        """

        return self.ranked[:top]


# ---------------------------------------------------------------------------------------------------
#
#   Pair features
#
# ---------------------------------------------------------------------------------------------------

def _ngram_overlap(post_bag, article_bag):
    if not post_bag.size or not article_bag.size:
        return 0.0

    matched = sum((post_bag.counts & article_bag.counts).values())
    return matched / float(min(post_bag.size, article_bag.size))


def char_ngram_sim(post_tokens, article_tokens, n):
    """
    Matched character n-grams normalised by the smaller bag, so containment scores 1.

    :param post_tokens: content tokens of the post
    :param article_tokens: content tokens of the article
    :param n: 2 or 3
    :return float: in [0, 1]
    """

    return _ngram_overlap(textproc.char_ngrams(post_tokens, n), textproc.char_ngrams(article_tokens, n))


def expanded_char_ngram_sim(post_tokens, article_tokens, n, lexdb):
    """
    char_ngram_sim after synonym expansion of both sides.
    """

    post_expanded = list(textproc.expand_synsets(post_tokens, lexdb).elements())
    article_expanded = list(textproc.expand_synsets(article_tokens, lexdb).elements())

    return char_ngram_sim(post_expanded, article_expanded, n)


def split_hashtag(hashtag):
    """
    Splits a hashtag at lower-to-upper and letter-digit boundaries: 'NepalQuake' -> ['Nepal', 'Quake'].
    """

    parts = CAMEL_CASE_RE.findall(hashtag)
    return parts or [hashtag]


def hashtag_sim(hashtags, article_stems, stopwords=None):
    """
    Fraction of hashtags with at least one camel-case part whose stem occurs in the article. Parts that
    are stopwords never match, so 'PrayForNepal' needs 'pray' or 'nepal' in the article.

    :param hashtags: post hashtags without the leading '#'
    :param article_stems: stemmed tokens of the article
    :param stopwords: set of lowercased stopwords, defaults to the shipped English list
    :return float: 0 for a post without hashtags
    """

    if not hashtags:
        return 0.0
    if stopwords is None:
        stopwords = textproc.default_stopwords()

    article_stems = set(article_stems)
    matched = 0
    for hashtag in hashtags:
        words = [part.lower() for part in split_hashtag(hashtag)] + [hashtag.lower()]
        candidates = [textproc.stem(word) for word in words if word not in stopwords]
        if any(candidate in article_stems for candidate in candidates):
            matched += 1

    return matched / float(len(hashtags))


def day_difference(start, end):
    """
    (end - start) in fractional days, None when either timestamp is missing.
    """

    if start is None or end is None:
        return None
    return (end - start).total_seconds() / SECONDS_PER_DAY


def temporal_distance(post, article):
    """
    Article publication time minus post time, in days. Positive means the post came first.
    """

    return day_difference(post.created_at, article.published_at)


class PairFeatureExtractor(object):
    """
    Computes PairFeatures over many pairs, tokenizing each post and article once.

    :param index: TfidfIndex over the articles
    :param lexdb: LexicalDatabase used for the expanded n-gram features
    """

    def __init__(self, index, lexdb, stopwords=None):
        self.index = index
        self.lexdb = lexdb
        self.stopwords = stopwords
        self._tokens = dict()
        self._expanded = dict()

    def _tokenized(self, kind, item):
        key = (kind, item.id)
        if key not in self._tokens:
            text = item.text if kind == 'post' else u'{0}\n{1}'.format(item.title, item.body).strip()
            self._tokens[key] = textproc.tokenize(text, self.stopwords)
        return self._tokens[key]

    def _expanded_tokens(self, kind, item):
        key = (kind, item.id)
        if key not in self._expanded:
            tokens = self._tokenized(kind, item).content_tokens
            self._expanded[key] = list(textproc.expand_synsets(tokens, self.lexdb, self.stopwords).elements())
        return self._expanded[key]

    def post_tokens(self, post):
        return self._tokenized('post', post)

    def article_tokens(self, article):
        return self._tokenized('article', article)

    def features(self, post, article):
        post_text = self._tokenized('post', post)
        article_text = self._tokenized('article', article)
        post_expanded = self._expanded_tokens('post', post)
        article_expanded = self._expanded_tokens('article', article)

        distance = temporal_distance(post, article)

        return PairFeatures(
            char2gramSim=char_ngram_sim(post_text.content_tokens, article_text.content_tokens, 2),
            char3gramSim=char_ngram_sim(post_text.content_tokens, article_text.content_tokens, 3),
            exp_char2gramSim=char_ngram_sim(post_expanded, article_expanded, 2),
            exp_char3gramSim=char_ngram_sim(post_expanded, article_expanded, 3),
            temporal_distance=0.0 if distance is None else distance,
            tfidf_sim=cosine(self.index.vectorize(post_text.content_stems),
                             self.index.vectorize(article_text.content_stems)),
            hashtag_sim=hashtag_sim(post.hashtags, article_text.content_stems, self.stopwords),
            missing_time=distance is None,
        )

    def candidate_pairs(self, posts, k=100):
        """
        (post, article_id, retrieval score) for every post and its top-k retrieved articles.
        """

        for post in posts:
            for article_id, score in self.index.top_k(self.post_tokens(post).content_stems, k=k):
                yield post, article_id, score


def make_features(post, article, index, lexdb, stopwords=None):
    """
    All seven features of one post-article pair. A missing timestamp sets `missing_time` and the
    distance feature to 0.

    :return PairFeatures:
    """

    return PairFeatureExtractor(index, lexdb, stopwords).features(post, article)


# ---------------------------------------------------------------------------------------------------
#
#   Training
#
# ---------------------------------------------------------------------------------------------------

def undersample(pairs, labels, seed):
    """
    Randomly drops majority-class examples down to the minority count.

    :param pairs: examples, any type
    :param labels: binary labels aligned with pairs
    :param seed: random seed
    :return tuple: (pairs, labels) with exactly equal class counts, original order preserved
    """

    labels = [int(label) for label in labels]
    if len(pairs) != len(labels):
        raise TrainingError('got {0} pairs but {1} labels'.format(len(pairs), len(labels)))

    positives = [i for i, label in enumerate(labels) if label == 1]
    negatives = [i for i, label in enumerate(labels) if label != 1]
    if not positives or not negatives:
        raise TrainingError('degenerate training set: both classes are required')

    minority, majority = sorted((positives, negatives), key=len)
    rng = np.random.default_rng(seed)
    kept = set(minority) | set(int(i) for i in rng.choice(majority, size=len(minority), replace=False))

    order = sorted(kept)
    log.debug('Undersampled %d examples to %d', len(labels), len(order))

    return [pairs[i] for i in order], [labels[i] for i in order]


def holdout_split(labels, fraction, seed):
    """
    Seeded stratified split of labeled examples into a training part and a held-out part. Each class
    holds out round(fraction * class size) examples but keeps at least one for training.

    :param labels: class label per example
    :param fraction: share of each class held out, in [0, 1)
    :param seed: random seed
    :return tuple: (training positions, held-out positions), both ascending
    """

    if not 0.0 <= fraction < 1.0:
        raise TrainingError('holdout fraction must lie in [0, 1), got {0}'.format(fraction))

    by_class = dict()
    for i, label in enumerate(labels):
        by_class.setdefault(int(label), []).append(i)

    rng = np.random.default_rng(seed)
    held_out = set()
    for label in sorted(by_class):
        members = by_class[label]
        size = min(int(math.floor(fraction * len(members) + 0.5)), len(members) - 1)
        held_out.update(int(i) for i in rng.permutation(members)[:size])

    training = [i for i in range(len(labels)) if i not in held_out]
    log.debug('Held out %d of %d labeled examples', len(held_out), len(labels))

    return training, sorted(held_out)


def _squared_hinge(params, X, y, c):
    weights, bias = params[:-1], params[-1]
    margins = 1.0 - y * (X.dot(weights) + bias)
    active = margins > 0.0
    loss = 0.5 * weights.dot(weights) + c * np.sum(margins[active] ** 2)

    gradient = np.empty_like(params)
    coefficient = -2.0 * c * y[active] * margins[active]
    gradient[:-1] = weights + X[active].T.dot(coefficient)
    gradient[-1] = np.sum(coefficient)

    return loss, gradient


def _fit_margin(X, y, c):
    """
    L2-regularised squared-hinge linear classifier; y in {-1, +1}.
    """

    start = np.zeros(X.shape[1] + 1)
    result = optimize.minimize(_squared_hinge, start, args=(X, y, c), jac=True, method='L-BFGS-B')
    return result.x[:-1], float(result.x[-1])


def _platt_objective(params, margins, targets):
    slope, intercept = params
    z = slope * margins + intercept
    # log(1 + exp(z)) - t * z, stable for large |z|
    loss = np.sum(np.logaddexp(0.0, z) - targets * z)
    residual = 1.0 / (1.0 + np.exp(-z)) - targets
    return loss, np.array([np.sum(residual * margins), np.sum(residual)])


def _fit_platt(margins, y):
    """
    Sigmoid calibration of margins with smoothed targets; the slope is kept non-negative so
    probabilities never decrease with the margin.
    """

    positives = float(np.sum(y > 0))
    negatives = float(np.sum(y <= 0))
    targets = np.where(y > 0, (positives + 1.0) / (positives + 2.0), 1.0 / (negatives + 2.0))

    result = optimize.minimize(_platt_objective, np.array([1.0, 0.0]), args=(margins, targets), jac=True,
                               method='L-BFGS-B', bounds=[(0.0, None), (None, None)])
    return float(result.x[0]), float(result.x[1])


class LinkModel(object):
    """
    Linear margin scorer over standardised features with sigmoid probability calibration.
    """

    def __init__(self, weights, bias, mean, scale, slope, intercept, metadata=None):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = float(bias)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.metadata = dict(metadata or {})

    def _as_matrix(self, features):
        rows = [item.as_vector() if isinstance(item, PairFeatures) else np.asarray(item, dtype=np.float64)
                for item in features]
        return np.vstack(rows) if rows else np.zeros((0, len(FEATURE_NAMES)))

    def margin(self, features):
        X = (self._as_matrix(features) - self.mean) / self.scale
        return X.dot(self.weights) + self.bias

    def predict_proba(self, features):
        """
        Probability of the relevant class for each example, monotone in the margin.
        """

        z = self.slope * self.margin(features) + self.intercept
        return 1.0 / (1.0 + np.exp(-z))

    def predict(self, features):
        return (self.margin(features) >= 0.0).astype(int)

    def to_dict(self):
        return dict(
            features=list(FEATURE_NAMES),
            weights=[float(value) for value in self.weights],
            bias=self.bias,
            mean=[float(value) for value in self.mean],
            scale=[float(value) for value in self.scale],
            calibration=dict(slope=self.slope, intercept=self.intercept),
            metadata=self.metadata,
        )

    @classmethod
    def from_dict(cls, data):
        return cls(data['weights'], data['bias'], data['mean'], data['scale'],
                   data['calibration']['slope'], data['calibration']['intercept'], data.get('metadata'))

    def save(self, path):
        with io.open(path, 'w', encoding='utf-8') as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write(u'\n')

    @classmethod
    def load(cls, path):
        try:
            with io.open(path, encoding='utf-8') as fh:
                return cls.from_dict(json.load(fh))
        except (IOError, OSError, ValueError, KeyError) as e:
            raise ArtifactError('Unable to load link model {0}: {1}'.format(path, e))


def _fold_indices(count, folds):
    bounds = [count * fold // folds for fold in range(folds + 1)]
    return [np.arange(bounds[fold], bounds[fold + 1]) for fold in range(folds)]


def _cross_validate(X, y, c, folds):
    accuracies = []
    for test in _fold_indices(len(y), folds):
        train = np.setdiff1d(np.arange(len(y)), test)
        if not len(test) or len(set(y[train])) < 2:
            continue
        weights, bias = _fit_margin(X[train], y[train], c)
        predictions = np.where(X[test].dot(weights) + bias >= 0.0, 1, -1)
        accuracies.append(float(np.mean(predictions == y[test])))

    return float(np.mean(accuracies)) if accuracies else None


def train(features, labels, seed, c_grid=DEFAULT_C_GRID, folds=DEFAULT_FOLDS, pair_ids=None):
    """
    Trains the link model. The regularisation constant is chosen by k-fold cross validation on a
    random fifth of the examples, then the model is refit on all of them and calibrated.

    :param features: list of PairFeatures (or 7-element vectors)
    :param labels: binary labels, 1 = linked
    :param seed: random seed for the validation split
    :param c_grid: candidate regularisation constants
    :param folds: number of cross-validation folds
    :param pair_ids: optional names of the examples, used in error messages
    :return LinkModel:
    """

    rows = [item.as_vector() if isinstance(item, PairFeatures) else np.asarray(item, dtype=np.float64)
            for item in features]
    if len(rows) != len(labels):
        raise TrainingError('got {0} feature rows but {1} labels'.format(len(rows), len(labels)))

    for i, row in enumerate(rows):
        if row.shape != (len(FEATURE_NAMES),):
            raise TrainingError('feature row {0} has {1} values, expected {2}'.format(
                pair_ids[i] if pair_ids else i, row.size, len(FEATURE_NAMES)))
        if not np.all(np.isfinite(row)):
            raise TrainingError('non-finite feature in pair {0}'.format(pair_ids[i] if pair_ids else i))

    y = np.where(np.asarray(labels, dtype=int) == 1, 1, -1)
    if len(set(y)) < 2:
        raise TrainingError('degenerate training set: both classes are required')

    X = np.vstack(rows)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    X = (X - mean) / scale

    rng = np.random.default_rng(seed)
    permutation = rng.permutation(len(y))
    validation = permutation[:int(math.ceil(len(y) * VALIDATION_FRACTION))]
    if len(validation) < 2 * folds or len(set(y[validation])) < 2:
        log.info('Validation fifth too small for %d-fold search, using all %d examples', folds, len(y))
        validation = permutation

    cv_scores = dict()
    for c in c_grid:
        cv_scores[c] = _cross_validate(X[validation], y[validation], c, folds)
        log.debug('C=%s cross-validated accuracy %s', c, cv_scores[c])

    scored = [(score, -c) for c, score in cv_scores.items() if score is not None]
    best_c = -max(scored)[1] if scored else 1.0

    weights, bias = _fit_margin(X, y, best_c)
    slope, intercept = _fit_platt(X.dot(weights) + bias, y)

    metadata = dict(
        seed=seed,
        c_grid=[float(c) for c in c_grid],
        folds=folds,
        best_c=float(best_c),
        cv_accuracy=dict((repr(float(c)), score) for c, score in cv_scores.items()),
        examples=int(len(y)),
        validation_examples=int(len(validation)),
    )
    log.info('Trained link model on %d examples, C=%s', len(y), best_c)

    return LinkModel(weights, bias, mean, scale, slope, intercept, metadata)


# ---------------------------------------------------------------------------------------------------
#
#   Ranking and evaluation
#
# ---------------------------------------------------------------------------------------------------

def rank_posts(article_id, candidates, model):
    """
    Ranks candidate posts of one article by relevance probability.

    :param article_id:
    :param candidates: list of (post_id, PairFeatures)
    :param model: LinkModel
    :return LinkResult: probability descending, ties by post_id
    """

    if not candidates:
        return LinkResult(article_id=article_id, ranked=())

    probabilities = model.predict_proba([features for _, features in candidates])
    ranked = sorted(((post_id, float(probability)) for (post_id, _), probability in zip(candidates, probabilities)),
                    key=lambda item: (-item[1], item[0]))

    return LinkResult(article_id=article_id, ranked=tuple(ranked))


def weighted_precision(finals):
    """
    Precision of ranked links, counting a partially relevant link as half a true positive.

    :param finals: aggregated labels
    :return float: None for an empty list
    """

    finals = [int(label) for label in finals]
    if not finals:
        return None

    counts = Counter(finals)
    return (counts[2] + 0.5 * counts[1]) / float(len(finals))


def annotator_agreement(label_pairs):
    """
    Mean agreement between two annotators: 1 for equal labels, 0.5 when they differ by one, 0 otherwise.

    :param label_pairs: sequence of label sequences, each expected to hold two labels
    :return Agreement: score (None when nothing is scorable), scored pair count, skipped item count
    """

    weights = []
    skipped = 0
    for labels in label_pairs:
        labels = list(labels)
        if len(labels) != 2:
            skipped += 1
            continue
        weights.append(AGREEMENT_WEIGHTS[abs(int(labels[0]) - int(labels[1]))])

    if skipped:
        log.warning('Skipped %d items without exactly two labels', skipped)

    score = sum(weights) / float(len(weights)) if weights else None
    return Agreement(score=score, pairs=len(weights), skipped=skipped)


LinkedPost = namedtuple('LinkedPost', ['article_id', 'post_id', 'probability', 'final', 'temporal_distance',
                                       'in_training'])


def link_record(result, finals, distances, top=EXPORT_TOP, training=frozenset()):
    """
    The exported view of a LinkResult as a JSON-ready dict.

    :param result: LinkResult
    :param finals: (post_id, article_id) -> final label, for annotated pairs
    :param distances: (post_id, article_id) -> temporal distance in days or None
    :param training: (post_id, article_id) keys of the pairs the model was trained on
    :return dict:
    """

    ranked = []
    for post_id, probability in result.export(top):
        key = (post_id, result.article_id)
        final = finals.get(key)
        ranked.append(dict(post_id=post_id, probability=probability,
                           final=None if final is None else int(final), temporal_distance=distances.get(key),
                           in_training=key in training))

    return dict(article_id=result.article_id, candidates=len(result.ranked), ranked=ranked)


def read_link_records(records):
    """
    Flattens exported link records back into LinkedPost tuples, in file order.
    """

    linked = []
    for record in records:
        for item in record.get('ranked', []):
            linked.append(LinkedPost(article_id=record['article_id'], post_id=item['post_id'],
                                     probability=float(item['probability']), final=item.get('final'),
                                     temporal_distance=item.get('temporal_distance'),
                                     in_training=bool(item.get('in_training'))))
    return linked


def held_out_finals(linked):
    """
    Final labels of the linked posts whose pair took no part in training, the pairs precision is measured on.

    :param linked: LinkedPost tuples
    :return list:
    """

    return [item.final for item in linked if item.final is not None and not item.in_training]
