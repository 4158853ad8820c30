# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
TFIDF vector space over stemmed content tokens.

weight(t, d) = (1 + log tf(t, d)) * log(N / df(t)); document vectors are L2-normalised, so a term
present in every document carries no weight.
"""

import io
import json
import logging
import math
from collections import Counter

import numpy as np
from scipy import sparse

from crisislink.errors import ArtifactError

log = logging.getLogger(__name__)

INDEX_FORMAT_VERSION = 1


def _log_tf(count):
    return 1.0 + math.log(count)


def cosine(v1, v2):
    """
    Cosine of two sparse row vectors; 0 when either is the zero vector.

    :param v1: 1 x V sparse matrix or 1-d array
    :param v2: same shape as v1
    :return float: clipped to [0, 1]
    """

    v1 = sparse.csr_matrix(v1)
    v2 = sparse.csr_matrix(v2)

    norm1 = math.sqrt(v1.multiply(v1).sum())
    norm2 = math.sqrt(v2.multiply(v2).sum())
    if norm1 == 0.0 or norm2 == 0.0:
        return 0.0

    value = float(v1.multiply(v2).sum()) / (norm1 * norm2)

    return min(1.0, max(0.0, value))


class TfidfIndex(object):
    """
    Immutable index over a document collection.

    :param vocabulary: term -> column id
    :param df: document frequency per column
    :param doc_ids: row order of the document matrix
    :param matrix: N x V csr matrix of normalised document vectors
    """

    def __init__(self, vocabulary, df, doc_ids, matrix):
        self.vocabulary = vocabulary
        self.df = np.asarray(df, dtype=np.int64)
        self.doc_ids = list(doc_ids)
        self.n_docs = len(self.doc_ids)
        self.matrix = sparse.csr_matrix(matrix)
        self._rows = dict((doc_id, row) for row, doc_id in enumerate(self.doc_ids))

        with np.errstate(divide='ignore'):
            self.idf = np.log(float(self.n_docs) / self.df) if len(self.df) else np.zeros(0)

    def idf_of(self, term):
        column = self.vocabulary.get(term)
        if column is None:
            return 0.0
        return float(self.idf[column])

    def weights(self, terms):
        """
        Unnormalised TFIDF weights of a term sequence under this index. Out-of-vocabulary terms
        have no document frequency and get no weight.

        :param terms: stemmed content tokens
        :return dict: term -> weight, zero weights omitted
        """

        result = dict()
        for term, count in Counter(terms).items():
            weight = _log_tf(count) * self.idf_of(term)
            if weight > 0.0:
                result[term] = weight

        return result

    def vectorize(self, terms):
        """
        Normalised 1 x V vector of a term sequence.
        """

        weights = self.weights(terms)
        columns = sorted(self.vocabulary[term] for term in weights)
        values = np.array([weights[term] for term in sorted(weights, key=self.vocabulary.get)])

        norm = math.sqrt(float(np.dot(values, values))) if len(values) else 0.0
        if norm > 0.0:
            values = values / norm

        return sparse.csr_matrix((values, ([0] * len(columns), columns)), shape=(1, len(self.vocabulary)))

    def vector(self, doc_id):
        return self.matrix.getrow(self._rows[doc_id])

    def scores(self, vector):
        """
        Cosine of a normalised query vector against every document, in doc_ids order.
        """

        return np.asarray(self.matrix.dot(vector.T).todense()).ravel()

    def top_k(self, terms, k=100):
        """
        Ranks documents by cosine to the query terms.

        :param terms: stemmed content tokens of the query
        :param k: maximum list length
        :return list: (doc_id, score) with score > 0, descending, ties by doc_id
        """

        if not terms or not self.n_docs:
            return []

        scores = self.scores(self.vectorize(terms))
        matches = ((self.doc_ids[row], min(1.0, float(score))) for row, score in enumerate(scores) if score > 0.0)
        ranked = sorted(matches, key=lambda item: (-item[1], item[0]))

        return ranked[:k]

    def to_dict(self):
        coo = self.matrix.tocoo()
        return dict(
            version=INDEX_FORMAT_VERSION,
            vocabulary=sorted(self.vocabulary, key=self.vocabulary.get),
            df=[int(value) for value in self.df],
            doc_ids=self.doc_ids,
            rows=[int(value) for value in coo.row],
            cols=[int(value) for value in coo.col],
            values=[float(value) for value in coo.data],
        )

    @classmethod
    def from_dict(cls, data):
        if data.get('version') != INDEX_FORMAT_VERSION:
            raise ArtifactError('Unsupported index format version: {0}'.format(data.get('version')))

        vocabulary = dict((term, column) for column, term in enumerate(data['vocabulary']))
        matrix = sparse.csr_matrix((data['values'], (data['rows'], data['cols'])),
                                   shape=(len(data['doc_ids']), len(vocabulary)))

        return cls(vocabulary, data['df'], data['doc_ids'], matrix)

    def save(self, path):
        with io.open(path, 'w', encoding='utf-8') as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path):
        try:
            with io.open(path, encoding='utf-8') as fh:
                return cls.from_dict(json.load(fh))
        except (IOError, OSError, ValueError, KeyError) as e:
            raise ArtifactError('Unable to load index {0}: {1}'.format(path, e))


def build_index(docs, doc_ids=None):
    """
    Builds the index from tokenized documents using their stemmed content tokens.

    :param docs: list of TokenizedText (or plain term sequences)
    :param doc_ids: identifiers in the same order, defaults to positions
    :return TfidfIndex:
    """

    if not docs:
        raise ValueError('cannot build an index over zero documents')

    if doc_ids is None:
        doc_ids = [str(i) for i in range(len(docs))]

    term_counts = [Counter(getattr(doc, 'content_stems', doc)) for doc in docs]

    vocabulary = dict()
    for counts in term_counts:
        for term in sorted(counts):
            if term not in vocabulary:
                vocabulary[term] = len(vocabulary)

    df = np.zeros(len(vocabulary), dtype=np.int64)
    for counts in term_counts:
        for term in counts:
            df[vocabulary[term]] += 1

    with np.errstate(divide='ignore'):
        idf = np.log(float(len(docs)) / df) if len(df) else np.zeros(0)

    rows, cols, values = [], [], []
    for row, counts in enumerate(term_counts):
        weights = [(vocabulary[term], _log_tf(count) * idf[vocabulary[term]]) for term, count in counts.items()]
        weights = sorted((column, weight) for column, weight in weights if weight > 0.0)
        norm = math.sqrt(sum(weight * weight for _, weight in weights))
        for column, weight in weights:
            rows.append(row)
            cols.append(column)
            values.append(weight / norm)

    matrix = sparse.csr_matrix((values, (rows, cols)), shape=(len(docs), len(vocabulary)))
    log.info('Built TFIDF index: %d documents, %d terms', len(docs), len(vocabulary))

    return TfidfIndex(vocabulary, df, doc_ids, matrix)


def top_k_articles(post, index, k=100):
    """
    Candidate articles for a post.

    :param post: TokenizedText of the post
    :param index: TfidfIndex over articles
    :param k: at most k candidates
    :return list: (article_id, score), score descending, ties by article_id
    """

    return index.top_k(post.content_stems, k=k)
