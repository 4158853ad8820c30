# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Evaluation arithmetic: ROUGE-N, word-set overlap (Jaccard, Uniq, content difference), the
extractive recall ceiling, timeliness histograms and word frequency tables.

A text is either a string or a sequence of sentence strings; n-grams never cross sentence
boundaries.
"""

import itertools
import logging
import math
from collections import Counter, defaultdict, namedtuple
from dataclasses import dataclass
from typing import Optional

from crisislink import textproc

log = logging.getLogger(__name__)

TIMELINESS_BIN_DAYS = 5

TimelinessReport = namedtuple('TimelinessReport', ['pairs', 'missing', 'pct_before', 'histogram'])


@dataclass(frozen=True)
class RougeScore:
    n: int
    precision: float
    recall: float
    f1: float
    mean_precision: Optional[float] = None
    mean_recall: Optional[float] = None
    mean_f1: Optional[float] = None


@dataclass(frozen=True)
class WordSet:
    elements: frozenset
    counts: Counter

    @classmethod
    def from_tokens(cls, tokens):
        counts = Counter(tokens)
        return cls(elements=frozenset(counts), counts=counts)

    @classmethod
    def from_text(cls, text, stopwords=None):
        """
        Content stems of a text (or of a sequence of texts).
        """

        return cls.from_tokens(_terms(text, stem=True, remove_stopwords=True, stopwords=stopwords))

    def __len__(self):
        return len(self.elements)


# ---------------------------------------------------------------------------------------------------
#
#   ROUGE
#
# ---------------------------------------------------------------------------------------------------

def _segments(text):
    if isinstance(text, str):
        return [text]
    return list(text)


def _segment_terms(segment, stem, remove_stopwords, stopwords=None):
    tokenized = textproc.tokenize(segment, stopwords)
    if remove_stopwords:
        return tokenized.content_stems if stem else tokenized.content_tokens
    return tokenized.stems if stem else tokenized.tokens


def _terms(text, stem=True, remove_stopwords=False, stopwords=None):
    return list(itertools.chain.from_iterable(_segment_terms(segment, stem, remove_stopwords, stopwords)
                                              for segment in _segments(text)))


def ngram_counts(tokens, n):
    """
    Multiset of contiguous n-grams of one token sequence.
    """

    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def f_score(precision, recall):
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_from_counts(peer_counts, reference_counts, n):
    """
    Clipped n-gram overlap of two n-gram multisets.

    :return RougeScore: ratios are 0 when their denominator is
    """

    matched = sum(min(count, reference_counts[gram]) for gram, count in peer_counts.items())
    peer_total = sum(peer_counts.values())
    reference_total = sum(reference_counts.values())

    precision = matched / float(peer_total) if peer_total else 0.0
    recall = matched / float(reference_total) if reference_total else 0.0

    return RougeScore(n=n, precision=precision, recall=recall, f1=f_score(precision, recall))


def rouge_n_tokens(peer_tokens, reference_tokens, n):
    """
    ROUGE-N of two already tokenized sequences.
    """

    return rouge_from_counts(ngram_counts(list(peer_tokens), n), ngram_counts(list(reference_tokens), n), n)


def text_ngrams(text, n, stem=True, remove_stopwords=False, stopwords=None):
    counts = Counter()
    for segment in _segments(text):
        counts.update(ngram_counts(list(_segment_terms(segment, stem, remove_stopwords, stopwords)), n))
    return counts


def rouge_n(peer, references, n=1, stem=True, remove_stopwords=False, stopwords=None):
    """
    ROUGE-N of a peer against one or more references. With several references the triple of
    the reference with the best F1 is reported and the per-reference means fill the mean fields.

    :param peer: text or list of sentences
    :param references: a text, or a list whose items are texts (a string or a list of sentences)
    :param n: 1 or 2
    :param stem: compare Porter stems
    :param remove_stopwords: drop stopwords before counting
    :return RougeScore:
    """

    if isinstance(references, str):
        references = [references]
    if not references:
        raise ValueError('at least one reference is required')

    peer_counts = text_ngrams(peer, n, stem, remove_stopwords, stopwords)
    scores = [rouge_from_counts(peer_counts, text_ngrams(reference, n, stem, remove_stopwords, stopwords), n)
              for reference in references]

    best = scores[0]
    for score in scores[1:]:
        if score.f1 > best.f1:
            best = score

    count = float(len(scores))
    return RougeScore(n=n, precision=best.precision, recall=best.recall, f1=best.f1,
                      mean_precision=sum(score.precision for score in scores) / count,
                      mean_recall=sum(score.recall for score in scores) / count,
                      mean_f1=sum(score.f1 for score in scores) / count)


def recall_ceiling(article, references, n=1, **options):
    """
    ROUGE of the whole article used as the peer; its recall bounds every extractive summary.
    """

    return rouge_n(list(article.sentences), references, n, **options)


# ---------------------------------------------------------------------------------------------------
#
#   Word-set overlap
#
# ---------------------------------------------------------------------------------------------------

def _elements(value):
    return value.elements if isinstance(value, WordSet) else frozenset(value)


def jaccard(a, b):
    """
    |a & b| / |a | b|, 1 for two empty sets.
    """

    a, b = _elements(a), _elements(b)
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / float(len(union))


def uniq(a, b):
    """
    Share of each set missing from the other.

    :return tuple: (Uniq(A|B), Uniq(B|A)), each 0 for an empty set
    """

    a, b = _elements(a), _elements(b)
    common = a & b
    unique_a = len(a - common) / float(len(a)) if a else 0.0
    unique_b = len(b - common) / float(len(b)) if b else 0.0
    return unique_a, unique_b


def content_difference(a, b):
    """
    Removes from a every occurrence of each word that b contains at all.

    :param a: Counter or WordSet
    :param b: Counter, WordSet or any collection of words
    :return Counter:
    """

    a_counts = a.counts if isinstance(a, WordSet) else Counter(a)
    b_words = b.elements if isinstance(b, WordSet) else set(b)
    return Counter(dict((word, count) for word, count in a_counts.items() if word not in b_words and count > 0))


def word_frequencies(texts, min_freq=2, stopwords=None):
    """
    Content-stem frequencies across texts, the table behind a word cloud.

    :return list: (word, count) with count >= min_freq, by count descending then word
    """

    counts = Counter()
    for text in texts:
        counts.update(_terms(text, stem=True, remove_stopwords=True, stopwords=stopwords))
    return frequency_rows(counts, min_freq)


def frequency_rows(counts, min_freq=2):
    return sorted(((word, count) for word, count in counts.items() if count >= min_freq),
                  key=lambda item: (-item[1], item[0]))


# ---------------------------------------------------------------------------------------------------
#
#   Timeliness
#
# ---------------------------------------------------------------------------------------------------

def bin_start(distance, width=TIMELINESS_BIN_DAYS):
    return int(math.floor(distance / float(width))) * width


def timeliness(distances, width=TIMELINESS_BIN_DAYS):
    """
    Histogram of temporal distances and the share of posts that preceded their article.

    :param distances: days (article minus post), None for a pair missing a timestamp
    :return TimelinessReport: histogram as (bin start, count) sorted by bin; pct_before None without data
    """

    present = [float(distance) for distance in distances if distance is not None]
    missing = sum(1 for distance in distances if distance is None)

    histogram = sorted(Counter(bin_start(distance, width) for distance in present).items())
    pct_before = sum(1 for distance in present if distance > 0.0) / float(len(present)) if present else None

    return TimelinessReport(pairs=len(present), missing=missing, pct_before=pct_before, histogram=histogram)


def timeliness_report(pairs, labels=(1, 2), width=TIMELINESS_BIN_DAYS):
    """
    Timeliness per relevance level.

    :param pairs: iterable of (temporal distance or None, final label)
    :param labels: the levels to report
    :return dict: label -> TimelinessReport
    """

    grouped = defaultdict(list)
    for distance, label in pairs:
        if label is not None:
            grouped[int(label)].append(distance)

    report = dict()
    for label in labels:
        report[label] = timeliness(grouped.get(label, []), width)
        if report[label].missing:
            log.info('%d label-%d pairs lack a timestamp and were left out', report[label].missing, label)

    return report


# ---------------------------------------------------------------------------------------------------
#
#   Corpus-level tables
#
# ---------------------------------------------------------------------------------------------------

def _mean(values):
    values = [value for value in values if value is not None]
    return sum(values) / float(len(values)) if values else None


def extractive_reference(annotation, article):
    """
    The sentences an annotator selected, in their order of importance.
    """

    return [article.sentence(index) for index in annotation.extractive
            if 1 <= index <= len(article.sentences)]


def annotation_texts(annotations, article):
    """
    (abstractive references, extractive references) of one article; empty ones are dropped.
    """

    abstractive = [annotation.abstractive for annotation in annotations if annotation.abstractive.strip()]
    extractive = [extractive_reference(annotation, article) for annotation in annotations]
    return abstractive, [reference for reference in extractive if reference]


def annotator_jaccard_table(annotations, articles, kind='abstractive'):
    """
    Mean Jaccard index of word sets for every pair of annotators over the articles both summarized.
    Annotators who share no article with anyone get a row with no partner.

    :param annotations: list of SummaryAnnotation
    :param articles: dict article_id -> Article
    :param kind: 'abstractive' or 'extractive'
    :return list: dicts annotator_a, annotator_b, documents, jaccard (None = not applicable)
    """

    by_article = defaultdict(dict)
    for annotation in annotations:
        if annotation.article_id in articles:
            by_article[annotation.article_id][annotation.annotator] = annotation

    def word_set(annotation):
        if kind == 'abstractive':
            return WordSet.from_text(annotation.abstractive)
        return WordSet.from_text(extractive_reference(annotation, articles[annotation.article_id]))

    shared = defaultdict(list)
    paired = set()
    annotators = set()
    for article_id in sorted(by_article):
        group = by_article[article_id]
        annotators.update(group)
        for first, second in itertools.combinations(sorted(group), 2):
            shared[(first, second)].append(jaccard(word_set(group[first]), word_set(group[second])))
            paired.update((first, second))

    rows = [dict(annotator_a=first, annotator_b=second, documents=len(values), jaccard=_mean(values))
            for (first, second), values in sorted(shared.items())]
    rows.extend(dict(annotator_a=annotator, annotator_b=None, documents=0, jaccard=None)
                for annotator in sorted(annotators - paired))

    return rows


def score_summaries(summaries, annotations, articles, stem=True, remove_stopwords=False):
    """
    Mean scores per summarizer: ROUGE-1/2 F1 against the abstractive references and ROUGE-1/2
    precision against the extractive ones.

    :param summaries: list of Summary
    :param annotations: list of SummaryAnnotation
    :param articles: dict article_id -> Article
    :return list: one dict per method, in first-seen order
    """

    grouped = defaultdict(list)
    for annotation in annotations:
        grouped[annotation.article_id].append(annotation)

    methods = []
    results = defaultdict(lambda: defaultdict(list))
    for summary in summaries:
        article = articles.get(summary.article_id)
        if article is None or summary.article_id not in grouped:
            continue
        if summary.method not in methods:
            methods.append(summary.method)

        abstractive, extractive = annotation_texts(grouped[summary.article_id], article)
        peer = summary_segments(summary, article)
        columns = results[summary.method]
        columns['documents'].append(1)
        for n in (1, 2):
            if abstractive:
                columns['abstractive_r{0}_f1'.format(n)].append(
                    rouge_n(peer, abstractive, n, stem, remove_stopwords).f1)
            if extractive:
                columns['extractive_r{0}_precision'.format(n)].append(
                    rouge_n(peer, extractive, n, stem, remove_stopwords).precision)

    rows = []
    for method in methods:
        columns = results[method]
        row = dict(method=method, documents=len(columns['documents']))
        for n in (1, 2):
            row['abstractive_r{0}_f1'.format(n)] = _mean(columns['abstractive_r{0}_f1'.format(n)])
            row['extractive_r{0}_precision'.format(n)] = _mean(columns['extractive_r{0}_precision'.format(n)])
        rows.append(row)

    return rows


def summary_segments(summary, article):
    """
    The sentences of an extractive summary, or its text when it was not assembled from whole
    article sentences.
    """

    if summary.picked and not summary.truncated:
        return [article.sentence(index) for index in summary.picked]
    return summary.text


def score_tweet_summaries(tweet_summaries, annotations, articles, stem=True, remove_stopwords=False):
    """
    Post collections scored like summaries, plus precision against the whole article.

    :param tweet_summaries: Summary objects built by tweets_as_summary
    :return list: one dict per relevance level
    """

    rows = score_summaries(tweet_summaries, annotations, articles, stem, remove_stopwords)

    article_precision = defaultdict(lambda: defaultdict(list))
    for summary in tweet_summaries:
        article = articles.get(summary.article_id)
        if article is None:
            continue
        for n in (1, 2):
            article_precision[summary.method][n].append(
                rouge_n(summary.text, [list(article.sentences)], n, stem, remove_stopwords).precision)

    for row in rows:
        for n in (1, 2):
            row['article_r{0}_precision'.format(n)] = _mean(article_precision[row['method']][n])

    return rows


def uniqueness_table(tweet_summaries, articles, annotations):
    """
    Uniq of each post collection against the articles and both kinds of human summary, every side
    read as a single set of words.

    :return list: dicts set_a, set_b, uniq_ab, uniq_ba
    """

    linked_ids = sorted(set(summary.article_id for summary in tweet_summaries if summary.article_id in articles))

    abstractive_texts, extractive_texts = [], []
    for annotation in annotations:
        article = articles.get(annotation.article_id)
        if article is None or annotation.article_id not in linked_ids:
            continue
        abstractive_texts.append(annotation.abstractive)
        extractive_texts.extend(extractive_reference(annotation, article))

    targets = [
        ('articles', WordSet.from_text([articles[article_id].body for article_id in linked_ids])),
        ('abstractive', WordSet.from_text(abstractive_texts)),
        ('extractive', WordSet.from_text(extractive_texts)),
    ]

    rows = []
    methods = sorted(set(summary.method for summary in tweet_summaries))
    for method in methods:
        tweets = WordSet.from_text([summary.text for summary in tweet_summaries if summary.method == method])
        for name, target in targets:
            uniq_ab, uniq_ba = uniq(tweets, target)
            rows.append(dict(set_a=method, set_b=name, uniq_ab=uniq_ab, uniq_ba=uniq_ba))

    return rows
