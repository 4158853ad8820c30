# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Data model, file ingestion and the article filtering pipeline.

Posts and articles are read from JSON Lines or CSV. A record that violates the schema becomes a
RecordError carrying its line number; only an unreadable file raises.
"""

import csv
import datetime
import io
import json
import logging
import os
import random
from collections import Counter, namedtuple
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Tuple

from crisislink import textproc
from crisislink.errors import IngestError

log = logging.getLogger(__name__)

FORMATS = ('jsonl', 'csv')

POST_FIELDS = ('id', 'text', 'created_at', 'author')
ARTICLE_FIELDS = ('id', 'source', 'title', 'body', 'published_at')
LABEL_FIELDS = ('post_id', 'article_id', 'label1', 'label2')

MAX_ABSTRACTIVE_WORDS = 100
MAX_EXTRACTIVE_SENTENCES = 5

TWITTER_TIME_FORMAT = '%a %b %d %H:%M:%S %z %Y'

# removed before the 7-bit check; no transliteration is attempted
ASCII_EXEMPT_WHITESPACE = frozenset(u'\u00a0\u2002\u2003\u2009\u200a\u200b\u202f\u205f\u3000\ufeff')

RecordError = namedtuple('RecordError', ['line', 'field', 'message'])


class RelevanceLabel(IntEnum):
    IRRELEVANT = 0
    PARTIALLY_RELEVANT = 1
    RELEVANT = 2


@dataclass(frozen=True)
class Post:
    id: str
    text: str
    created_at: Optional[datetime.datetime]
    author: str = ''
    hashtags: Tuple[str, ...] = ()
    mentions: Tuple[str, ...] = ()
    urls: Tuple[str, ...] = ()

    @classmethod
    def from_text(cls, id, text, created_at, author=''):
        """
        Builds a post whose markers are derived from its text.
        """

        hashtags, mentions, urls = textproc.extract_markers(text)
        return cls(id=id, text=text, created_at=created_at, author=author,
                   hashtags=tuple(hashtags), mentions=tuple(mentions), urls=tuple(urls))

    def to_dict(self):
        return dict(id=self.id, text=self.text, created_at=format_timestamp(self.created_at), author=self.author,
                    hashtags=list(self.hashtags), mentions=list(self.mentions), urls=list(self.urls))


@dataclass(frozen=True)
class Article:
    id: str
    source: str
    title: str
    body: str
    published_at: Optional[datetime.datetime]
    sentences: Tuple[str, ...] = ()

    @classmethod
    def from_body(cls, id, source, title, body, published_at):
        return cls(id=id, source=source, title=title, body=body, published_at=published_at,
                   sentences=tuple(textproc.split_sentences(body)))

    def sentence(self, index):
        """
        Sentence by annotator index; the first sentence is 1.
        """

        if index < 1 or index > len(self.sentences):
            raise IndexError('sentence index {0} outside 1..{1}'.format(index, len(self.sentences)))
        return self.sentences[index - 1]

    def to_dict(self):
        return dict(id=self.id, source=self.source, title=self.title, body=self.body,
                    published_at=format_timestamp(self.published_at), sentences=list(self.sentences))


def aggregate_labels(labels):
    """
    Final label of a pair: the ceiling of the mean of its annotator labels. For two labels this is
    the sum rule 0 -> 0, 1..2 -> 1, 3..4 -> 2.

    :param labels: annotator labels
    :return RelevanceLabel: None when there are no labels
    """

    labels = [int(label) for label in labels]
    if not labels:
        return None

    return RelevanceLabel(-(-sum(labels) // len(labels)))


@dataclass(frozen=True)
class AnnotatedPair:
    post_id: str
    article_id: str
    labels: Tuple[RelevanceLabel, ...]

    @property
    def final(self):
        return aggregate_labels(self.labels)


@dataclass(frozen=True)
class SummaryAnnotation:
    article_id: str
    annotator: str
    abstractive: str = ''
    extractive: Tuple[int, ...] = ()


@dataclass
class FilterReport:
    input_count: int = 0
    removed: dict = field(default_factory=dict)
    mean_words: dict = field(default_factory=dict)
    kept_count: int = 0

    def to_dict(self):
        return dict(input_count=self.input_count, removed=dict(self.removed),
                    mean_words=dict(self.mean_words), kept_count=self.kept_count)


@dataclass(frozen=True)
class PostStats:
    count: int
    mentions: Optional[float]
    urls: Optional[float]
    hashtags: Optional[float]
    keywords: Optional[float]
    unique_users: int
    unique_words: int

    def to_dict(self):
        return dict(count=self.count, mentions=self.mentions, urls=self.urls, hashtags=self.hashtags,
                    keywords=self.keywords, unique_users=self.unique_users, unique_words=self.unique_words)


# ---------------------------------------------------------------------------------------------------
#
#   Parsing helpers
#
# ---------------------------------------------------------------------------------------------------

def parse_timestamp(value):
    """
    Parses ISO-8601 (zoneless means UTC) or the native Twitter format, normalised to UTC.

    :param value: timestamp string; a bare date is midnight UTC
    :return datetime: timezone-aware, seconds resolution
    """

    value = value.strip()
    if not value:
        raise ValueError('empty timestamp')

    try:
        parsed = datetime.datetime.fromisoformat(value.replace('Z', '+00:00'))
    except ValueError:
        parsed = datetime.datetime.strptime(value, TWITTER_TIME_FORMAT)

    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=datetime.timezone.utc)

    return parsed.astimezone(datetime.timezone.utc).replace(microsecond=0)


def format_timestamp(value):
    if value is None:
        return None
    return value.strftime('%Y-%m-%dT%H:%M:%SZ')


def _detect_format(path, fmt):
    if fmt:
        if fmt not in FORMATS:
            raise IngestError('Unsupported format {0}; expected one of {1}'.format(fmt, ', '.join(FORMATS)))
        return fmt

    extension = os.path.splitext(path)[1].lower().lstrip('.')
    if extension in ('jsonl', 'json', 'ndjson'):
        return 'jsonl'
    if extension == 'csv':
        return 'csv'

    raise IngestError('Cannot infer format of {0}; pass jsonl or csv explicitly'.format(path))


def _read_records(path, fmt):
    """
    Yields (line number, record dict or parse error message) for every record in the file.
    """

    fmt = _detect_format(path, fmt)

    try:
        fh = io.open(path, encoding='utf-8', newline='')
    except (IOError, OSError) as e:
        raise IngestError('Unable to read {0}: {1}'.format(path, e))

    with fh:
        try:
            if fmt == 'jsonl':
                for line_number, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                    except ValueError as e:
                        yield line_number, 'invalid JSON: {0}'.format(e)
                        continue
                    if not isinstance(record, dict):
                        yield line_number, 'record is not an object'
                        continue
                    yield line_number, record
            else:
                reader = csv.DictReader(fh)
                for record in reader:
                    yield reader.line_num, record
        except UnicodeDecodeError as e:
            raise IngestError('Unable to decode {0}: {1}'.format(path, e))


def _required(record, name):
    value = record.get(name)
    if value is None or (isinstance(value, str) and not value.strip()):
        raise KeyError(name)
    return value


# ---------------------------------------------------------------------------------------------------
#
#   Loaders
#
# ---------------------------------------------------------------------------------------------------

def load_posts(path, fmt=None):
    """
    Loads posts. Hashtags, mentions and URLs are always re-derived from the text.

    :param path: JSONL or CSV file with columns id, text, created_at, author
    :param fmt: 'jsonl' or 'csv', inferred from the extension when omitted
    :return tuple: (list of Post, list of RecordError)
    """

    posts = []
    errors = []
    seen = set()

    for line_number, record in _read_records(path, fmt):
        if isinstance(record, str):
            errors.append(RecordError(line_number, None, record))
            continue

        try:
            post_id = str(_required(record, 'id')).strip()
            text = str(_required(record, 'text'))
            raw_time = str(_required(record, 'created_at'))
        except KeyError as e:
            errors.append(RecordError(line_number, e.args[0], 'missing required field {0}'.format(e.args[0])))
            continue

        try:
            created_at = parse_timestamp(raw_time)
        except ValueError as e:
            errors.append(RecordError(line_number, 'created_at', 'unparseable timestamp: {0}'.format(e)))
            continue

        if post_id in seen:
            errors.append(RecordError(line_number, 'id', 'duplicate id {0}'.format(post_id)))
            continue
        seen.add(post_id)

        posts.append(Post.from_text(post_id, text, created_at, author=str(record.get('author') or '')))

    log.info('Loaded %d posts from %s (%d errors)', len(posts), path, len(errors))

    return posts, errors


def load_articles(path, fmt=None):
    """
    Loads articles and segments their bodies into sentences.

    :param path: JSONL or CSV file with columns id, source, title, body, published_at
    :param fmt: 'jsonl' or 'csv'
    :return tuple: (list of Article, list of RecordError)
    """

    articles = []
    errors = []
    seen = set()

    for line_number, record in _read_records(path, fmt):
        if isinstance(record, str):
            errors.append(RecordError(line_number, None, record))
            continue

        try:
            article_id = str(_required(record, 'id')).strip()
        except KeyError:
            errors.append(RecordError(line_number, 'id', 'missing required field id'))
            continue

        body = record.get('body') or ''
        if not str(body).strip():
            errors.append(RecordError(line_number, 'body', 'empty document'))
            continue

        published_at = None
        raw_time = record.get('published_at')
        if raw_time:
            try:
                published_at = parse_timestamp(str(raw_time))
            except ValueError as e:
                errors.append(RecordError(line_number, 'published_at', 'unparseable timestamp: {0}'.format(e)))
                continue

        if article_id in seen:
            errors.append(RecordError(line_number, 'id', 'duplicate id {0}'.format(article_id)))
            continue
        seen.add(article_id)

        articles.append(Article.from_body(article_id, str(record.get('source') or ''), str(record.get('title') or ''),
                                          str(body), published_at))

    log.info('Loaded %d articles from %s (%d errors)', len(articles), path, len(errors))

    return articles, errors


def load_labels(path):
    """
    Loads annotated post-article pairs from CSV columns post_id, article_id, label1, label2.
    A blank label2 means the pair has a single annotation.

    :return tuple: (list of AnnotatedPair, list of RecordError)
    """

    pairs = []
    errors = []

    for line_number, record in _read_records(path, 'csv'):
        try:
            post_id = str(_required(record, 'post_id')).strip()
            article_id = str(_required(record, 'article_id')).strip()
        except KeyError as e:
            errors.append(RecordError(line_number, e.args[0], 'missing required field {0}'.format(e.args[0])))
            continue

        labels = []
        bad_field = None
        for name in ('label1', 'label2'):
            value = (record.get(name) or '').strip()
            if not value:
                continue
            try:
                labels.append(RelevanceLabel(int(value)))
            except ValueError:
                bad_field = name
                break

        if bad_field:
            errors.append(RecordError(line_number, bad_field, 'label must be 0, 1 or 2'))
            continue

        pairs.append(AnnotatedPair(post_id=post_id, article_id=article_id, labels=tuple(labels)))

    return pairs, errors


def load_annotations(path):
    """
    Loads summary annotations from JSONL records with article_id, annotator, abstractive and
    extractive (sentence indices, most important first).

    :return tuple: (list of SummaryAnnotation, list of RecordError)
    """

    annotations = []
    errors = []

    for line_number, record in _read_records(path, 'jsonl'):
        if isinstance(record, str):
            errors.append(RecordError(line_number, None, record))
            continue

        try:
            article_id = str(_required(record, 'article_id'))
            annotator = str(_required(record, 'annotator'))
        except KeyError as e:
            errors.append(RecordError(line_number, e.args[0], 'missing required field {0}'.format(e.args[0])))
            continue

        abstractive = str(record.get('abstractive') or '')
        if textproc.word_count(abstractive) > MAX_ABSTRACTIVE_WORDS:
            errors.append(RecordError(line_number, 'abstractive',
                                      'abstractive summary exceeds {0} words'.format(MAX_ABSTRACTIVE_WORDS)))
            continue

        try:
            extractive = tuple(int(index) for index in record.get('extractive') or ())
        except (TypeError, ValueError):
            errors.append(RecordError(line_number, 'extractive', 'sentence indices must be integers'))
            continue

        if len(extractive) > MAX_EXTRACTIVE_SENTENCES:
            errors.append(RecordError(line_number, 'extractive',
                                      'more than {0} sentences selected'.format(MAX_EXTRACTIVE_SENTENCES)))
            continue

        annotations.append(SummaryAnnotation(article_id=article_id, annotator=annotator,
                                             abstractive=abstractive, extractive=extractive))

    return annotations, errors


def validate_annotation(annotation, article):
    """
    Returns a list of problems with an annotation against its article; empty when valid.
    """

    problems = []
    if annotation.article_id != article.id:
        problems.append('annotation is for article {0}, not {1}'.format(annotation.article_id, article.id))

    for index in annotation.extractive:
        if index < 1 or index > len(article.sentences):
            problems.append('sentence index {0} outside 1..{1}'.format(index, len(article.sentences)))

    if len(set(annotation.extractive)) != len(annotation.extractive):
        problems.append('duplicate sentence index')

    return problems


def load_keywords(path=None):
    """
    Loads the disaster keyword list, one keyword or phrase per line.

    :param path: defaults to the shipped list
    :return list: keywords as tuples of normalised tokens, sorted
    """

    words = textproc.load_wordlist(path or textproc.DEFAULT_KEYWORDS_PATH)
    phrases = set()
    for word in words:
        tokens = tuple(textproc.clean(word).lower().split())
        if tokens:
            phrases.add(tokens)

    return sorted(phrases)


# ---------------------------------------------------------------------------------------------------
#
#   Filtering and descriptive statistics
#
# ---------------------------------------------------------------------------------------------------

def is_ascii(text):
    return all(ord(char) < 128 for char in text if char not in ASCII_EXEMPT_WHITESPACE)


def _mean_words(articles):
    if not articles:
        return None
    return round(sum(textproc.word_count(article.body) for article in articles) / float(len(articles)), 2)


def filter_articles(articles, min_chars=1000, min_sentences=10, ascii_only=True):
    """
    Applies, in order, the ASCII filter, the length filter and the sentence-count filter.
    Both thresholds are inclusive.

    :param articles: list of Article
    :param min_chars: minimum body length in characters
    :param min_sentences: minimum number of sentences
    :param ascii_only: drop articles that are not 7-bit clean
    :return tuple: (kept articles in input order, FilterReport)
    """

    report = FilterReport(input_count=len(articles))
    stages = []
    if ascii_only:
        stages.append(('ascii', lambda article: is_ascii(article.body)))
    stages.append(('min_chars', lambda article: len(article.body) >= min_chars))
    stages.append(('min_sentences', lambda article: len(article.sentences) >= min_sentences))

    kept = list(articles)
    for name, keep in stages:
        survivors = [article for article in kept if keep(article)]
        report.removed[name] = len(kept) - len(survivors)
        report.mean_words[name] = _mean_words(survivors)
        log.debug('Filter stage %s removed %d articles', name, report.removed[name])
        kept = survivors

    report.kept_count = len(kept)

    return kept, report


def _contains_phrase(tokens, phrase):
    width = len(phrase)
    return any(tuple(tokens[i:i + width]) == phrase for i in range(len(tokens) - width + 1))


def descriptive_stats(posts, keywords):
    """
    Fractions of posts with mentions, URLs, hashtags and at least one disaster keyword, plus the
    number of distinct authors and distinct lowercased words.

    :param posts: list of Post
    :param keywords: keyword phrases as returned by load_keywords
    :return PostStats: fractions are None for an empty collection
    """

    count = len(posts)
    vocabulary = set()
    with_keyword = 0

    for post in posts:
        tokens = textproc.clean(post.text).lower().split()
        vocabulary.update(tokens)
        if any(_contains_phrase(tokens, phrase) for phrase in keywords):
            with_keyword += 1

    def fraction(matches):
        return matches / float(count) if count else None

    return PostStats(
        count=count,
        mentions=fraction(sum(1 for post in posts if post.mentions)),
        urls=fraction(sum(1 for post in posts if post.urls)),
        hashtags=fraction(sum(1 for post in posts if post.hashtags)),
        keywords=fraction(with_keyword),
        unique_users=len(set(post.author for post in posts if post.author)),
        unique_words=len(vocabulary),
    )


def post_volume(posts):
    """
    Number of posts per UTC day.

    :return list: (date, count) sorted by date
    """

    counts = Counter(post.created_at.date() for post in posts if post.created_at is not None)
    return sorted(counts.items())


def top_users(posts, n=4):
    """
    The n most active authors.

    :return list: (author, count), most active first, ties by author
    """

    counts = Counter(post.author for post in posts if post.author)
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:n]


def stratified_sample(articles, boundary=20, n_short=36, n_long=24, seed=0):
    """
    Seeded selection of articles for annotation, drawing separately from articles with fewer than
    `boundary` sentences and the rest.

    :return list: selected articles, short ones first, each group in input order
    """

    rng = random.Random(seed)
    short = [article for article in articles if len(article.sentences) < boundary]
    long_ = [article for article in articles if len(article.sentences) >= boundary]

    def draw(group, size):
        picked = set(rng.sample(range(len(group)), min(size, len(group))))
        return [article for i, article in enumerate(group) if i in picked]

    return draw(short, n_short) + draw(long_, n_long)
