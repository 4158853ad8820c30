# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Deterministic text preprocessing shared by every other module: cleaning, tokenization, sentence
splitting, stemming, character n-grams and lexical-database synonym expansion.
"""

import io
import logging
import os
import re
import string
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

from nltk.stem.porter import PorterStemmer

from crisislink.errors import IngestError

log = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')
DEFAULT_STOPWORDS_PATH = os.path.join(DATA_DIR, 'stopwords.txt')
DEFAULT_ABBREVIATIONS_PATH = os.path.join(DATA_DIR, 'abbreviations.txt')
DEFAULT_KEYWORDS_PATH = os.path.join(DATA_DIR, 'disaster_keywords.txt')

URL_RE = re.compile(r'(?:\b[a-z][a-z0-9+.\-]*://|\bwww\.)\S+', re.IGNORECASE)
HASHTAG_RE = re.compile(r'(?<![\w#])#([A-Za-z0-9_]+)')
MENTION_RE = re.compile(r'(?<![\w@])@([A-Za-z0-9_]+)')
NON_ASCII_RE = re.compile(r'[^\x00-\x7f]')
PUNCTUATION_RE = re.compile('[{0}]'.format(re.escape(string.punctuation)))
WHITESPACE_RE = re.compile(r'\s+')
SENTENCE_END_RE = re.compile(r'[.!?]+["\')\]]*(?=\s|$)')

NGRAM_SIZES = (2, 3)

_STEMMER = PorterStemmer(PorterStemmer.ORIGINAL_ALGORITHM)


def load_wordlist(path):
    """
    Reads a newline-delimited word list (stopwords, abbreviations, keywords).

    :param path: text file, one entry per line
    :return frozenset: lowercased entries, blank lines ignored
    """

    try:
        with io.open(path, encoding='utf-8') as fh:
            return frozenset(line.strip().lower() for line in fh if line.strip())
    except (IOError, OSError) as e:
        raise IngestError('Unable to read word list {0}: {1}'.format(path, e))


@lru_cache(maxsize=None)
def default_stopwords():
    return load_wordlist(DEFAULT_STOPWORDS_PATH)


@lru_cache(maxsize=None)
def default_abbreviations():
    return load_wordlist(DEFAULT_ABBREVIATIONS_PATH)


@lru_cache(maxsize=1 << 16)
def stem(token):
    return _STEMMER.stem(token)


@dataclass(frozen=True)
class TokenizedText:
    raw: str
    tokens: tuple
    stems: tuple
    content_tokens: tuple
    content_stems: tuple
    hashtags: tuple = ()


@dataclass(frozen=True)
class CharNgramBag:
    n: int
    counts: Counter = field(default_factory=Counter)

    @property
    def size(self):
        return sum(self.counts.values())


def extract_markers(text):
    """
    Returns the hashtags, mentions and URLs of a post. Markers inside URLs are not counted and the
    leading '#' / '@' is stripped.

    :param text: raw post text
    :return tuple: (hashtags, mentions, urls) as lists in order of appearance
    """

    urls = URL_RE.findall(text)
    remainder = URL_RE.sub(' ', text)

    return HASHTAG_RE.findall(remainder), MENTION_RE.findall(remainder), urls


def clean(text):
    """
    Removes URLs, then non-ASCII characters, then punctuation. Case is preserved.

    :param text:
    :return str: cleaned text with whitespace runs collapsed
    """

    text = URL_RE.sub(' ', text)
    text = NON_ASCII_RE.sub('', text)
    text = PUNCTUATION_RE.sub('', text)

    return WHITESPACE_RE.sub(' ', text).strip()


def tokenize(text, stopwords=None):
    """
    Cleans, lowercases and splits text on whitespace, then stems every token.

    :param text: raw text
    :param stopwords: set of lowercased stopwords, defaults to the shipped English list
    :return TokenizedText:
    """

    if stopwords is None:
        stopwords = default_stopwords()

    hashtags = tuple(extract_markers(text)[0])
    tokens = tuple(clean(text).lower().split())
    content_tokens = tuple(token for token in tokens if token not in stopwords)

    return TokenizedText(
        raw=text,
        tokens=tokens,
        stems=tuple(stem(token) for token in tokens),
        content_tokens=content_tokens,
        content_stems=tuple(stem(token) for token in content_tokens),
        hashtags=hashtags,
    )


def word_count(text):
    """
    Number of post-tokenization words, the unit every summary budget is counted in.
    """

    return len(clean(text).split())


def split_sentences(text, abbreviations=None):
    """
    Splits at '.', '!' or '?' followed by whitespace or end of text, unless the word carrying the
    terminator is a known abbreviation. A trailing fragment without terminator is a sentence.

    :param text:
    :param abbreviations: lowercased abbreviations including their final period
    :return list: stripped, non-empty sentence strings
    """

    if abbreviations is None:
        abbreviations = default_abbreviations()

    sentences = []
    start = 0

    for match in SENTENCE_END_RE.finditer(text):
        candidate = text[start:match.end()]
        words = candidate.split()
        if not words:
            continue

        last_word = words[-1].lstrip('"\'([').lower()
        if last_word in abbreviations:
            continue

        sentence = candidate.strip()
        if sentence:
            sentences.append(sentence)
        start = match.end()

    fragment = text[start:].strip()
    if fragment:
        sentences.append(fragment)

    return sentences


def char_ngrams(tokens, n):
    """
    Multiset of character n-grams taken inside each lowercased token, unpadded.

    :param tokens: iterable of tokens
    :param n: 2 or 3
    :return CharNgramBag:
    """

    if n not in NGRAM_SIZES:
        raise ValueError('n must be one of {0}, got {1}'.format(NGRAM_SIZES, n))

    counts = Counter()
    for token in tokens:
        token = token.lower()
        for i in range(len(token) - n + 1):
            counts[token[i:i + n]] += 1

    return CharNgramBag(n=n, counts=counts)


class LexicalDatabase(object):
    """
    Read-only synonym lookup over WordNet-format files.

    Only the lemma names of each synset are kept; pointers, glosses and frames are skipped.
    """

    POS_FILES = ('noun', 'verb', 'adj', 'adv')
    ADJ_MARKER_RE = re.compile(r'\([a-z]+\)$')

    def __init__(self, lemma_map=None):
        self._lemmas = dict(lemma_map or {})

    @classmethod
    def from_mapping(cls, mapping):
        """
        Builds a database from a dict of word -> lemma names (all senses flattened).
        """

        return cls(dict((word.lower(), tuple(lemma.lower() for lemma in lemmas))
                        for word, lemmas in mapping.items()))

    @classmethod
    def from_directory(cls, path):
        """
        Parses the `index.<pos>` and `data.<pos>` files found in path.

        :param path: WordNet dictionary directory
        :return LexicalDatabase:
        """

        if not os.path.isdir(path):
            raise IngestError('Lexical database directory not found: {0}'.format(path))

        synsets = dict()
        for pos in cls.POS_FILES:
            data_path = os.path.join(path, 'data.{0}'.format(pos))
            if os.path.isfile(data_path):
                synsets.update(cls._read_data_file(data_path, pos))

        lemma_map = defaultdict(list)
        index_files = 0
        for pos in cls.POS_FILES:
            index_path = os.path.join(path, 'index.{0}'.format(pos))
            if not os.path.isfile(index_path):
                continue
            index_files += 1

            with io.open(index_path, encoding='utf-8', errors='replace') as fh:
                for line in fh:
                    # license header lines start with two spaces
                    if line.startswith(' ') or not line.strip():
                        continue
                    fields = line.split()
                    try:
                        synset_count = int(fields[2])
                        offsets = [int(offset) for offset in fields[-synset_count:]]
                    except (IndexError, ValueError):
                        log.warning('Skipping malformed index line in %s: %r', index_path, line[:60])
                        continue

                    word = fields[0].lower()
                    for offset in offsets:
                        for lemma in synsets.get((pos, offset), ()):
                            if lemma not in lemma_map[word]:
                                lemma_map[word].append(lemma)

        if not index_files:
            raise IngestError('No index.* files in lexical database directory {0}'.format(path))

        log.info('Loaded lexical database from %s: %d words, %d synsets', path, len(lemma_map), len(synsets))

        return cls(dict((word, tuple(lemmas)) for word, lemmas in lemma_map.items()))

    @classmethod
    def _read_data_file(cls, data_path, pos):
        synsets = dict()

        with io.open(data_path, encoding='utf-8', errors='replace') as fh:
            for line in fh:
                if line.startswith(' ') or not line.strip():
                    continue
                fields = line.split('|')[0].split()
                try:
                    offset = int(fields[0])
                    word_count = int(fields[3], 16)
                    words = fields[4:4 + 2 * word_count:2]
                except (IndexError, ValueError):
                    log.warning('Skipping malformed data line in %s: %r', data_path, line[:60])
                    continue

                synsets[(pos, offset)] = tuple(cls.ADJ_MARKER_RE.sub('', word).lower() for word in words)

        return synsets

    def lemmas(self, word):
        return self._lemmas.get(word.lower(), ())

    def __contains__(self, word):
        return word.lower() in self._lemmas

    def __len__(self):
        return len(self._lemmas)


def expand_synsets(tokens, lexdb, stopwords=None):
    """
    Adds the lemma names of every sense of each distinct content token, each with count 1.
    Multi-word lemmas are split on underscore; a lemma equal to its source token is not re-added.

    :param tokens: lowercased tokens
    :param lexdb: LexicalDatabase
    :param stopwords: tokens never expanded, defaults to the shipped English list
    :return Counter: expanded token multiset, a superset of the input
    """

    if stopwords is None:
        stopwords = default_stopwords()

    expanded = Counter(tokens)
    for token in dict.fromkeys(tokens):
        if token in stopwords:
            continue

        words = []
        for lemma in lexdb.lemmas(token):
            words.extend(part for part in lemma.split('_') if part)

        for word in dict.fromkeys(words):
            if word != token:
                expanded[word] += 1

    return expanded
