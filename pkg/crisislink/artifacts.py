# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Writers and readers for the files the pipeline exchanges, and the per-subcommand manifest.

Outputs are byte-stable: JSON keys are sorted, CSV rows end in a bare newline and manifests carry
no timestamps.
"""

import base64
import csv
import hashlib
import io
import json
import logging
import os

from crisislink.errors import ArtifactError

log = logging.getLogger(__name__)

HASH_BLOCK_SIZE = 64 * 1024

# which subcommand produces each shared artifact
PRODUCERS = dict(
    posts='ingest',
    articles='ingest',
    links='link',
    summaries='summarize',
    cluster_stats='cluster',
    summary_scores='evaluate',
    precision='evaluate',
    timeliness='evaluate',
)

ARTIFACT_FILES = dict(
    posts='posts.jsonl',
    articles='articles.jsonl',
    links='links.jsonl',
    summaries='summaries.jsonl',
    cluster_stats='cluster_stats.json',
    summary_scores='summary_scores.csv',
    precision='precision.csv',
    timeliness='timeliness.json',
)


def file_hash(path):
    """
    Returns the base64 encoded sha256 hash value of the file at path.

    :param path:
    :return str:
    """

    hash_lib = hashlib.sha256()
    with open(path, 'rb') as fh:
        for data_chunk in iter(lambda: fh.read(HASH_BLOCK_SIZE), b''):
            hash_lib.update(data_chunk)

    return base64.b64encode(hash_lib.digest()).decode('ascii')


def _dumps(data, **kwargs):
    return json.dumps(data, sort_keys=True, ensure_ascii=False, **kwargs)


def _cell(value):
    if value is None:
        return 'NA'
    if isinstance(value, float):
        return repr(round(value, 6))
    return value


def artifact_path(out_dir, name):
    """
    Path of a shared artifact in out_dir, failing with the artifact and its producer named when absent.
    """

    path = os.path.join(out_dir, ARTIFACT_FILES[name])
    if not os.path.isfile(path):
        raise ArtifactError('missing artifact {0} ({1}); run the {2} subcommand first'.format(
            name, path, PRODUCERS[name]))
    return path


def read_json(path):
    try:
        with io.open(path, encoding='utf-8') as fh:
            return json.load(fh)
    except (IOError, OSError, ValueError) as e:
        raise ArtifactError('Unable to read {0}: {1}'.format(path, e))


def read_jsonl(path):
    try:
        with io.open(path, encoding='utf-8') as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except (IOError, OSError, ValueError) as e:
        raise ArtifactError('Unable to read {0}: {1}'.format(path, e))


def read_csv(path):
    try:
        with io.open(path, encoding='utf-8', newline='') as fh:
            return list(csv.DictReader(fh))
    except (IOError, OSError) as e:
        raise ArtifactError('Unable to read {0}: {1}'.format(path, e))


class ArtifactWriter(object):
    """
    Writes the artifacts of one subcommand into an output directory and records them for the
    manifest. In check mode nothing touches the disk but the would-be artifacts are still listed.

    :param out_dir: output directory, created on first write
    :param check_mode: validate only
    """

    def __init__(self, out_dir, check_mode=False):
        self.out_dir = out_dir
        self.check_mode = check_mode
        self.written = []

    def _open(self, name, newline=None):
        path = os.path.join(self.out_dir, name)
        self.written.append(name)
        if self.check_mode:
            return None
        directory = os.path.dirname(path)
        if not os.path.isdir(directory):
            os.makedirs(directory)
        return io.open(path, 'w', encoding='utf-8', newline=newline)

    def json(self, name, data):
        fh = self._open(name)
        if fh is not None:
            with fh:
                fh.write(_dumps(data, indent=2))
                fh.write(u'\n')
        return os.path.join(self.out_dir, name)

    def jsonl(self, name, rows):
        fh = self._open(name)
        if fh is not None:
            with fh:
                for row in rows:
                    fh.write(_dumps(row))
                    fh.write(u'\n')
        return os.path.join(self.out_dir, name)

    def csv(self, name, header, rows):
        """
        :param header: column names
        :param rows: sequences aligned with header; None is written as NA
        """

        fh = self._open(name, newline='')
        if fh is not None:
            with fh:
                writer = csv.writer(fh, lineterminator='\n')
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_cell(value) for value in row])
        return os.path.join(self.out_dir, name)

    def text(self, name, content):
        fh = self._open(name)
        if fh is not None:
            with fh:
                fh.write(content)
        return os.path.join(self.out_dir, name)

    def manifest(self, subcommand, seed, params):
        """
        Writes `<subcommand>.manifest.json` listing every artifact with its size and hash.

        :return dict: the manifest document
        """

        entries = []
        for name in sorted(set(self.written)):
            entry = dict(path=name)
            if not self.check_mode:
                path = os.path.join(self.out_dir, name)
                entry.update(bytes=os.path.getsize(path), sha256=file_hash(path))
            entries.append(entry)

        document = dict(subcommand=subcommand, seed=seed, params=params, artifacts=entries)
        if not self.check_mode:
            self.json('{0}.manifest.json'.format(subcommand), document)
            log.info('Wrote %d artifacts and the manifest to %s', len(entries), self.out_dir)

        return document
