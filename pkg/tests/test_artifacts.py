import json
import os

import pytest

from crisislink import artifacts
from crisislink.artifacts import ArtifactWriter
from crisislink.errors import ArtifactError

EMPTY_SHA256 = '47DEQpj8HBSa+/TImW+5JCeuQeRkm5NMpJWZG3hSuFU='


def test_file_hash(tmp_path):
    path = tmp_path / 'empty'
    path.write_bytes(b'')
    assert artifacts.file_hash(str(path)) == EMPTY_SHA256


def test_csv_cells(tmp_path):
    writer = ArtifactWriter(str(tmp_path))
    writer.csv('table.csv', ['name', 'value', 'score'], [['a', None, 0.1234567], ['b', 3, 0.5]])
    assert (tmp_path / 'table.csv').read_bytes() == b'name,value,score\na,NA,0.123457\nb,3,0.5\n'


def test_json_keys_sorted(tmp_path):
    writer = ArtifactWriter(str(tmp_path / 'nested'))
    writer.json('data.json', dict(b=1, a=2))
    writer.jsonl('rows.jsonl', [dict(y=1, x=2), dict(z=None)])
    assert (tmp_path / 'nested' / 'data.json').read_text() == '{\n  "a": 2,\n  "b": 1\n}\n'
    assert (tmp_path / 'nested' / 'rows.jsonl').read_text() == '{"x": 2, "y": 1}\n{"z": null}\n'


def test_manifest(tmp_path):
    writer = ArtifactWriter(str(tmp_path))
    writer.text('report.txt', u'hello\n')
    writer.csv('a.csv', ['x'], [[1]])
    document = writer.manifest('report', seed=None, params=dict(min_freq=2))

    assert [entry['path'] for entry in document['artifacts']] == ['a.csv', 'report.txt']
    assert document['artifacts'][1]['bytes'] == 6
    assert document['artifacts'][1]['sha256'] == artifacts.file_hash(str(tmp_path / 'report.txt'))
    assert sorted(document) == ['artifacts', 'params', 'seed', 'subcommand']

    with open(str(tmp_path / 'report.manifest.json')) as fh:
        assert json.load(fh) == document


def test_manifest_is_byte_stable(tmp_path):
    for name in ('first', 'second'):
        writer = ArtifactWriter(str(tmp_path / name))
        writer.json('data.json', dict(values=[1.5, 2]))
        writer.manifest('cluster', seed=3, params=dict(k=2))
    assert (tmp_path / 'first' / 'cluster.manifest.json').read_bytes() == \
        (tmp_path / 'second' / 'cluster.manifest.json').read_bytes()


def test_check_mode_writes_nothing(tmp_path):
    out = tmp_path / 'out'
    writer = ArtifactWriter(str(out), check_mode=True)
    writer.json('data.json', dict(a=1))
    writer.csv('table.csv', ['x'], [[1]])
    document = writer.manifest('ingest', seed=None, params=dict())
    assert not out.exists()
    assert document['artifacts'] == [dict(path='data.json'), dict(path='table.csv')]


def test_artifact_path_names_the_producer(tmp_path):
    with pytest.raises(ArtifactError) as excinfo:
        artifacts.artifact_path(str(tmp_path), 'summaries')
    assert 'summaries' in str(excinfo.value)
    assert 'run the summarize subcommand first' in str(excinfo.value)

    (tmp_path / 'links.jsonl').write_text('')
    assert artifacts.artifact_path(str(tmp_path), 'links') == os.path.join(str(tmp_path), 'links.jsonl')


def test_readers(tmp_path):
    (tmp_path / 'rows.jsonl').write_text('{"a": 1}\n\n{"a": 2}\n')
    assert artifacts.read_jsonl(str(tmp_path / 'rows.jsonl')) == [dict(a=1), dict(a=2)]

    (tmp_path / 'table.csv').write_text('x,y\n1,NA\n')
    assert artifacts.read_csv(str(tmp_path / 'table.csv')) == [dict(x='1', y='NA')]

    (tmp_path / 'broken.json').write_text('{')
    with pytest.raises(ArtifactError):
        artifacts.read_json(str(tmp_path / 'broken.json'))
    with pytest.raises(ArtifactError):
        artifacts.read_jsonl(str(tmp_path / 'absent.jsonl'))
