import json
import os

import pytest

from crisislink import artifacts, cli

from conftest import ROOT

CONFIG = os.path.join(ROOT, 'samples', 'run_config.yaml')


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv('CRISISLINK_LEXDB', raising=False)
    monkeypatch.delenv('CRISISLINK_LOG_LEVEL', raising=False)


def _run_with_config(out):
    for subcommand in cli.PIPELINE_ORDER:
        assert cli.main([subcommand, '--config', CONFIG, '--out', str(out), '--log-level', 'WARNING']) == 0, subcommand


def _manifest(out, subcommand):
    with open(os.path.join(str(out), '{0}.manifest.json'.format(subcommand))) as fh:
        return json.load(fh)


def test_config_driven_runs_are_identical(tmp_path):
    first, second = tmp_path / 'first', tmp_path / 'second'
    _run_with_config(first)
    _run_with_config(second)

    for subcommand in cli.PIPELINE_ORDER:
        name = '{0}.manifest.json'.format(subcommand)
        assert (first / name).read_bytes() == (second / name).read_bytes(), name

        manifest = _manifest(first, subcommand)
        assert manifest['subcommand'] == subcommand
        assert 'out' not in manifest['params']
        for entry in manifest['artifacts']:
            path = os.path.join(str(first), entry['path'])
            assert entry['bytes'] == os.path.getsize(path)
            assert entry['sha256'] == artifacts.file_hash(path)

    assert _manifest(first, 'link')['seed'] == 7
    assert _manifest(first, 'cluster')['seed'] == 7
    for subcommand in ('ingest', 'summarize', 'evaluate', 'report'):
        assert _manifest(first, subcommand)['seed'] == 3, subcommand
    assert _manifest(first, 'link')['params']['top_k'] == 5


def test_config_paths_resolve_against_the_config_file(tmp_path):
    _run_with_config(tmp_path)
    params = _manifest(tmp_path, 'ingest')['params']
    assert params['posts'] == os.path.join(ROOT, 'samples', 'fixtures', 'posts.jsonl')
