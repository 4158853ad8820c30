import json
import os

import yaml

from crisislink import linker
from crisislink.artifacts import read_csv, read_jsonl
from modules.crisis_link import DOCUMENTATION, EXAMPLES, RETURN, main

from conftest import FIXTURES, fixture_argv, run_main, run_pipeline


def test_documentation_yaml():
    print('Testing documentation YAML...')

    assert DOCUMENTATION.startswith(('---', '\n---'))
    assert EXAMPLES.startswith(('---', '\n---'))
    assert RETURN.startswith(('---', '\n---'))


def test_validate_yaml():
    documentation_yaml = yaml.safe_load(DOCUMENTATION)
    yaml.safe_load(EXAMPLES)
    yaml.safe_load(RETURN)

    print(documentation_yaml['short_description'])
    assert 'labels' in documentation_yaml['options']


def test_link_fixture_outputs(pipeline_out):
    records = read_jsonl(os.path.join(pipeline_out, 'links.jsonl'))
    assert [record['article_id'] for record in records] == ['a1', 'a2', 'a3', 'a4', 'a5']
    for record in records:
        assert len(record['ranked']) <= 10
        probabilities = [item['probability'] for item in record['ranked']]
        assert probabilities == sorted(probabilities, reverse=True)
        assert all(0.0 <= probability <= 1.0 for probability in probabilities)

    features = read_csv(os.path.join(pipeline_out, 'pair_features.csv'))
    assert len(features) == 28
    assert list(features[0])[:2] == ['post_id', 'article_id']
    assert sum(int(row['in_training']) for row in features) == 14
    assert sum(int(row['held_out']) for row in features) == 8
    assert not any(int(row['in_training']) and int(row['held_out']) for row in features)

    held_out = set((row['post_id'], row['article_id']) for row in features if int(row['held_out']))
    for record in records:
        for item in record['ranked']:
            if (item['post_id'], record['article_id']) in held_out:
                assert not item['in_training']

    with open(os.path.join(pipeline_out, 'model.json')) as fh:
        model = linker.LinkModel.from_dict(json.load(fh))
    assert model.metadata['seed'] == 7


def test_link_training_summary(tmp_path, capsys):
    run_pipeline(tmp_path, until='ingest')
    code, result = run_main(main, fixture_argv('link', tmp_path), capsys)
    assert code == 0
    assert result['training']['labeled_pairs'] == 28
    assert result['training']['training_pairs'] == 20
    assert result['training']['held_out_pairs'] == 8
    assert result['training']['positives'] == 13
    assert result['training']['balanced_pairs'] == 14
    assert result['training']['best_c'] in linker.DEFAULT_C_GRID
    assert result['evaluation']['agreement_pairs'] == 27
    assert result['evaluation']['agreement_skipped'] == 1
    assert result['manifest']['seed'] == 7


def test_link_is_reproducible(tmp_path, pipeline_out):
    run_pipeline(tmp_path, until='link')
    for name in ('model.json', 'links.jsonl', 'pair_features.csv', 'link.manifest.json'):
        assert (tmp_path / name).read_bytes() == open(os.path.join(pipeline_out, name), 'rb').read(), name


def test_link_strict_positive_label(tmp_path, capsys):
    run_pipeline(tmp_path, until='ingest')
    code, result = run_main(main, fixture_argv('link', tmp_path, '--positive-label', '2'), capsys)
    assert code == 0
    assert result['training']['positives'] == 10
    assert result['training']['balanced_pairs'] == 20


def test_link_lexdb_from_environment(tmp_path, capsys, monkeypatch):
    run_pipeline(tmp_path, until='ingest')
    lexdb = os.path.join(FIXTURES, 'lexdb')
    monkeypatch.setenv('CRISISLINK_LEXDB', lexdb)
    argv = ['--labels', os.path.join(FIXTURES, 'labels.csv'), '--out', str(tmp_path), '--top-k', '3']
    code, result = run_main(main, argv, capsys)
    assert code == 0
    assert result['manifest']['params']['lexdb'] == lexdb


def test_link_single_class_labels_fail(tmp_path, capsys):
    run_pipeline(tmp_path, until='ingest')
    labels = tmp_path / 'labels.csv'
    labels.write_text('post_id,article_id,label1,label2\np01,a1,2,2\np02,a1,2,1\n')
    argv = ['--labels', str(labels), '--out', str(tmp_path), '--log-level', 'ERROR']
    code, result = run_main(main, argv, capsys)
    assert code == 1
    assert result['msg'].startswith('Unable to train link model')


def test_link_without_ingest(tmp_path, capsys):
    code, result = run_main(main, fixture_argv('link', tmp_path), capsys)
    assert code == 1
    assert 'run the ingest subcommand first' in result['msg']


def test_link_rejects_bad_grid(tmp_path, capsys):
    code, result = run_main(main, fixture_argv('link', tmp_path, '--c-grid', '1,-1'), capsys)
    assert code == 2
    assert result['field'] == 'c_grid'


def test_link_separate_training_labels(tmp_path, capsys):
    run_pipeline(tmp_path, until='ingest')
    with open(os.path.join(FIXTURES, 'labels.csv')) as fh:
        lines = fh.read().splitlines()
    header, rows = lines[0], lines[1:]
    train_labels = tmp_path / 'train_labels.csv'
    train_labels.write_text('\n'.join([header] + rows[:20]) + '\n')
    trained_on = set(tuple(row.split(',')[:2]) for row in rows[:20])

    code, result = run_main(main, fixture_argv('link', tmp_path, '--train-labels', str(train_labels)), capsys)
    assert code == 0
    assert result['training']['training_pairs'] == 20
    assert result['training']['held_out_pairs'] == 8

    evaluated = []
    for record in read_jsonl(str(tmp_path / 'links.jsonl')):
        for item in record['ranked']:
            key = (item['post_id'], record['article_id'])
            assert item['in_training'] == (key in trained_on)
            if item['final'] is not None and not item['in_training']:
                evaluated.append(item['final'])
    assert result['evaluation']['labeled_pairs'] == len(evaluated)
    assert result['evaluation']['weighted_precision'] == linker.weighted_precision(evaluated)


def test_link_rejects_bad_holdout(tmp_path, capsys):
    code, result = run_main(main, fixture_argv('link', tmp_path, '--holdout', '1.0'), capsys)
    assert code == 2
    assert result['field'] == 'holdout'
