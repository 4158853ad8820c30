import datetime
import json
import os

import pytest

from crisislink import cli, corpus

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, 'samples', 'fixtures')

UTC = datetime.timezone.utc

LEXDB_INDEX = '''  1 test lexical database
aid n 1 0 1 0 00000010
assistance n 1 0 1 0 00000010
earthquake n 1 0 1 0 00000001
help n 1 0 1 0 00000010
quake n 1 0 1 0 00000001
temblor n 1 0 1 0 00000001
'''

LEXDB_DATA = '''  1 test lexical database
00000001 19 n 03 earthquake 0 quake 0 temblor 0 000 | shaking of the ground
00000010 04 n 03 aid 0 help 0 assistance 0 000 | a helping
'''


def utc(*args):
    return datetime.datetime(*args, tzinfo=UTC)


def make_article(body, id='a1', title='', published_at=None):
    return corpus.Article.from_body(id, 'test', title, body, published_at)


def make_post(text, id='p1', created_at=None, author='someone'):
    return corpus.Post.from_text(id, text, created_at, author)


@pytest.fixture
def fixture_dir():
    return FIXTURES


@pytest.fixture
def fixture_posts():
    posts, errors = corpus.load_posts(os.path.join(FIXTURES, 'posts.jsonl'))
    assert errors == []
    return posts


@pytest.fixture
def fixture_articles():
    articles, errors = corpus.load_articles(os.path.join(FIXTURES, 'articles.jsonl'))
    assert errors == []
    return articles


@pytest.fixture
def lexdb_dir(tmp_path):
    directory = tmp_path / 'lexdb'
    directory.mkdir()
    (directory / 'index.noun').write_text(LEXDB_INDEX)
    (directory / 'data.noun').write_text(LEXDB_DATA)
    return str(directory)


@pytest.fixture
def write_lines(tmp_path):
    """
    Writes lines to a file under tmp_path and returns its path.
    """

    def write(name, lines):
        path = tmp_path / name
        path.write_text(''.join(line + '\n' for line in lines))
        return str(path)

    return write


FIXTURE_FLAGS = dict(
    ingest=['--posts', os.path.join(FIXTURES, 'posts.jsonl'), '--articles', os.path.join(FIXTURES, 'articles.jsonl')],
    link=['--labels', os.path.join(FIXTURES, 'labels.csv'), '--lexdb', os.path.join(FIXTURES, 'lexdb'),
          '--top-k', '5', '--seed', '7'],
    summarize=[],
    cluster=['--seed', '7', '--iters', '20'],
    evaluate=['--annotations', os.path.join(FIXTURES, 'annotations.jsonl'),
              '--labels', os.path.join(FIXTURES, 'labels.csv')],
    report=[],
)


def fixture_argv(subcommand, out, *extra):
    """
    Flags running one subcommand on the shipped fixture corpus, independent of the environment.
    """

    return FIXTURE_FLAGS[subcommand] + ['--out', str(out), '--log-level', 'WARNING'] + list(extra)


def run_main(main, argv, capsys):
    """
    Runs a pipeline module and returns its exit status and the JSON document it printed. Output of earlier
    runs in the same test, such as run_pipeline, is discarded first.
    """

    capsys.readouterr()
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code, json.loads(capsys.readouterr().out)


def run_pipeline(out, until='report'):
    for subcommand in cli.PIPELINE_ORDER:
        assert cli.run_subcommand(subcommand, fixture_argv(subcommand, out)) == 0, subcommand
        if subcommand == until:
            break


@pytest.fixture(scope='session')
def pipeline_out(tmp_path_factory):
    """
    Output directory of one complete run over the fixture corpus. Tests must only read it.
    """

    out = tmp_path_factory.mktemp('fixture-run')
    run_pipeline(out)
    return str(out)
