#!/usr/bin/python
# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# crisislink is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

from collections import defaultdict

from crisislink import corpus, evalkit, linker, summarize
from crisislink.artifacts import ArtifactWriter, artifact_path, read_csv, read_json, read_jsonl
from crisislink.errors import ArtifactError, IngestError
from crisislink.module_utils import PipelineModule


DOCUMENTATION = '''
---
module: crisis_report
short_description: Renders the result tables and the word frequency data of a finished run
description:
    - Collects the summarizer scores, the link precision, the cluster statistics and the timeliness histograms of
      a run into report.txt as fixed-width tables.
    - Writes word frequency tables (word, count) for the linked articles, the relevant posts, the partially
      relevant or relevant posts and every summarizer, ready for any word cloud renderer.
    - Writes the content difference between articles and posts in both directions, and between the articles and
      the output of every summarizer.
    - Fails naming the first missing artifact when an upstream subcommand has not run.
version_added: "0.1"
author: crisislink contributors
options:
  min_freq:
    description:
      - Smallest count listed in the frequency and content difference tables.
    required: false
    default: 2
  seed:
    description:
      - Seed recorded in the manifest. Runs with the same inputs, parameters and seed are byte-identical.
    required: false
    default: 0
  out:
    description:
      - Output directory of a run that went through every other subcommand.
    required: true
'''

EXAMPLES = '''
---
- name: report a fixture run
  crisis_report:
    out: build/fixture-run

- name: keep every word in the frequency tables
  crisis_report:
    min_freq: 1
    out: build/fixture-run
'''

RETURN = '''
---
tables:
    description: the section titles written to report.txt
    returned: success
    type: list
    sample: [ "Summarizer scores", "Link precision", "Cluster statistics", "Timeliness" ]
frequency_tables:
    description: number of rows of every frequency and content difference table
    returned: success
    type: dict
    sample: { "freq_articles.csv": 112, "diff_articles_minus_posts.csv": 87 }
manifest:
    description: the manifest of the written artifacts
    returned: success
    type: dict
'''

REQUIRED_ARTIFACTS = ('summary_scores', 'precision', 'timeliness', 'cluster_stats', 'articles', 'posts',
                      'summaries', 'links')

CLUSTER_COLUMNS = ['documents', 'clusters', 'min', 'max', 'mean', 'mode']


# ----------------------------------
#          Helper functions
# ----------------------------------

def _text(value):
    if value is None or value == '':
        return 'NA'
    if isinstance(value, float):
        return '{0:.4f}'.format(value)
    return str(value)


def format_table(title, header, rows):
    """
    Fixed-width rendering of one table, columns padded to their widest cell.

    :param title: line printed above the table
    :param header: column names
    :param rows: sequences aligned with header
    :return str:
    """

    cells = [[_text(value) for value in row] for row in rows]
    widths = [max([len(name)] + [len(row[i]) for row in cells]) for i, name in enumerate(header)]

    def line(values):
        return '  '.join(value.ljust(width) for value, width in zip(values, widths)).rstrip()

    lines = [title, '=' * len(title), line(header), line(['-' * width for width in widths])]
    lines.extend(line(row) for row in cells)
    if not cells:
        lines.append('(no rows)')
    return '\n'.join(lines) + '\n'


def load_artifacts(module):
    """
    Reads every artifact the report is built from.

    :param module: PipelineModule reference
    :return dict:
    """

    out = module.params['out']

    try:
        paths = dict((name, artifact_path(out, name)) for name in REQUIRED_ARTIFACTS)
        posts, _ = corpus.load_posts(paths['posts'], 'jsonl')
        articles, _ = corpus.load_articles(paths['articles'], 'jsonl')
        return dict(
            summary_scores=read_csv(paths['summary_scores']),
            precision=read_csv(paths['precision']),
            timeliness=read_json(paths['timeliness']),
            cluster_stats=read_json(paths['cluster_stats']),
            posts=dict((post.id, post) for post in posts),
            articles=dict((article.id, article) for article in articles),
            summaries=[summarize.Summary.from_dict(row) for row in read_jsonl(paths['summaries'])],
            links=linker.read_link_records(read_jsonl(paths['links'])),
        )
    except (ArtifactError, IngestError) as e:
        module.fail_json(msg='Unable to build the report: {0}'.format(e))


def report_text(artifacts):
    """
    The four result tables of report.txt.

    :return tuple: (text, section titles)
    """

    sections = []

    scores = artifacts['summary_scores']
    score_columns = ['method', 'documents', 'abstractive_r1_f1', 'abstractive_r2_f1', 'extractive_r1_precision',
                     'extractive_r2_precision']
    sections.append(('Summarizer scores', score_columns,
                     [[row.get(column) for column in score_columns] for row in scores]))

    precision = artifacts['precision']
    precision_columns = list(precision[0].keys()) if precision else ['pairs', 'weighted_precision']
    sections.append(('Link precision', precision_columns,
                     [[row.get(column) for column in precision_columns] for row in precision]))

    stats = artifacts['cluster_stats']
    sections.append(('Cluster statistics', CLUSTER_COLUMNS, [[stats.get(column) for column in CLUSTER_COLUMNS]]))

    timeliness_rows = []
    for label in sorted(artifacts['timeliness']):
        entry = artifacts['timeliness'][label]
        for start, count in entry['histogram']:
            timeliness_rows.append([label, start, count, entry['pct_before']])
        if not entry['histogram']:
            timeliness_rows.append([label, None, 0, entry['pct_before']])
    sections.append(('Timeliness', ['label', 'bin_start', 'count', 'pct_before'], timeliness_rows))

    text = '\n'.join(format_table(title, header, rows) for title, header, rows in sections)
    return text, [title for title, _, _ in sections]


def linked_texts(artifacts):
    """
    Texts of the linked articles and of the annotated linked posts, split by relevance level.

    :return tuple: (article bodies, relevant post texts, partially relevant or relevant post texts)
    """

    posts, articles = artifacts['posts'], artifacts['articles']
    article_ids, relevant, partial = set(), dict(), dict()

    for item in artifacts['links']:
        if item.final is None or item.final < 1 or item.post_id not in posts:
            continue
        article_ids.add(item.article_id)
        partial[item.post_id] = posts[item.post_id].text
        if item.final >= 2:
            relevant[item.post_id] = posts[item.post_id].text

    bodies = [articles[article_id].body for article_id in sorted(article_ids) if article_id in articles]
    return bodies, [relevant[key] for key in sorted(relevant)], [partial[key] for key in sorted(partial)]


def difference_rows(a_texts, b_texts, min_freq):
    difference = evalkit.content_difference(evalkit.WordSet.from_text(a_texts), evalkit.WordSet.from_text(b_texts))
    return evalkit.frequency_rows(difference, min_freq)


# ----------------------------------
#   Pipeline step
# ----------------------------------

def report(module):
    """
    Writes report.txt, the cluster statistics table and the word frequency tables.

    :param module: PipelineModule reference
    :return dict:
    """

    min_freq = module.params['min_freq']
    artifacts = load_artifacts(module)
    text, titles = report_text(artifacts)

    bodies, relevant, partial = linked_texts(artifacts)

    by_method = defaultdict(list)
    for summary in artifacts['summaries']:
        by_method[summary.method].append(summary)
    summarized = sorted(set(summary.article_id for summary in artifacts['summaries']
                            if summary.article_id in artifacts['articles']))
    summarized_bodies = [artifacts['articles'][article_id].body for article_id in summarized]

    tables = [
        ('freq_articles.csv', evalkit.word_frequencies(bodies, min_freq)),
        ('freq_posts_relevant.csv', evalkit.word_frequencies(relevant, min_freq)),
        ('freq_posts_partial.csv', evalkit.word_frequencies(partial, min_freq)),
        ('diff_articles_minus_posts.csv', difference_rows(bodies, partial, min_freq)),
        ('diff_posts_minus_articles.csv', difference_rows(partial, bodies, min_freq)),
    ]
    for method in sorted(by_method):
        texts = [summary.text for summary in by_method[method]]
        tables.append(('freq_summaries_{0}.csv'.format(method), evalkit.word_frequencies(texts, min_freq)))
        tables.append(('diff_articles_minus_{0}.csv'.format(method),
                       difference_rows(summarized_bodies, texts, min_freq)))

    stats = artifacts['cluster_stats']

    writer = ArtifactWriter(module.params['out'], check_mode=module.check_mode)
    writer.text('report.txt', text)
    writer.csv('cluster_stats.csv', CLUSTER_COLUMNS, [[stats.get(column) for column in CLUSTER_COLUMNS]])
    for name, rows in tables:
        writer.csv(name, ['word', 'count'], rows)

    manifest = writer.manifest('report', seed=module.params['seed'], params=module.run_params())

    return dict(changed=not module.check_mode, tables=titles,
                frequency_tables=dict((name, len(rows)) for name, rows in tables), manifest=manifest)


def main(argv=None):
    """
    Main entry point.

    :param argv: command-line arguments
    :return dict: report results
    """

    argument_spec = dict(
        min_freq=dict(type='int', required=False, default=2),
        out=dict(type='path', required=True, default=None),
    )

    module = PipelineModule(argument_spec=argument_spec, name='report', argv=argv, supports_check_mode=True)

    if module.params['min_freq'] < 1:
        module.fail_json(msg='Parameter min_freq must be at least 1', rc=2, field='min_freq')

    results = report(module)

    module.exit_json(**results)


if __name__ == '__main__':
    main()
