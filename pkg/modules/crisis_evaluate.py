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

import logging
from collections import Counter, defaultdict

from crisislink import corpus, evalkit, linker, summarize
from crisislink.artifacts import ArtifactWriter, artifact_path, read_jsonl
from crisislink.errors import ArtifactError, IngestError
from crisislink.module_utils import PipelineModule


DOCUMENTATION = '''
---
module: crisis_evaluate
short_description: Scores summaries, linked posts and timeliness against the annotations
description:
    - Scores every summarizer with ROUGE-1 and ROUGE-2 against the annotators' abstractive summaries (F1) and
      extractive selections (precision), and measures the extractive recall ceiling by scoring each whole article.
    - Reads the relevant and the partially relevant linked posts of each article as two more summaries, scores
      them the same way and against the article itself, and reports how many of their words are unique.
    - Computes the agreement of annotator summaries (mean Jaccard index per annotator pair), the weighted
      precision of the exported links outside the link model's training pairs and temporal distance histograms
      per relevance level.
version_added: "0.1"
author: crisislink contributors
options:
  annotations:
    description:
      - JSON Lines file of summary annotations with article_id, annotator, abstractive and extractive.
    required: true
  labels:
    description:
      - CSV of annotated post-article pairs with columns post_id, article_id, label1, label2.
    required: true
  stem:
    description:
      - Compare Porter stems in ROUGE.
    required: false
    default: true
  remove_stopwords:
    description:
      - Drop stopwords before ROUGE counting.
    required: false
    default: false
  bin_days:
    description:
      - Width of the temporal distance histogram bins in days.
    required: false
    default: 5
  seed:
    description:
      - Seed recorded in the manifest. Runs with the same inputs, parameters and seed are byte-identical.
    required: false
    default: 0
  out:
    description:
      - Output directory holding the M(crisis_ingest), M(crisis_link) and M(crisis_summarize) artifacts.
    required: true
requirements:
    - nltk
'''

EXAMPLES = '''
---
# Evaluate a fixture run
- name: evaluate summaries and links
  crisis_evaluate:
    annotations: samples/fixtures/annotations.jsonl
    labels: samples/fixtures/labels.csv
    out: build/fixture-run

# Same tables without stemming
- name: evaluate on surface forms
  crisis_evaluate:
    annotations: annotations.jsonl
    labels: labels.csv
    stem: false
    out: build/surface
'''

RETURN = '''
---
precision:
    description: weighted precision of the exported links outside the training pairs and the annotator agreement
    returned: success
    type: dict
    sample: { "weighted_precision": 0.47, "agreement": 0.59 }
timeliness:
    description: share of annotated pairs whose post preceded the article, per relevance level
    returned: success
    type: dict
    sample: { "1": 0.917, "2": 0.918 }
annotations:
    description: number of summary annotations used and rejected
    returned: success
    type: dict
manifest:
    description: the manifest of the written artifacts
    returned: success
    type: dict
'''

log = logging.getLogger(__name__)

ROUGE_ORDERS = (1, 2)


# ----------------------------------
#          Helper functions
# ----------------------------------

def load_inputs(module):
    """
    Reads every upstream artifact and both annotation files.

    :param module: PipelineModule reference
    :return dict:
    """

    out = module.params['out']

    try:
        posts, _ = corpus.load_posts(artifact_path(out, 'posts'), 'jsonl')
        articles, _ = corpus.load_articles(artifact_path(out, 'articles'), 'jsonl')
        summaries = [summarize.Summary.from_dict(row) for row in read_jsonl(artifact_path(out, 'summaries'))]
        links = linker.read_link_records(read_jsonl(artifact_path(out, 'links')))
        annotations, annotation_errors = corpus.load_annotations(module.params['annotations'])
        pairs, label_errors = corpus.load_labels(module.params['labels'])
    except (ArtifactError, IngestError) as e:
        module.fail_json(msg='Unable to load evaluation inputs: {0}'.format(e))

    articles = dict((article.id, article) for article in articles)

    valid = []
    rejected = len(annotation_errors)
    for annotation in annotations:
        article = articles.get(annotation.article_id)
        problems = corpus.validate_annotation(annotation, article) if article else ['unknown article']
        if problems:
            log.warning('Rejected annotation of %s by %s: %s', annotation.article_id, annotation.annotator,
                        '; '.join(problems))
            rejected += 1
        else:
            valid.append(annotation)

    if label_errors:
        log.warning('Ignored %d malformed label rows', len(label_errors))

    return dict(posts=dict((post.id, post) for post in posts), articles=articles, summaries=summaries, links=links,
                annotations=valid, rejected=rejected, pairs=pairs)


def _row(record, columns):
    return [record.get(column) for column in columns]


def recall_ceiling_rows(annotations, articles, stem, remove_stopwords):
    """
    ROUGE recall of each whole article against its references, with a mean row.
    """

    grouped = defaultdict(list)
    for annotation in annotations:
        grouped[annotation.article_id].append(annotation)

    rows = []
    for article_id in sorted(grouped):
        article = articles[article_id]
        abstractive, extractive = evalkit.annotation_texts(grouped[article_id], article)
        row = [article_id]
        for references in (abstractive, extractive):
            for n in ROUGE_ORDERS:
                row.append(evalkit.recall_ceiling(article, references, n, stem=stem,
                                                  remove_stopwords=remove_stopwords).recall if references else None)
        rows.append(row)

    if rows:
        means = []
        for column in range(1, len(rows[0])):
            values = [row[column] for row in rows if row[column] is not None]
            means.append(sum(values) / float(len(values)) if values else None)
        rows.append(['ALL'] + means)

    return rows


def tweet_summaries(links, posts):
    """
    The partially relevant and the relevant linked posts of each article, as summaries.
    """

    by_article = defaultdict(list)
    for item in links:
        if item.post_id in posts:
            by_article[item.article_id].append((posts[item.post_id], item.probability, item.final))

    summaries = []
    for article_id in sorted(by_article):
        for threshold in (1, 2):
            summaries.append(summarize.tweets_as_summary(article_id, by_article[article_id], threshold))
    return summaries


def precision_row(links, pairs):
    """
    Precision of the linked posts outside the link model's training pairs, and the annotator agreement.
    """

    finals = linker.held_out_finals(links)
    trained_on = sum(1 for item in links if item.final is not None and item.in_training)
    counts = Counter(finals)
    agreement = linker.annotator_agreement([pair.labels for pair in pairs])
    return dict(pairs=len(finals), training_pairs=trained_on, relevant=counts[2], partially_relevant=counts[1],
                irrelevant=counts[0], weighted_precision=linker.weighted_precision(finals), agreement=agreement.score,
                agreement_pairs=agreement.pairs, agreement_skipped=agreement.skipped)


def timeliness_pairs(pairs, posts, articles):
    """
    (temporal distance, final label) of every annotated pair whose post and article are known.
    """

    result = []
    for pair in pairs:
        if pair.final is None or pair.post_id not in posts or pair.article_id not in articles:
            continue
        result.append((linker.temporal_distance(posts[pair.post_id], articles[pair.article_id]), pair.final))
    return result


# ----------------------------------
#   Pipeline step
# ----------------------------------

SUMMARY_COLUMNS = ['method', 'documents', 'abstractive_r1_f1', 'abstractive_r2_f1', 'extractive_r1_precision',
                   'extractive_r2_precision']
TWEET_COLUMNS = SUMMARY_COLUMNS + ['article_r1_precision', 'article_r2_precision']
PRECISION_COLUMNS = ['pairs', 'training_pairs', 'relevant', 'partially_relevant', 'irrelevant', 'weighted_precision',
                     'agreement', 'agreement_pairs', 'agreement_skipped']


def evaluate(module):
    """
    Writes every evaluation table.

    :param module: PipelineModule reference
    :return dict:
    """

    inputs = load_inputs(module)
    articles, annotations = inputs['articles'], inputs['annotations']
    stem, remove_stopwords = module.params['stem'], module.params['remove_stopwords']

    scores = evalkit.score_summaries(inputs['summaries'], annotations, articles, stem, remove_stopwords)
    ceiling = recall_ceiling_rows(annotations, articles, stem, remove_stopwords)

    jaccard_rows = []
    for kind in ('abstractive', 'extractive'):
        for row in evalkit.annotator_jaccard_table(annotations, articles, kind):
            jaccard_rows.append([kind, row['annotator_a'], row['annotator_b'], row['documents'], row['jaccard']])

    tweets = tweet_summaries(inputs['links'], inputs['posts'])
    tweet_scores = evalkit.score_tweet_summaries(tweets, annotations, articles, stem, remove_stopwords)
    uniqueness = evalkit.uniqueness_table(tweets, articles, annotations)

    precision = precision_row(inputs['links'], inputs['pairs'])

    report = evalkit.timeliness_report(timeliness_pairs(inputs['pairs'], inputs['posts'], articles),
                                       width=module.params['bin_days'])
    timeliness = dict((str(label), dict(pairs=entry.pairs, missing=entry.missing, pct_before=entry.pct_before,
                                        histogram=[[start, count] for start, count in entry.histogram]))
                      for label, entry in report.items())

    writer = ArtifactWriter(module.params['out'], check_mode=module.check_mode)
    writer.csv('summary_scores.csv', SUMMARY_COLUMNS, [_row(row, SUMMARY_COLUMNS) for row in scores])
    writer.csv('recall_ceiling.csv', ['article_id', 'abstractive_r1_recall', 'abstractive_r2_recall',
                                      'extractive_r1_recall', 'extractive_r2_recall'], ceiling)
    writer.csv('annotator_jaccard.csv', ['kind', 'annotator_a', 'annotator_b', 'documents', 'jaccard'], jaccard_rows)
    writer.jsonl('tweet_summaries.jsonl', [summary.to_dict() for summary in tweets])
    writer.csv('tweet_summary_scores.csv', TWEET_COLUMNS, [_row(row, TWEET_COLUMNS) for row in tweet_scores])
    writer.csv('uniqueness.csv', ['set_a', 'set_b', 'uniq_ab', 'uniq_ba'],
               [[row['set_a'], row['set_b'], row['uniq_ab'], row['uniq_ba']] for row in uniqueness])
    writer.csv('precision.csv', PRECISION_COLUMNS, [_row(precision, PRECISION_COLUMNS)])
    writer.json('timeliness.json', timeliness)
    for label, entry in sorted(report.items()):
        writer.csv('timeliness_label{0}.csv'.format(label), ['bin_start', 'count'], entry.histogram)

    manifest = writer.manifest('evaluate', seed=module.params['seed'], params=module.run_params())

    return dict(
        changed=not module.check_mode,
        precision=precision,
        timeliness=dict((label, entry['pct_before']) for label, entry in timeliness.items()),
        annotations=dict(used=len(annotations), rejected=inputs['rejected']),
        manifest=manifest,
    )


def main(argv=None):
    """
    Main entry point.

    :param argv: command-line arguments
    :return dict: evaluation results
    """

    argument_spec = dict(
        annotations=dict(type='path', required=True, default=None, must_exist=True),
        labels=dict(type='path', required=True, default=None, must_exist=True),
        stem=dict(type='bool', required=False, default=True),
        remove_stopwords=dict(type='bool', required=False, default=False),
        bin_days=dict(type='int', required=False, default=evalkit.TIMELINESS_BIN_DAYS),
        out=dict(type='path', required=True, default=None),
    )

    module = PipelineModule(argument_spec=argument_spec, name='evaluate', argv=argv, supports_check_mode=True)

    if module.params['bin_days'] < 1:
        module.fail_json(msg='Parameter bin_days must be at least 1', rc=2, field='bin_days')

    results = evaluate(module)

    module.exit_json(**results)


if __name__ == '__main__':
    main()
