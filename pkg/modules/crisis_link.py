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

from crisislink import corpus, linker, textproc
from crisislink.artifacts import ArtifactWriter, artifact_path
from crisislink.errors import ArtifactError, IngestError, TrainingError
from crisislink.module_utils import PipelineModule, env_fallback
from crisislink.retrieval import build_index


DOCUMENTATION = '''
---
module: crisis_link
short_description: Links ingested posts to articles and ranks them by relevance probability
description:
    - Builds a TFIDF index over the articles written by M(crisis_ingest) and retrieves the top candidate articles
      of every post.
    - Computes seven features per post-article pair (character 2/3-gram similarity, the same after synonym
      expansion, temporal distance, TFIDF cosine and hashtag similarity), trains a calibrated linear classifier on the
      annotated training pairs after balancing the classes, and ranks the candidate posts of every article by
      probability.
    - The top posts of each article are exported to links.jsonl for annotation and evaluation. Precision counts only
      exported pairs that took no part in training.
version_added: "0.1"
author: crisislink contributors
options:
  labels:
    description:
      - CSV of annotated pairs with columns post_id, article_id, label1, label2 (label2 may be blank).
    required: true
  train_labels:
    description:
      - CSV of annotated pairs to train on, in the format of O(labels). When given, the model is trained on these
        pairs and precision is measured on the pairs of O(labels) that do not also appear here.
      - Without it a seeded, stratified share O(holdout) of O(labels) is held out of training for measuring precision.
    required: false
    default: none
  holdout:
    description:
      - Share of each class of O(labels) held out of training when O(train_labels) is not given.
    required: false
    default: 0.3
  lexdb:
    description:
      - Directory of WordNet-format index.* and data.* files used for synonym expansion. Falls back to the
        CRISISLINK_LEXDB environment variable; without either the expanded features equal the plain ones.
    required: false
    default: none
  stopwords:
    description:
      - Stopword list, one word per line. The shipped English list is used when omitted.
    required: false
    default: none
  top_k:
    description:
      - Number of candidate articles retrieved per post.
    required: false
    default: 100
  positive_label:
    description:
      - Lowest aggregated label counted as a link when training.
    required: false
    choices: [ 1, 2 ]
    default: 1
  seed:
    description:
      - Random seed of the holdout, undersampling and the validation split.
    required: false
    default: 0
  c_grid:
    description:
      - Candidate regularisation constants searched by cross validation.
    required: false
    default: [ 0.01, 0.1, 1, 10, 100 ]
  folds:
    description:
      - Number of cross-validation folds.
    required: false
    default: 5
  export_top:
    description:
      - Number of ranked posts exported per article.
    required: false
    default: 10
  out:
    description:
      - Output directory holding the M(crisis_ingest) artifacts.
    required: true
requirements:
    - numpy
    - scipy
'''

EXAMPLES = '''
---
# Link the fixture corpus using the miniature lexical database
- name: link posts to articles
  crisis_link:
    labels: samples/fixtures/labels.csv
    lexdb: samples/fixtures/lexdb
    seed: 7
    out: build/fixture-run

# Train on a separate annotation round and measure precision on labels.csv
- name: link with separate training labels
  crisis_link:
    labels: labels.csv
    train_labels: train_labels.csv
    out: build/separate

# Count only fully relevant pairs as links and search a narrower grid
- name: link with strict labels
  crisis_link:
    labels: labels.csv
    positive_label: 2
    c_grid: [ 0.1, 1, 10 ]
    out: build/strict
'''

RETURN = '''
---
training:
    description: size of the training set before and after balancing and the selected regularisation constant
    returned: success
    type: dict
    sample: { "labeled_pairs": 28, "training_pairs": 20, "held_out_pairs": 8, "balanced_pairs": 14, "best_c": 1.0 }
evaluation:
    description: label counts and weighted precision of the exported links outside the training pairs, and the
        annotator agreement
    returned: success
    type: dict
    sample: { "weighted_precision": 0.65, "agreement": 0.81 }
manifest:
    description: the manifest of the written artifacts
    returned: success
    type: dict
'''

log = logging.getLogger(__name__)


# ----------------------------------
#          Helper functions
# ----------------------------------

def load_inputs(module):
    """
    Reads the ingested collections and the annotated pairs.

    :param module: PipelineModule reference
    :return tuple: posts by id, articles by id, annotated pairs, separate training pairs or None
    """

    out = module.params['out']

    try:
        posts, _ = corpus.load_posts(artifact_path(out, 'posts'), 'jsonl')
        articles, _ = corpus.load_articles(artifact_path(out, 'articles'), 'jsonl')
        pairs, errors = corpus.load_labels(module.params['labels'])
        training_pairs = None
        if module.params['train_labels']:
            training_pairs, training_errors = corpus.load_labels(module.params['train_labels'])
            errors = errors + training_errors
    except (ArtifactError, IngestError) as e:
        module.fail_json(msg='Unable to load link inputs: {0}'.format(e))

    if errors:
        log.warning('Ignored %d malformed label rows', len(errors))

    if not articles:
        module.fail_json(msg='No articles survived ingestion; nothing to link to')

    return (dict((post.id, post) for post in posts), dict((article.id, article) for article in articles), pairs,
            training_pairs)


def load_lexdb(module):
    """
    Loads the lexical database, or an empty one when no directory is configured.

    :param module: PipelineModule reference
    :return LexicalDatabase:
    """

    path = module.params['lexdb']
    if not path:
        log.warning('No lexical database configured; expanded features equal the plain ones')
        return textproc.LexicalDatabase()

    try:
        return textproc.LexicalDatabase.from_directory(path)
    except IngestError as e:
        module.fail_json(msg='Unable to load lexical database: {0}'.format(e))


def load_stopwords(module):
    path = module.params['stopwords']
    if not path:
        return None

    try:
        return textproc.load_wordlist(path)
    except IngestError as e:
        module.fail_json(msg='Unable to load stopwords: {0}'.format(e))


def usable(pairs, posts, articles):
    """
    The annotated pairs carrying a label whose post and article are both known.
    """

    kept = [pair for pair in pairs if pair.final is not None and pair.post_id in posts and pair.article_id in articles]
    if len(kept) < len(pairs):
        log.warning('%d annotated pairs refer to unknown posts or articles or carry no label', len(pairs) - len(kept))
    return kept


def split_pairs(module, labeled, training_pairs):
    """
    Separates the pairs the model learns from and the pairs its precision is measured on. A pair never
    lands in both.

    :param module: PipelineModule reference
    :param labeled: usable pairs of the labels file
    :param training_pairs: usable pairs of the training labels file, None to hold out part of labeled
    :return tuple: (training pairs, held-out pairs)
    """

    if training_pairs is not None:
        keys = set((pair.post_id, pair.article_id) for pair in training_pairs)
        return training_pairs, [pair for pair in labeled if (pair.post_id, pair.article_id) not in keys]

    targets = [int(pair.final >= module.params['positive_label']) for pair in labeled]
    try:
        training, held_out = linker.holdout_split(targets, module.params['holdout'], module.params['seed'])
    except TrainingError as e:
        module.fail_json(msg='Unable to hold out evaluation pairs: {0}'.format(e))

    return [labeled[i] for i in training], [labeled[i] for i in held_out]


def train_model(module, extractor, training_pairs, held_out, posts, articles):
    """
    Extracts the features of the annotated pairs, balances the classes of the training pairs and trains
    the link model.

    :param module: PipelineModule reference
    :param extractor: PairFeatureExtractor
    :param training_pairs: annotated pairs the model learns from
    :param held_out: annotated pairs kept out of training, listed in pair_features.csv only
    :return tuple: (LinkModel, feature rows for pair_features.csv, training summary)
    """

    seed = module.params['seed']
    labeled = list(training_pairs) + list(held_out)
    features = [extractor.features(posts[pair.post_id], articles[pair.article_id]) for pair in labeled]
    targets = [int(pair.final >= module.params['positive_label']) for pair in labeled]
    pair_ids = ['{0}/{1}'.format(pair.post_id, pair.article_id) for pair in labeled]
    training = list(range(len(training_pairs)))

    try:
        balanced, balanced_targets = linker.undersample(training, [targets[i] for i in training], seed)
        model = linker.train([features[i] for i in balanced], balanced_targets, seed,
                             c_grid=tuple(module.params['c_grid']), folds=module.params['folds'],
                             pair_ids=[pair_ids[i] for i in balanced])
    except TrainingError as e:
        module.fail_json(msg='Unable to train link model: {0}'.format(e))

    in_training = set(balanced)
    rows = []
    for i, pair in enumerate(labeled):
        row = features[i].to_dict()
        rows.append([pair.post_id, pair.article_id] + [row[name] for name in linker.FEATURE_NAMES] +
                    [int(row['missing_time']), int(pair.final), targets[i], int(i in in_training),
                     int(i >= len(training_pairs))])

    summary = dict(labeled_pairs=len(labeled), training_pairs=len(training_pairs), held_out_pairs=len(held_out),
                   positives=sum(targets[i] for i in training), balanced_pairs=len(balanced),
                   best_c=model.metadata['best_c'], cv_accuracy=model.metadata['cv_accuracy'])

    return model, rows, summary


def rank_candidates(module, extractor, model, posts, articles):
    """
    Retrieves candidate articles for every post, regroups the pairs by article and ranks them.

    :return list: LinkResult per article, by article id
    """

    grouped = defaultdict(list)
    for post, article_id, _ in extractor.candidate_pairs([posts[post_id] for post_id in sorted(posts)],
                                                         k=module.params['top_k']):
        grouped[article_id].append((post.id, extractor.features(post, articles[article_id])))

    return [linker.rank_posts(article_id, grouped.get(article_id, []), model) for article_id in sorted(articles)]


def evaluate_links(records, pairs):
    """
    Label counts and weighted precision of the exported links that took no part in training, and agreement
    over every annotated pair.
    """

    linked = linker.read_link_records(records)
    finals = linker.held_out_finals(linked)
    counts = Counter(finals)
    agreement = linker.annotator_agreement([pair.labels for pair in pairs])

    return dict(
        exported_pairs=len(linked),
        labeled_pairs=len(finals),
        training_pairs=sum(1 for item in linked if item.final is not None and item.in_training),
        relevant=counts[2],
        partially_relevant=counts[1],
        irrelevant=counts[0],
        weighted_precision=linker.weighted_precision(finals),
        agreement=agreement.score,
        agreement_pairs=agreement.pairs,
        agreement_skipped=agreement.skipped,
    )


# ----------------------------------
#   Pipeline step
# ----------------------------------

def link(module):
    """
    Trains the link model and exports the ranked links.

    :param module: PipelineModule reference
    :return dict:
    """

    posts, articles, pairs, training_pairs = load_inputs(module)
    stopwords = load_stopwords(module)

    article_ids = sorted(articles)
    article_texts = [textproc.tokenize(u'{0}\n{1}'.format(articles[article_id].title, articles[article_id].body),
                                       stopwords) for article_id in article_ids]
    index = build_index(article_texts, article_ids)
    extractor = linker.PairFeatureExtractor(index, load_lexdb(module), stopwords)

    labeled = usable(pairs, posts, articles)
    if training_pairs is not None:
        training_pairs = usable(training_pairs, posts, articles)
    training_pairs, held_out = split_pairs(module, labeled, training_pairs)

    model, feature_rows, training = train_model(module, extractor, training_pairs, held_out, posts, articles)
    results = rank_candidates(module, extractor, model, posts, articles)

    finals = dict(((pair.post_id, pair.article_id), pair.final) for pair in list(training_pairs) + list(held_out))
    trained_on = frozenset((pair.post_id, pair.article_id) for pair in training_pairs)
    distances = dict()
    for result in results:
        for post_id, _ in result.export(module.params['export_top']):
            distances[(post_id, result.article_id)] = linker.temporal_distance(posts[post_id],
                                                                                articles[result.article_id])
    records = [linker.link_record(result, finals, distances, module.params['export_top'], trained_on)
               for result in results]
    evaluation = evaluate_links(records, pairs)

    writer = ArtifactWriter(module.params['out'], check_mode=module.check_mode)
    writer.json('index.json', index.to_dict())
    writer.csv('pair_features.csv', ['post_id', 'article_id'] + list(linker.FEATURE_NAMES) +
               ['missing_time', 'final', 'target', 'in_training', 'held_out'], feature_rows)
    writer.json('model.json', model.to_dict())
    writer.jsonl('links.jsonl', records)
    writer.json('link_eval.json', dict(training=training, evaluation=evaluation))

    manifest = writer.manifest('link', seed=module.params['seed'], params=module.run_params())

    return dict(changed=not module.check_mode, training=training, evaluation=evaluation, manifest=manifest)


def main(argv=None):
    """
    Main entry point.

    :param argv: command-line arguments
    :return dict: link results
    """

    argument_spec = dict(
        labels=dict(type='path', required=True, default=None, must_exist=True),
        train_labels=dict(type='path', required=False, default=None, must_exist=True),
        holdout=dict(type='float', required=False, default=linker.HOLDOUT_FRACTION),
        lexdb=dict(type='path', required=False, default=None, must_exist=True,
                   fallback=(env_fallback, ['CRISISLINK_LEXDB'])),
        stopwords=dict(type='path', required=False, default=None, must_exist=True),
        top_k=dict(type='int', required=False, default=100),
        positive_label=dict(type='int', required=False, default=1, choices=[1, 2]),
        seed=dict(type='int', required=False, default=0),
        c_grid=dict(type='list', elements='float', required=False, default=list(linker.DEFAULT_C_GRID)),
        folds=dict(type='int', required=False, default=linker.DEFAULT_FOLDS),
        export_top=dict(type='int', required=False, default=linker.EXPORT_TOP),
        out=dict(type='path', required=True, default=None),
    )

    module = PipelineModule(argument_spec=argument_spec, name='link', argv=argv, supports_check_mode=True)

    for param in ('top_k', 'folds', 'export_top'):
        if module.params[param] < 1:
            module.fail_json(msg='Parameter {0} must be at least 1'.format(param), rc=2, field=param)
    if not 0.0 <= module.params['holdout'] < 1.0:
        module.fail_json(msg='Parameter holdout must lie in [0, 1)', rc=2, field='holdout')
    if not module.params['c_grid'] or any(c <= 0.0 for c in module.params['c_grid']):
        module.fail_json(msg='Parameter c_grid must list positive constants', rc=2, field='c_grid')

    results = link(module)

    module.exit_json(**results)


if __name__ == '__main__':
    main()
