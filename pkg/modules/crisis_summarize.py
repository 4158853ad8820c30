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

from crisislink import corpus, summarize, textproc
from crisislink.artifacts import ArtifactWriter, artifact_path
from crisislink.errors import ArtifactError, IngestError
from crisislink.module_utils import PipelineModule
from crisislink.retrieval import build_index


DOCUMENTATION = '''
---
module: crisis_summarize
short_description: Writes budgeted extractive summaries of every ingested article
description:
    - Runs up to nine extractive summarizers over each article kept by M(crisis_ingest) and writes one JSON line
      per article and method to summaries.jsonl.
    - Methods are lead, centroid, lexrank, textrank, submodular, greedy_tfidf, ilp_budget, score_ilp_tfidf and
      title_reduction. Every summary stays within the word budget; only a single leading sentence longer than the
      budget is truncated.
    - Sentence weights come from an index over the sentences of the article itself unless corpus_idf is set.
version_added: "0.1"
author: crisislink contributors
options:
  budget:
    description:
      - Maximum summary length in words.
    required: false
    default: 100
  methods:
    description:
      - Summarizers to run, in output order.
    required: false
    choices: [ "lead", "centroid", "lexrank", "textrank", "submodular", "greedy_tfidf", "ilp_budget",
               "score_ilp_tfidf", "title_reduction" ]
    default: all nine
  lexrank_threshold:
    description:
      - Minimum cosine for an edge of the LexRank sentence graph.
    required: false
    default: 0.1
  damping:
    description:
      - Damping factor of the LexRank and TextRank power iteration.
    required: false
    default: 0.85
  tolerance:
    description:
      - Convergence tolerance (L1 change) of the power iteration.
    required: false
    default: 1e-6
  max_iter:
    description:
      - Iteration limit of the power iteration.
    required: false
    default: 100
  redundancy:
    description:
      - Cosine at or above which the centroid method skips a sentence as redundant.
    required: false
    default: 0.95
  exact_cap:
    description:
      - Largest sentence count solved exactly by ilp_budget; longer articles use the greedy approximation.
    required: false
    default: 25
  corpus_idf:
    description:
      - Weight sentence terms with document frequencies over the whole article collection.
    required: false
    default: false
  seed:
    description:
      - Seed recorded in the manifest. Runs with the same inputs, parameters and seed are byte-identical.
    required: false
    default: 0
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
# All nine summarizers with the 100-word budget
- name: summarize articles
  crisis_summarize:
    out: build/fixture-run

# Two methods with a tighter budget
- name: short summaries
  crisis_summarize:
    budget: 50
    methods: [ "lead", "lexrank" ]
    out: build/short
'''

RETURN = '''
---
summaries:
    description: number of summaries written per method
    returned: success
    type: dict
    sample: { "lead": 5, "lexrank": 5 }
approximate:
    description: number of ilp_budget summaries solved by the greedy approximation
    returned: success
    type: int
    sample: 0
manifest:
    description: the manifest of the written artifacts
    returned: success
    type: dict
'''


# ----------------------------------
#          Helper functions
# ----------------------------------

def summarizer_config(module):
    """
    Builds the summarizer configuration from the module parameters.

    :param module: PipelineModule reference
    :return SummarizerConfig:
    """

    try:
        return summarize.SummarizerConfig(
            budget=module.params['budget'],
            lexrank_threshold=module.params['lexrank_threshold'],
            damping=module.params['damping'],
            tolerance=module.params['tolerance'],
            max_iter=module.params['max_iter'],
            redundancy=module.params['redundancy'],
            exact_cap=module.params['exact_cap'],
        )
    except ValueError as e:
        module.fail_json(msg='Invalid summarizer parameter: {0}'.format(e), rc=2)


# ----------------------------------
#   Pipeline step
# ----------------------------------

def summarize_articles(module):
    """
    Summarizes every ingested article with every requested method.

    :param module: PipelineModule reference
    :return dict:
    """

    config = summarizer_config(module)

    try:
        articles, _ = corpus.load_articles(artifact_path(module.params['out'], 'articles'), 'jsonl')
    except (ArtifactError, IngestError) as e:
        module.fail_json(msg='Unable to load articles: {0}'.format(e))

    index = None
    if module.params['corpus_idf'] and articles:
        index = build_index([textproc.tokenize(article.body) for article in articles], [a.id for a in articles])

    summaries = []
    for article in sorted(articles, key=lambda item: item.id):
        summaries.extend(summarize.summarize_article(article, module.params['methods'], config, index))

    counts = dict((method, sum(1 for summary in summaries if summary.method == method))
                  for method in module.params['methods'])

    writer = ArtifactWriter(module.params['out'], check_mode=module.check_mode)
    writer.jsonl('summaries.jsonl', [summary.to_dict() for summary in summaries])
    manifest = writer.manifest('summarize', seed=module.params['seed'], params=module.run_params())

    return dict(changed=not module.check_mode, summaries=counts,
                approximate=sum(1 for summary in summaries if summary.approximate), manifest=manifest)


def main(argv=None):
    """
    Main entry point.

    :param argv: command-line arguments
    :return dict: summarize results
    """

    argument_spec = dict(
        budget=dict(type='int', required=False, default=summarize.DEFAULT_BUDGET),
        methods=dict(type='list', required=False, default=list(summarize.METHODS), choices=list(summarize.METHODS)),
        lexrank_threshold=dict(type='float', required=False, default=0.1),
        damping=dict(type='float', required=False, default=0.85),
        tolerance=dict(type='float', required=False, default=1e-6),
        max_iter=dict(type='int', required=False, default=100),
        redundancy=dict(type='float', required=False, default=0.95),
        exact_cap=dict(type='int', required=False, default=25),
        corpus_idf=dict(type='bool', required=False, default=False),
        out=dict(type='path', required=True, default=None),
    )

    module = PipelineModule(argument_spec=argument_spec, name='summarize', argv=argv, supports_check_mode=True)

    if not module.params['methods']:
        module.fail_json(msg='Parameter methods must name at least one summarizer', rc=2, field='methods')

    results = summarize_articles(module)

    module.exit_json(**results)


if __name__ == '__main__':
    main()
