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

from crisislink import cluster, corpus, linker, textproc
from crisislink.artifacts import ArtifactWriter, artifact_path, read_jsonl
from crisislink.errors import ArtifactError, ConfigError, IngestError
from crisislink.module_utils import PipelineModule


DOCUMENTATION = '''
---
module: crisis_cluster
short_description: Groups posts into event clusters with the Dirichlet multinomial mixture sampler
description:
    - Clusters the ingested posts (or, with linked_only, the posts linked to an article, annotated as relevant or
      partially relevant and published before that article) with a collapsed Gibbs sampler.
    - Posts are reduced to their content tokens (URLs, non-ASCII characters, punctuation and stopwords removed).
    - Writes the assignment of every post, the most frequent terms of every non-empty cluster and the cluster size
      statistics.
version_added: "0.1"
author: crisislink contributors
options:
  k:
    description:
      - Upper bound on the number of clusters.
    required: false
    default: 15
  alpha:
    description:
      - Dirichlet prior of the cluster weights.
    required: false
    default: 0.1
  beta:
    description:
      - Dirichlet prior of the per-cluster word distributions.
    required: false
    default: 0.1
  iters:
    description:
      - Number of Gibbs sweeps.
    required: false
    default: 50
  seed:
    description:
      - Random seed of the initial assignment and the sampler.
    required: false
    default: 0
  top_n:
    description:
      - Number of terms listed per cluster in cluster_terms.csv.
    required: false
    default: 20
  linked_only:
    description:
      - Cluster only annotated relevant or partially relevant linked posts that preceded their article.
        Requires the M(crisis_link) artifacts.
    required: false
    default: false
  stopwords:
    description:
      - Stopword list, one word per line. The shipped English list is used when omitted.
    required: false
    default: none
  out:
    description:
      - Output directory holding the M(crisis_ingest) artifacts.
    required: true
requirements:
    - numpy
'''

EXAMPLES = '''
---
# The parameters used for the event clusters
- name: cluster linked posts
  crisis_cluster:
    k: 15
    alpha: 0.1
    beta: 0.1
    iters: 50
    linked_only: true
    out: build/fixture-run
'''

RETURN = '''
---
documents:
    description: number of posts clustered
    returned: success
    type: int
    sample: 12
cluster_stats:
    description: size statistics over the non-empty clusters
    returned: success
    type: dict
    sample: { "clusters": 4, "min": 2, "max": 5, "mean": 3.0, "mode": 2 }
manifest:
    description: the manifest of the written artifacts
    returned: success
    type: dict
'''


# ----------------------------------
#          Helper functions
# ----------------------------------

def select_posts(module, posts):
    """
    The posts to cluster, in ingestion order.

    :param module: PipelineModule reference
    :param posts: list of Post
    :return list:
    """

    if not module.params['linked_only']:
        return posts

    try:
        linked = linker.read_link_records(read_jsonl(artifact_path(module.params['out'], 'links')))
    except ArtifactError as e:
        module.fail_json(msg='linked_only needs the link artifacts: {0}'.format(e))

    selected = set(item.post_id for item in linked
                   if item.final is not None and item.final >= 1
                   and item.temporal_distance is not None and item.temporal_distance > 0)

    return [post for post in posts if post.id in selected]


# ----------------------------------
#   Pipeline step
# ----------------------------------

def cluster_posts(module):
    """
    Fits the sampler and writes assignments, cluster terms and statistics.

    :param module: PipelineModule reference
    :return dict:
    """

    try:
        config = cluster.GsdmmConfig(K=module.params['k'], alpha=module.params['alpha'], beta=module.params['beta'],
                                     iters=module.params['iters'], seed=module.params['seed'])
    except ConfigError as e:
        module.fail_json(msg='Invalid parameter {0}'.format(e), rc=2, field=e.field)

    try:
        posts, _ = corpus.load_posts(artifact_path(module.params['out'], 'posts'), 'jsonl')
        stopwords = textproc.load_wordlist(module.params['stopwords']) if module.params['stopwords'] else None
    except (ArtifactError, IngestError) as e:
        module.fail_json(msg='Unable to load cluster inputs: {0}'.format(e))

    posts = select_posts(module, posts)
    docs = [textproc.tokenize(post.text, stopwords).content_tokens for post in posts]
    state = cluster.fit(docs, config)
    stats = cluster.cluster_stats(state)

    term_rows = []
    for k in range(config.K):
        if state.m_k[k] > 0:
            term_rows.extend([k, term, count] for term, count in cluster.top_terms(state, k, module.params['top_n']))

    writer = ArtifactWriter(module.params['out'], check_mode=module.check_mode)
    writer.csv('assignments.csv', ['post_id', 'cluster'],
               [[post.id, k] for post, k in zip(posts, state.assignments())])
    writer.csv('cluster_terms.csv', ['cluster', 'term', 'count'], term_rows)
    writer.json('cluster_stats.json', dict(documents=state.D, vocabulary=state.V, sizes=state.sizes(), **stats))

    manifest = writer.manifest('cluster', seed=config.seed, params=module.run_params())

    return dict(changed=not module.check_mode, documents=state.D, cluster_stats=stats, manifest=manifest)


def main(argv=None):
    """
    Main entry point.

    :param argv: command-line arguments
    :return dict: cluster results
    """

    argument_spec = dict(
        k=dict(type='int', required=False, default=15, aliases=['n_clusters']),
        alpha=dict(type='float', required=False, default=0.1),
        beta=dict(type='float', required=False, default=0.1),
        iters=dict(type='int', required=False, default=50),
        seed=dict(type='int', required=False, default=0),
        top_n=dict(type='int', required=False, default=20),
        linked_only=dict(type='bool', required=False, default=False),
        stopwords=dict(type='path', required=False, default=None, must_exist=True),
        out=dict(type='path', required=True, default=None),
    )

    module = PipelineModule(argument_spec=argument_spec, name='cluster', argv=argv, supports_check_mode=True)

    if module.params['top_n'] < 1:
        module.fail_json(msg='Parameter top_n must be at least 1', rc=2, field='top_n')

    results = cluster_posts(module)

    module.exit_json(**results)


if __name__ == '__main__':
    main()
