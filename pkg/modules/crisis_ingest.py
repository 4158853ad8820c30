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

from crisislink import corpus
from crisislink.artifacts import ArtifactWriter
from crisislink.errors import IngestError
from crisislink.module_utils import PipelineModule


DOCUMENTATION = '''
---
module: crisis_ingest
short_description: Loads posts and newswire articles, filters the articles and describes the posts
description:
    - Reads a post collection and an article collection from JSON Lines or CSV, normalises timestamps to UTC and
      segments article bodies into sentences. Malformed records are reported with their line number instead of being
      dropped silently.
    - Articles pass, in order, an ASCII filter, a minimum length filter and a minimum sentence count filter. The
      number removed by every stage is written to filter_report.json.
    - Use M(crisis_link) next to link the ingested posts to the kept articles.
version_added: "0.1"
author: crisislink contributors
options:
  posts:
    description:
      - Post collection with fields id, text, created_at and author.
    required: true
  articles:
    description:
      - Article collection with fields id, source, title, body and published_at.
    required: true
  format:
    description:
      - Input format of both files. Inferred from the file extension when omitted.
    required: false
    choices: [ "jsonl", "csv" ]
    default: none
  keywords:
    description:
      - Disaster keyword list, one keyword or phrase per line. The shipped list is used when omitted.
    required: false
    default: none
  min_chars:
    description:
      - Minimum article body length in characters (inclusive).
    required: false
    default: 1000
  min_sentences:
    description:
      - Minimum number of sentences of an article (inclusive).
    required: false
    default: 10
  ascii_only:
    description:
      - Drop articles that are not 7-bit clean.
    required: false
    default: true
  top_users:
    description:
      - Number of most active authors reported in post_stats.json.
    required: false
    default: 4
  seed:
    description:
      - Seed recorded in the manifest. Runs with the same inputs, parameters and seed are byte-identical.
    required: false
    default: 0
  out:
    description:
      - Output directory shared by all subcommands of a run.
    required: true
requirements:
    - PyYAML
    - nltk
'''

EXAMPLES = '''
---
# Ingest the shipped fixture corpus with the default filters
- name: ingest fixture corpus
  crisis_ingest:
    posts: samples/fixtures/posts.jsonl
    articles: samples/fixtures/articles.jsonl
    out: build/fixture-run

# Keep short articles too, for example when inspecting a sample
- name: ingest without the length filters
  crisis_ingest:
    posts: tweets.csv
    articles: news.csv
    format: csv
    min_chars: 0
    min_sentences: 1
    out: build/inspect
'''

RETURN = '''
---
counts:
    description: number of records read, kept and rejected
    returned: success
    type: dict
    sample: { "posts": 20, "articles_read": 5, "articles_kept": 5, "post_errors": 0, "article_errors": 0 }
filter_report:
    description: articles removed by each filter stage and the mean words per article after it
    returned: success
    type: dict
    sample: { "input_count": 5, "kept_count": 5, "removed": { "ascii": 0, "min_chars": 0, "min_sentences": 0 } }
manifest:
    description: the manifest of the written artifacts
    returned: success
    type: dict
    sample: { "subcommand": "ingest", "artifacts": [ { "path": "posts.jsonl", "bytes": 5120, "sha256": "..." } ] }
'''


# ----------------------------------
#          Helper functions
# ----------------------------------

def error_rows(errors):
    """
    Serialises record errors for ingest_errors.json.

    :param errors: list of RecordError
    :return list:
    """

    return [dict(line=error.line, field=error.field, message=error.message) for error in errors]


def post_statistics(module, posts):
    """
    Descriptive statistics, daily volume and most active authors of the post collection.

    :param module: PipelineModule reference
    :param posts: list of Post
    :return dict:
    """

    try:
        keywords = corpus.load_keywords(module.params['keywords'])
    except IngestError as e:
        module.fail_json(msg='Unable to load keyword list: {0}'.format(e))

    stats = corpus.descriptive_stats(posts, keywords)

    return dict(
        stats=stats.to_dict(),
        volume=[[day.isoformat(), count] for day, count in corpus.post_volume(posts)],
        top_users=[[author, count] for author, count in corpus.top_users(posts, module.params['top_users'])],
    )


# ----------------------------------
#   Pipeline step
# ----------------------------------

def ingest(module):
    """
    Loads, filters and writes the two collections.

    :param module: PipelineModule reference
    :return dict:
    """

    fmt = module.params['format']

    try:
        posts, post_errors = corpus.load_posts(module.params['posts'], fmt)
        articles, article_errors = corpus.load_articles(module.params['articles'], fmt)
    except IngestError as e:
        module.fail_json(msg='Unable to ingest: {0}'.format(e))

    kept, report = corpus.filter_articles(articles, min_chars=module.params['min_chars'],
                                          min_sentences=module.params['min_sentences'],
                                          ascii_only=module.params['ascii_only'])

    writer = ArtifactWriter(module.params['out'], check_mode=module.check_mode)
    writer.jsonl('posts.jsonl', [post.to_dict() for post in posts])
    writer.jsonl('articles.jsonl', [article.to_dict() for article in kept])
    writer.json('filter_report.json', report.to_dict())
    writer.json('post_stats.json', post_statistics(module, posts))
    writer.json('ingest_errors.json', dict(posts=error_rows(post_errors), articles=error_rows(article_errors)))

    manifest = writer.manifest('ingest', seed=module.params['seed'], params=module.run_params())

    return dict(
        changed=not module.check_mode,
        counts=dict(posts=len(posts), articles_read=len(articles), articles_kept=len(kept),
                    post_errors=len(post_errors), article_errors=len(article_errors)),
        filter_report=report.to_dict(),
        manifest=manifest,
    )


def main(argv=None):
    """
    Main entry point.

    :param argv: command-line arguments
    :return dict: ingest results
    """

    argument_spec = dict(
        posts=dict(type='path', required=True, default=None, must_exist=True),
        articles=dict(type='path', required=True, default=None, must_exist=True),
        format=dict(required=False, default=None, choices=list(corpus.FORMATS)),
        keywords=dict(type='path', required=False, default=None, must_exist=True),
        min_chars=dict(type='int', required=False, default=1000),
        min_sentences=dict(type='int', required=False, default=10),
        ascii_only=dict(type='bool', required=False, default=True),
        top_users=dict(type='int', required=False, default=4),
        out=dict(type='path', required=True, default=None),
    )

    module = PipelineModule(argument_spec=argument_spec, name='ingest', argv=argv, supports_check_mode=True)

    for param in ('min_chars', 'min_sentences', 'top_users'):
        if module.params[param] < 0:
            module.fail_json(msg='Parameter {0} must not be negative'.format(param), rc=2, field=param)

    results = ingest(module)

    module.exit_json(**results)


if __name__ == '__main__':
    main()
