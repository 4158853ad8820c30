# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Subcommand dispatch: `crisislink <subcommand> [flags]` runs the matching pipeline module.
"""

import importlib
import json
import sys

from crisislink.module_utils import EXIT_INVALID

SUBCOMMANDS = dict(
    ingest='modules.crisis_ingest',
    link='modules.crisis_link',
    summarize='modules.crisis_summarize',
    cluster='modules.crisis_cluster',
    evaluate='modules.crisis_evaluate',
    report='modules.crisis_report',
)

PIPELINE_ORDER = ('ingest', 'link', 'summarize', 'cluster', 'evaluate', 'report')

USAGE = 'usage: crisislink {{{0}}} [--config FILE] [--log-level LEVEL] [--check] [flags]'.format(
    ','.join(PIPELINE_ORDER))


def run_subcommand(name, argv=None):
    """
    Runs one subcommand and returns its exit status instead of exiting.

    :param name: subcommand name
    :param argv: flags for the subcommand
    :return int: 0 on success, 1 on a runtime failure, 2 on invalid input
    """

    if name not in SUBCOMMANDS:
        sys.stdout.write(json.dumps(dict(failed=True, msg='Unknown subcommand {0!r}; expected one of {1}'.format(
            name, ', '.join(PIPELINE_ORDER))), sort_keys=True, indent=2))
        sys.stdout.write('\n')
        return EXIT_INVALID

    module = importlib.import_module(SUBCOMMANDS[name])
    try:
        module.main(list(argv or []))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ('-h', '--help'):
        sys.stderr.write(USAGE + '\n')
        return 0 if argv else EXIT_INVALID

    return run_subcommand(argv[0], argv[1:])
