# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
"""
Parameter handling shared by the pipeline modules.

A pipeline module declares its parameters as an `argument_spec` dict and hands it to PipelineModule,
an AnsibleModule that takes its arguments from the command line and a YAML config file instead of an
Ansible controller. Precedence, lowest first: argument_spec defaults, the config file, environment
fallbacks, command-line flags. Results are a JSON document on stdout; `exit_json` exits with status 0,
`fail_json` with status 1, and invalid parameters exit with status 2 and name the offending `field`.
"""

import argparse
import json
import logging
import os
import re
import sys

import yaml
from ansible.module_utils import basic
from ansible.module_utils.basic import AnsibleModule, env_fallback
from ansible.module_utils.common.text.converters import to_bytes
from ansible.module_utils.errors import AnsibleFallbackNotFound

log = logging.getLogger(__name__)

__all__ = ['PipelineModule', 'env_fallback', 'flag_name', 'EXIT_OK', 'EXIT_FAILURE', 'EXIT_INVALID']

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']
LOG_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2

COMMON_ARGUMENT_SPEC = dict(
    config=dict(type='path', default=None, must_exist=True),
    log_level=dict(default='WARNING', choices=LOG_LEVELS, fallback=(env_fallback, ['CRISISLINK_LOG_LEVEL'])),
    seed=dict(type='int', default=0),
)

# parameters that describe how a run was invoked rather than what it computes
INVOCATION_PARAMS = ('config', 'log_level', 'out')

# argument_spec keys handled here rather than by AnsibleModule
LOCAL_SPEC_KEYS = ('must_exist',)


def flag_name(param):
    return '--{0}'.format(param.replace('_', '-'))


class _ParseError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        raise _ParseError(message)


def _fail_early(msg, field=None):
    """
    Failure before the module exists: malformed flags or an unreadable config file.
    """

    result = dict(failed=True, msg=msg)
    if field is not None:
        result['field'] = field
    print('\n{0}'.format(json.dumps(result, sort_keys=True)))
    sys.exit(EXIT_INVALID)


def _fallback_applies(spec):
    fallback = spec.get('fallback')
    if not fallback:
        return False

    strategy, args = fallback[0], fallback[1:]
    strategy_args, strategy_kwargs = [], {}
    for arg in args:
        if isinstance(arg, dict):
            strategy_kwargs = arg
        else:
            strategy_args = arg
    try:
        strategy(*strategy_args, **strategy_kwargs)
    except AnsibleFallbackNotFound:
        return False
    return True


class PipelineModule(AnsibleModule):
    """
    AnsibleModule driven by command-line flags and an optional YAML config file.

    :param argument_spec: AnsibleModule argument_spec; `must_exist=True` additionally requires a path to exist
    :param name: subcommand name, selects the section of the config file
    :param argv: command-line arguments, defaults to sys.argv[1:]
    :param supports_check_mode: accept --check
    """

    def __init__(self, argument_spec, name, argv=None, supports_check_mode=True, **kwargs):
        self.name = name
        self.sources = dict()
        self._validated = False

        full_spec = dict(COMMON_ARGUMENT_SPEC)
        full_spec.update(argument_spec)
        self._must_exist = sorted(param for param, spec in full_spec.items() if spec.get('must_exist'))
        ansible_spec = dict((param, dict((key, value) for key, value in spec.items() if key not in LOCAL_SPEC_KEYS))
                            for param, spec in full_spec.items())

        basic._ANSIBLE_ARGS = to_bytes(json.dumps(dict(
            ANSIBLE_MODULE_ARGS=self._module_args(ansible_spec, sys.argv[1:] if argv is None else argv))))

        # progress goes to the logging handlers on stderr, never to syslog
        super(PipelineModule, self).__init__(argument_spec=ansible_spec, supports_check_mode=supports_check_mode,
                                             no_log=True, **kwargs)

        for param in self._must_exist:
            value = self.params.get(param)
            if value is not None and not os.path.exists(value):
                self.fail_json(msg='Invalid parameter {0}: path does not exist: {1}'.format(param, value), field=param)

        self._validated = True
        self._configure_logging()

    # ----------------------------------
    #   Flags and config file
    # ----------------------------------

    def _module_args(self, spec, argv):
        """
        The ANSIBLE_MODULE_ARGS document: config file values overlaid with flags. Parameters an environment
        fallback provides are left out unless flagged, so that the fallback takes precedence over the file.
        """

        try:
            flags = self._parse_flags(spec, argv)
        except _ParseError as e:
            _fail_early('Invalid arguments: {0}'.format(e))

        check = flags.pop('_check', False)
        from_file = self._read_config(spec, flags['config']) if flags.get('config') else dict()

        args = dict()
        for param in spec:
            if param in flags:
                args[param], self.sources[param] = flags[param], 'flag'
            elif _fallback_applies(spec[param]):
                self.sources[param] = 'env'
            elif param in from_file:
                args[param], self.sources[param] = from_file[param], 'config'
            else:
                self.sources[param] = 'default'

        args = dict((param, value) for param, value in args.items() if value is not None)
        args.update(_ansible_check_mode=check, _ansible_module_name=self.name)
        return args

    def _parse_flags(self, spec, argv):
        parser = _ArgumentParser(prog='crisislink {0}'.format(self.name), add_help=False, allow_abbrev=False)
        parser.add_argument('--check', dest='_check', action='store_true', default=argparse.SUPPRESS)
        for param, options in sorted(spec.items()):
            names = [flag_name(param)] + [flag_name(alias) for alias in options.get('aliases', [])]
            if options.get('type') == 'bool':
                parser.add_argument(*names, dest=param, nargs='?', const='true', default=argparse.SUPPRESS)
            else:
                parser.add_argument(*names, dest=param, default=argparse.SUPPRESS)

        return vars(parser.parse_args(argv))

    def _read_config(self, spec, path):
        path = os.path.expanduser(path)
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except (IOError, OSError, yaml.YAMLError) as e:
            _fail_early('Invalid parameter config: unable to read {0}: {1}'.format(path, e), field='config')

        if not isinstance(data, dict):
            _fail_early('Invalid parameter config: {0} must hold a mapping of sections'.format(path), field='config')

        base = os.path.dirname(os.path.abspath(path))
        merged = dict()
        for section in ('defaults', self.name):
            values = data.get(section) or {}
            if not isinstance(values, dict):
                _fail_early('Invalid parameter config: section {0} must be a mapping'.format(section), field=section)
            for key, value in values.items():
                param = self._canonical(spec, key)
                if param is None:
                    # defaults are shared by every subcommand
                    if section == self.name:
                        _fail_early('Unsupported parameter for {0}: {1}'.format(self.name, key), field=str(key))
                    continue
                if spec[param].get('type') == 'path' and value is not None:
                    value = os.path.join(base, os.path.expanduser(str(value)))
                merged[param] = value

        return merged

    @staticmethod
    def _canonical(spec, key):
        key = str(key).replace('-', '_')
        if key in spec:
            return key
        for param, options in spec.items():
            if key in options.get('aliases', []):
                return param
        return None

    def _offending_param(self, msg):
        """
        The parameter a validation message is about: the first parameter name or alias it mentions.
        """

        found = []
        for param, options in self.argument_spec.items():
            for name in [param] + list(options.get('aliases', [])):
                match = re.search(r'\b{0}\b'.format(re.escape(name)), msg)
                if match:
                    found.append((match.start(), param))
        return min(found)[1] if found else None

    def _configure_logging(self):
        logging.basicConfig(stream=sys.stderr, level=getattr(logging, self.params['log_level']), format=LOG_FORMAT,
                            force=True)
        log.debug('Resolved parameters for %s: %s', self.name, self.run_params())

    # ----------------------------------
    #   Results
    # ----------------------------------

    def run_params(self):
        """
        Parameters that determine the outputs, for recording in manifests.
        """

        return dict((param, self.params.get(param)) for param in sorted(self.argument_spec)
                    if param not in INVOCATION_PARAMS)

    def fail_json(self, msg, rc=EXIT_FAILURE, **kwargs):
        """
        Fails the run. Validation failures, including those AnsibleModule reports while it is being
        constructed, exit with status 2 and carry the offending parameter as `field`.
        """

        if not self._validated:
            rc = EXIT_INVALID
            if kwargs.get('field') is None:
                kwargs['field'] = self._offending_param(msg)

        try:
            super(PipelineModule, self).fail_json(msg=msg, **kwargs)
        except SystemExit:
            sys.exit(rc)
