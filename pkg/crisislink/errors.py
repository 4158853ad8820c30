# (c) 2026, crisislink contributors
#
# crisislink is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.


class CrisisLinkError(Exception):
    """
    Base class of every error raised by the library.
    """


class IngestError(CrisisLinkError):
    """
    An input file could not be read at all. Per-record problems are reported, not raised.
    """


class TrainingError(CrisisLinkError):
    """
    The link model cannot be trained on the given examples.
    """


class ConfigError(CrisisLinkError):
    """
    A parameter failed validation.

    :param field: name of the offending parameter
    """

    def __init__(self, field, msg):
        super(ConfigError, self).__init__('{0}: {1}'.format(field, msg))
        self.field = field


class ArtifactError(CrisisLinkError):
    """
    An upstream artifact a subcommand depends on is missing or unreadable.
    """
