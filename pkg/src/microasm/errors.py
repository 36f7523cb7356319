"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MicroASMError(Exception):
    exit_code = 1
    code = "error"


class BadInputError(MicroASMError, ValueError):
    exit_code = 2
    code = "bad_input"


class EmptyCorpusError(BadInputError):
    code = "empty_corpus"


class LexiconConflictError(BadInputError):
    code = "lexicon_conflict"

    def __init__(self, word: str):
        super().__init__(f"word {word!r} is in both the positive and negative seed lists")
        self.word = word


class UnclassifiableError(BadInputError):
    code = "unclassifiable"


class ConfigError(MicroASMError, ValueError):
    exit_code = 3
    code = "config_error"


class VersionMismatchError(MicroASMError):
    exit_code = 4
    code = "version_mismatch"


class ChecksumError(BadInputError):
    code = "checksum_mismatch"
