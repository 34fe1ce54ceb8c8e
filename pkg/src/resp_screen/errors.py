"""Exception hierarchy shared by every stage of the screening pipeline."""


class ScreeningError(Exception):
    """Base class for all errors raised by resp_screen."""


# audio ingest
class UnsupportedFormat(ScreeningError):
    pass


class CorruptStream(ScreeningError):
    pass


# preprocessing / features; anything that makes a file unscorable
class PreprocessError(ScreeningError):
    pass


class EmptyClip(PreprocessError):
    pass


class AllZeroSignal(PreprocessError):
    pass


class NoActivity(PreprocessError):
    pass


class ClipTooShort(PreprocessError):
    pass


class BadWidth(ScreeningError, ValueError):
    pass


# classifiers
class SingleClass(ScreeningError):
    pass


class DidNotImprove(ScreeningError):
    pass


class NonFiniteLoss(ScreeningError):
    pass


class DimensionMismatch(ScreeningError, ValueError):
    pass


class ModelFormatError(ScreeningError):
    pass


# pipeline
class ParseError(ScreeningError):
    pass


class DuplicateId(ScreeningError):
    pass


class MissingFile(ScreeningError):
    pass


class InvalidSplit(ScreeningError):
    pass


class FoldLeak(InvalidSplit):
    pass


class WrongModelCount(ScreeningError):
    pass


class UnscorableFile(ScreeningError):
    def __init__(self, file_id, cause):
        super().__init__(f"{file_id}: {cause}")
        self.file_id = file_id
        self.cause = cause


# evaluation
class SingleClassLabels(ScreeningError):
    pass


class OutOfRangeProbability(ParseError):
    pass


class IdMismatch(ScreeningError):
    pass
