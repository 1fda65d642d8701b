"""Exception hierarchy.

Every error raised on purpose derives from :class:`ArgusError`.  The CLI maps
``DataError`` subclasses to exit code 2 and ``IoFailure`` to exit code 3.
"""

from __future__ import annotations


class ArgusError(Exception):
    exit_code = 2


class DataError(ArgusError):
    """Input data or configuration is invalid."""


class IoFailure(ArgusError):
    exit_code = 3


# core model


class InvalidGeometry(DataError):
    pass


class SchemaError(DataError):
    pass


# ingest


class UnsupportedFormat(DataError):
    pass


class MalformedHeader(DataError):
    pass


class UnsupportedShapeType(DataError):
    pass


class RecordCountMismatch(DataError):
    pass


class UnknownCrs(DataError):
    pass


class MissingHeaderKey(DataError):
    pass


class CellCountMismatch(DataError):
    pass


class NonNumericCell(DataError):
    pass


class UnsupportedCompression(DataError):
    pass


class UnsupportedLayout(DataError):
    pass


class MissingGeoreference(DataError):
    pass


class EmptyInput(DataError):
    pass


class RaggedRow(DataError):
    def __init__(self, row: int, expected: int, found: int):
        super().__init__(f"row {row}: expected {expected} cells, found {found}")
        self.row = row
        self.expected = expected
        self.found = found


class InvalidPattern(DataError):
    pass


# crs


class LatitudeOutOfRange(DataError):
    pass


class OutOfProjectionDomain(DataError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (vertex {index})")
        self.index = index


class AntipodalPoint(OutOfProjectionDomain):
    pass


# standardize


class DictionaryError(DataError):
    pass


class TypeConflict(DataError):
    pass


class NoSuchColumn(DataError):
    pass


class CardinalityTooHigh(DataError):
    pass


# enrich


class NoSamples(DataError):
    pass


class NoPoints(NoSamples):
    pass


class DuplicateSampleLocation(DataError):
    pass


class TooFewSamples(DataError):
    pass


class DegenerateDistances(DataError):
    pass


class SingularSystem(DataError):
    def __init__(self, message: str, cell: int | None = None):
        super().__init__(message if cell is None else f"{message} (cell {cell})")
        self.cell = cell


class NonpositiveBandwidth(DataError):
    pass


class EmptyBoundary(DataError):
    pass


class CrsMismatch(DataError):
    pass


class GeographicCrsError(DataError):
    """Planar distance computations were requested in a geographic CRS."""


# geopackage


class PathExists(IoFailure):
    pass


class DuplicateLayer(DataError):
    pass


class UnsupportedType(DataError):
    pass


class NoSuchLayer(DataError):
    pass


class CorruptGeometryBlob(DataError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class CorruptSidecar(DataError):
    pass


# query


class NotReadOnly(DataError):
    pass


class SqlError(DataError):
    pass


class NlQueryError(DataError):
    pass


class UnparsableQuestion(NlQueryError):
    def __init__(self, message: str, prefix: str = ""):
        super().__init__(f"{message}; understood so far: {prefix!r}" if prefix else message)
        self.prefix = prefix


class UnknownColumn(NlQueryError):
    def __init__(self, name: str, suggestions: list[str]):
        hint = f" (did you mean {', '.join(suggestions)}?)" if suggestions else ""
        super().__init__(f"unknown column {name!r}{hint}")
        self.name = name
        self.suggestions = suggestions


class AmbiguousLayer(NlQueryError):
    def __init__(self, name: str, candidates: list[str]):
        super().__init__(f"layer {name!r} is ambiguous: {', '.join(candidates)}")
        self.name = name
        self.candidates = candidates


class QaTimeout(IoFailure):
    pass


class HttpError(IoFailure):
    def __init__(self, status: int, message: str = ""):
        super().__init__(f"HTTP {status}{': ' + message if message else ''}")
        self.status = status


class MalformedResponse(DataError):
    pass


# pipeline


class ManifestError(DataError):
    pass


class ParseError(ManifestError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class UnknownKey(ManifestError):
    pass


class DanglingReference(ManifestError):
    def __init__(self, step: str, missing: str):
        super().__init__(f"step {step!r} references undeclared layer {missing!r}")
        self.step = step
        self.missing = missing


class StageError(ArgusError):
    """A pipeline stage failed for one input; partial outputs have been removed."""

    def __init__(self, input_id: str, stage: str, cause: BaseException):
        super().__init__(f"{stage} failed for input {input_id!r}: {cause}")
        self.input_id = input_id
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3 if isinstance(cause, OSError) else 2)


class PartialRunArtifactsRemoved(StageError):
    """Raised when a run aborts; the temporary output directory has been deleted."""


class UnknownLicense(DataError):
    pass
