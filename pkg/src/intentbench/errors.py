"""Exception hierarchy.

Every error belongs to one of four categories. The CLI maps the category to
its exit status, so new exceptions should subclass one of them.
"""


class IntentBenchError(Exception):
    exit_code = 1


class ConfigError(IntentBenchError, ValueError):
    exit_code = 2


class DataError(IntentBenchError, ValueError):
    exit_code = 3


class ProviderError(IntentBenchError):
    exit_code = 4


class TrainingError(IntentBenchError):
    exit_code = 5


# -- data ------------------------------------------------------------------

class MalformedRecord(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownLabel(DataError):
    def __init__(self, value, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}unknown intent label {value!r}")
        self.value = value
        self.line = line


class EmptyText(DataError):
    def __init__(self, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}empty text")
        self.line = line


class ClassTooSmall(DataError):
    pass


class BadMix(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimMismatch(DataError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"dimension mismatch: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class DegenerateData(DataError):
    pass


# -- providers -------------------------------------------------------------

class TooLong(ProviderError, ValueError):
    def __init__(self, actual: int, limit: int):
        super().__init__(f"text has {actual} characters, provider limit is {limit}")
        self.actual = actual
        self.limit = limit


class ProviderUnavailable(ProviderError):
    def __init__(self, status, body: str = ""):
        super().__init__(f"provider unavailable (status={status}): {body[:200]}")
        self.status = status
        self.body = body[:200]


class BadResponse(ProviderError):
    pass


class TransportError(ProviderError):
    pass


class UnparseableResponse(ProviderError):
    def __init__(self, raw: str, reason: str = "no JSON object found"):
        super().__init__(f"{reason}: {raw[:120]!r}")
        self.raw = raw


class ExhaustedRetries(ProviderError):
    def __init__(self, attempts: int, last_raw: str):
        super().__init__(f"no parseable verdict after {attempts} attempts; last response {last_raw[:120]!r}")
        self.attempts = attempts
        self.last_raw = last_raw


# -- training --------------------------------------------------------------

class SingleClass(TrainingError, ValueError):
    pass


class KTooLarge(TrainingError, ValueError):
    pass


class ZeroCount(TrainingError, ValueError):
    pass


class FoldTooSmall(TrainingError, ValueError):
    pass


class NonFiniteLoss(TrainingError):
    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


class ShapeMismatch(TrainingError, ValueError):
    pass


class MissingExamples(ConfigError):
    pass
