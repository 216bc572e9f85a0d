"""
Structured error handling for the obedience harness.

Every failure raised by the library is an ``ObedienceError`` carrying an
``ErrorCode``, the ``ErrorSource`` that produced it and free-form metadata,
so the CLI and the result store can report failures uniformly.
"""

from enum import Enum
from datetime import datetime
from typing import Any, Dict, List, Optional


class ErrorCode(Enum):
    """Structured error codes."""

    # Contract / input errors
    CONTRACT_VIOLATION = "contract_violation"
    INVALID_PARAMETER = "invalid_parameter"
    MISSING_PARAMETER = "missing_parameter"

    # Numerical errors
    NOT_NORMALIZED = "not_normalized"
    OUTCOME_MISMATCH = "outcome_mismatch"
    DEGENERATE_TRACE = "degenerate_trace"

    # Backend errors
    BACKEND_UNAVAILABLE = "backend_unavailable"
    TIMEOUT = "timeout"
    RATE_LIMITED = "rate_limited"
    SERVER_ERROR = "server_error"
    CAPABILITY_MISSING = "capability_missing"
    PROTOCOL_VIOLATION = "protocol_violation"
    EMPTY_GENERATION = "empty_generation"

    # Prompt errors
    RENDER_FAILED = "render_failed"

    # Dataset errors
    MALFORMED_RECORD = "malformed_record"
    DUPLICATE_ID = "duplicate_id"

    # Storage / report errors
    STORAGE_ERROR = "storage_error"


class ErrorSource(Enum):
    """Sources where errors can originate."""

    PROB = "prob"
    TRACE = "trace"
    BACKEND = "backend"
    PROMPT = "prompt"
    DATASET = "dataset"
    RECALIBRATION = "recalibration"
    PIPELINE = "pipeline"
    REPORT = "report"
    CONFIG = "config"


_RETRYABLE = {
    ErrorCode.BACKEND_UNAVAILABLE,
    ErrorCode.TIMEOUT,
    ErrorCode.RATE_LIMITED,
    ErrorCode.SERVER_ERROR,
}


class ObedienceError(Exception):
    """
    Base exception class for all harness errors.

    Provides a structured error code, the originating source, optional
    metadata and the wrapped cause.
    """

    def __init__(
        self,
        code: ErrorCode,
        message: str,
        source: ErrorSource = ErrorSource.PIPELINE,
        cause: Optional[BaseException] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        self.code = code
        self.message = message
        self.source = source
        self.cause = cause
        self.metadata = dict(metadata or {})
        self.timestamp = datetime.now()
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary representation."""
        result: Dict[str, Any] = {
            "error": self.code.value,
            "error_description": self.message,
            "error_source": self.source.value,
        }
        if self.metadata:
            result["metadata"] = self.metadata
        if self.cause is not None:
            result["caused_by"] = str(self.cause)
        return result

    def is_retryable(self) -> bool:
        """Check if this error might be resolved by retrying."""
        return self.code in _RETRYABLE


class ContractError(ObedienceError):
    """A precondition of an operation was violated."""

    def __init__(self, message: str, source: ErrorSource = ErrorSource.PIPELINE, **kwargs: Any):
        super().__init__(ErrorCode.CONTRACT_VIOLATION, message, source=source, **kwargs)


class AlignmentError(ObedienceError):
    """Distributions or traces do not share an outcome space."""

    def __init__(self, message: str, source: ErrorSource = ErrorSource.PROB, **kwargs: Any):
        super().__init__(ErrorCode.OUTCOME_MISMATCH, message, source=source, **kwargs)


class DegenerateTraceError(ObedienceError):
    """The forced answer is unreachable under a prompt condition."""

    def __init__(self, message: str, step: Optional[int] = None, **kwargs: Any):
        metadata = kwargs.pop("metadata", {})
        if step is not None:
            metadata["step"] = step
        super().__init__(
            ErrorCode.DEGENERATE_TRACE, message, source=ErrorSource.TRACE, metadata=metadata, **kwargs
        )


class BackendError(ObedienceError):
    """Transport or server failure talking to a completion backend."""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.BACKEND_UNAVAILABLE, **kwargs: Any):
        super().__init__(code, message, source=ErrorSource.BACKEND, **kwargs)


class CapabilityError(BackendError):
    """The endpoint cannot return teacher-forced (echoed) logprobs."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, code=ErrorCode.CAPABILITY_MISSING, **kwargs)


class ProtocolError(BackendError):
    """The endpoint answered with a payload that violates the wire contract."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(message, code=ErrorCode.PROTOCOL_VIOLATION, **kwargs)


class EmptyGenerationError(BackendError):
    """A greedy generation produced no text."""

    def __init__(self, message: str = "Backend returned an empty completion", **kwargs: Any):
        super().__init__(message, code=ErrorCode.EMPTY_GENERATION, **kwargs)


class RenderError(ObedienceError):
    """A prompt template could not be rendered."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(ErrorCode.RENDER_FAILED, message, source=ErrorSource.PROMPT, **kwargs)


class DatasetError(ObedienceError):
    """A dataset file contains an invalid record."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        code: ErrorCode = ErrorCode.MALFORMED_RECORD,
        **kwargs: Any,
    ):
        metadata = kwargs.pop("metadata", {})
        if line is not None:
            metadata["line"] = line
            message = f"line {line}: {message}"
        self.line = line
        super().__init__(code, message, source=ErrorSource.DATASET, metadata=metadata, **kwargs)


class RecalibrationError(ObedienceError):
    """Fitting or applying a recalibration map failed."""

    def __init__(self, message: str, **kwargs: Any):
        super().__init__(
            ErrorCode.CONTRACT_VIOLATION, message, source=ErrorSource.RECALIBRATION, **kwargs
        )


class ReportError(ObedienceError):
    """Emitting or reading a report artifact failed."""

    def __init__(self, message: str, path: Optional[str] = None, **kwargs: Any):
        metadata = kwargs.pop("metadata", {})
        if path is not None:
            metadata["path"] = str(path)
            message = f"{path}: {message}"
        super().__init__(
            ErrorCode.STORAGE_ERROR, message, source=ErrorSource.REPORT, metadata=metadata, **kwargs
        )


class ErrorCollection:
    """Collection of errors gathered without aborting a run."""

    def __init__(self) -> None:
        self.errors: List[ObedienceError] = []

    def add(self, error: ObedienceError) -> None:
        """Add an error to the collection."""
        self.errors.append(error)

    def has_errors(self) -> bool:
        """Check if collection has any errors."""
        return len(self.errors) > 0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "errors": [error.to_dict() for error in self.errors],
            "error_count": len(self.errors),
        }


__all__ = [
    "ErrorCode",
    "ErrorSource",
    "ObedienceError",
    "ContractError",
    "AlignmentError",
    "DegenerateTraceError",
    "BackendError",
    "CapabilityError",
    "ProtocolError",
    "EmptyGenerationError",
    "RenderError",
    "DatasetError",
    "RecalibrationError",
    "ReportError",
    "ErrorCollection",
]
