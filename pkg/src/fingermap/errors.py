"""Exception types shared across the package."""


class FingermapError(Exception):
    """Base class for all errors raised by this package."""


class NoIntersection(FingermapError):
    """A forward ray missed the sphere it was cast against."""


class MissingJoint(FingermapError):
    """A hand frame lacks a joint required by the active operation."""

    def __init__(self, joint: str, side: str = ""):
        self.joint = joint
        self.side = side
        where = f" ({side} hand)" if side else ""
        super().__init__(f"missing joint '{joint}'{where}")


class NonMonotonicTime(FingermapError):
    """Timestamps went backwards (filter step or trace line)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DegenerateTarget(FingermapError):
    """IK target coincides with the shoulder; direction undefined."""


class MalformedHeader(FingermapError):
    """Trace file header line is missing or not valid."""


class MalformedFrame(FingermapError):
    """A trace body line could not be parsed into a frame."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyTrace(FingermapError):
    """Operation needs samples but the trace has none (or too few)."""


class InfeasibleClass(FingermapError):
    """A distance class has no target pairs to draw tasks from."""


class ProtocolError(FingermapError):
    """Session protocol violation (bad message kind, order, or payload)."""
