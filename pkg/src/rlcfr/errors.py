"""Typed errors with stable codes, shared across the package."""


class EngineError(Exception):
    """Base class; `code` is the stable identifier tests match on."""

    code = "ENGINE_ERROR"

    def __init__(self, message=""):
        super().__init__(message or self.code)


class TerminalStateError(EngineError):
    code = "TERMINAL_STATE"


class IllegalActionError(EngineError):
    code = "ILLEGAL_ACTION"


class NotTerminalError(EngineError):
    code = "NOT_TERMINAL"


class NotChanceError(EngineError):
    code = "NOT_CHANCE"


class EmptyActionsError(EngineError):
    code = "EMPTY_ACTIONS"


class LeafEvalFailedError(EngineError):
    code = "LEAF_EVAL_FAILED"


class IncompleteProfileError(EngineError):
    code = "INCOMPLETE_PROFILE"


class IllegalAbstractionError(EngineError):
    code = "ILLEGAL_ABSTRACTION"


class ZeroReachError(EngineError):
    code = "ZERO_REACH"


class NotDecisionPbsError(EngineError):
    code = "NOT_DECISION_PBS"


class DimMismatchError(EngineError):
    code = "DIM_MISMATCH"


class NonFiniteGradError(EngineError):
    code = "NONFINITE_GRAD"


class CorruptCheckpointError(EngineError):
    code = "CORRUPT_CHECKPOINT"


class SpecMismatchError(EngineError):
    code = "SPEC_MISMATCH"


class EmptyAbstractionError(EngineError):
    code = "EMPTY_ABSTRACTION"


class CorruptLogError(EngineError):
    code = "CORRUPT_LOG"


class ConfigError(EngineError):
    code = "CONFIG_ERROR"
