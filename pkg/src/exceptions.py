"""
Error types for the fusion emotion toolkit.

Every error derives from ``FusionError`` and from the builtin it
refines, so callers that catch ``ValueError`` or ``ArithmeticError``
keep working.
"""

from typing import Optional, Sequence


class FusionError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(FusionError, ValueError):
    """A tensor or array does not have the required shape."""

    def __init__(self, message: str, *shapes: Sequence[int]):
        if shapes:
            rendered = " vs ".join(str(tuple(s)) for s in shapes)
            message = f"{message}: {rendered}"
        super().__init__(message)
        self.shapes = [tuple(s) for s in shapes]


class RangeError(FusionError, ValueError):
    """A scalar argument or label lies outside its allowed range."""


class ContractError(FusionError, ValueError):
    """A caller broke an operation's precondition."""


class InputError(FusionError, ValueError):
    """Input data (audio, embeddings, sample sets) is unusable."""


class ConfigurationError(FusionError, ValueError):
    """The experiment configuration cannot be run."""


class FeatureFormatError(FusionError, ValueError):
    """A feature, manifest or checkpoint file violates its binary format."""

    def __init__(self, message: str, path: Optional[str] = None, offset: Optional[int] = None):
        location = ""
        if path is not None:
            location = f" [{path}"
            if offset is not None:
                location += f" @ byte {offset}"
            location += "]"
        super().__init__(message + location)
        self.path = path
        self.offset = offset


class LabelRangeError(FeatureFormatError, RangeError):
    """A stored label is outside [0, C)."""


class ProbeError(FusionError, ArithmeticError):
    """Finite-difference probing produced a non-finite loss."""

    def __init__(self, parameter: str, index: int):
        super().__init__(f"Non-finite loss while probing {parameter}[{index}]")
        self.parameter = parameter
        self.index = index


class NumericalError(FusionError, ArithmeticError):
    """Training produced a NaN or infinite loss."""

    def __init__(self, epoch: int, batch: int, loss: float, l1: float, l2: float):
        super().__init__(
            f"Non-finite loss at epoch {epoch}, batch {batch}: "
            f"L={loss!r} L1={l1!r} L2={l2!r}"
        )
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        self.l1 = l1
        self.l2 = l2
