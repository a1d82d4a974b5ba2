"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class QGError(Exception):
    """Base class for errors raised by :mod:`qgrd`."""


class InstanceError(QGError, ValueError):
    """Unknown instance descriptor or parameter out of range."""


class LabelError(QGError, KeyError):
    """A label is not an irreducible corepresentation of the instance."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class CapabilityError(QGError):
    """The instance lacks a capability needed by the operation (e.g. intertwiners)."""


class IntertwinerError(QGError):
    """Numerical intertwiner construction disagrees with the fusion rules."""


class LengthError(QGError, ValueError):
    """Length function undefined on a label, or not validated far enough."""


class GenerationError(LengthError):
    """A generating set does not reach a requested label within the radius."""


class TruncationError(QGError, ValueError):
    """Element support too large for the requested truncation."""


class ConvergenceError(QGError):
    """A numerical procedure did not converge where convergence was demanded."""
