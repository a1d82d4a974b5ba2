"""Harmonic analysis on finitely generated discrete quantum groups.

Haar weights and the Fourier transform, Sobolev norms, word-length Dirac
operators, twisted Lipschitz seminorms and numerical tests of rapid decay.
"""

from .errors import (
    CapabilityError,
    ConvergenceError,
    GenerationError,
    InstanceError,
    IntertwinerError,
    LabelError,
    LengthError,
    QGError,
    TruncationError,
)
from .instances import (
    FreeGroupDual,
    IrrepInfo,
    ONPlusDual,
    QuantumGroupInstance,
    SUq2Dual,
    ZdDual,
    build_instance,
    q_integer,
)
from .length import LengthFunction, ShellDecomposition, shells, validate_length, word_length
from .elements import CcElement, GroupAlgElement

__version__ = "0.1.0"

__all__ = [
    "CapabilityError",
    "ConvergenceError",
    "GenerationError",
    "InstanceError",
    "IntertwinerError",
    "LabelError",
    "LengthError",
    "QGError",
    "TruncationError",
    "FreeGroupDual",
    "IrrepInfo",
    "ONPlusDual",
    "QuantumGroupInstance",
    "SUq2Dual",
    "ZdDual",
    "build_instance",
    "q_integer",
    "LengthFunction",
    "ShellDecomposition",
    "shells",
    "validate_length",
    "word_length",
    "CcElement",
    "GroupAlgElement",
    "__version__",
]
