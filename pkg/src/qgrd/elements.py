"""Finitely supported block families: elements of ``C_c(G)`` and of ``C[G]``.

Both sides store one complex ``dim(α) x dim(α)`` matrix per label.  For
``CcElement`` the matrix is the block ``p_α f``; for ``GroupAlgElement`` it
is the coefficient family ``(a^α_ij)`` of ``Σ a^α_ij u^α_ij``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from typing import Any

import numpy as np

from .errors import QGError
from .instances import Label, QuantumGroupInstance

__all__ = ["CcElement", "GroupAlgElement", "random_blocks"]


class _BlockElement:
    side = ""

    def __init__(self, instance: QuantumGroupInstance, blocks: Mapping[Label, Any] | None = None):
        self.instance = instance
        self.blocks: dict[Label, np.ndarray] = {}
        for label, mat in (blocks or {}).items():
            d = instance.dim(label)
            arr = np.array(mat, dtype=complex)
            if arr.shape != (d, d):
                raise QGError(f"block {label!r} has shape {arr.shape}, expected {(d, d)}")
            self.blocks[label] = arr

    # construction helpers

    @classmethod
    def zero(cls, instance):
        return cls(instance)

    @classmethod
    def unit_block(cls, instance, label, i: int | None = None, j: int | None = None):
        """Identity block at ``label`` or, with ``i, j``, the matrix unit ``e_ij``."""
        d = instance.dim(label)
        mat = np.eye(d, dtype=complex) if i is None else np.zeros((d, d), dtype=complex)
        if i is not None:
            mat[i, j] = 1.0
        return cls(instance, {label: mat})

    # vector-space structure

    def support(self) -> list[Label]:
        return [a for a, m in self.blocks.items() if np.any(m != 0)]

    def block(self, label: Label) -> np.ndarray:
        m = self.blocks.get(label)
        if m is None:
            d = self.instance.dim(label)
            return np.zeros((d, d), dtype=complex)
        return m

    def _check(self, other):
        if type(other) is not type(self) or other.instance is not self.instance:
            raise QGError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        out = {a: m.copy() for a, m in self.blocks.items()}
        for a, m in other.blocks.items():
            out[a] = out[a] + m if a in out else m.copy()
        return type(self)(self.instance, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c):
        if isinstance(c, (int, float, complex, np.number)):
            return type(self)(self.instance, {a: c * m for a, m in self.blocks.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def allclose(self, other, atol: float = 1e-10) -> bool:
        self._check(other)
        for a in set(self.blocks) | set(other.blocks):
            if not np.allclose(self.block(a), other.block(a), atol=atol, rtol=0):
                return False
        return True

    def max_abs_diff(self, other) -> float:
        self._check(other)
        diffs = [np.max(np.abs(self.block(a) - other.block(a))) for a in set(self.blocks) | set(other.blocks)]
        return float(max(diffs, default=0.0))

    # serialization

    def to_dict(self) -> dict[str, Any]:
        inst = self.instance
        labels = sorted(self.blocks, key=inst.sort_key)
        out: dict[str, Any] = {
            "blocks": [
                {
                    "label": inst.format_label(a),
                    "re": self.blocks[a].real.tolist(),
                    "im": self.blocks[a].imag.tolist(),
                }
                for a in labels
            ]
        }
        if self.side:
            out["side"] = self.side
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, instance, data: Mapping[str, Any]):
        side = data.get("side", "")
        if side != cls.side:
            raise QGError(f"expected side {cls.side!r}, got {side!r}")
        blocks = {}
        for b in data["blocks"]:
            blocks[instance.parse_label(str(b["label"]))] = np.asarray(b["re"], float) + 1j * np.asarray(b["im"], float)
        return cls(instance, blocks)

    @classmethod
    def from_json(cls, instance, text: str):
        return cls.from_dict(instance, json.loads(text))

    def __repr__(self):
        return f"{type(self).__name__}({self.instance.name}, support={self.support()!r})"


class CcElement(_BlockElement):
    """Element of ``C_c(G)``, the algebraic direct sum of the matrix blocks."""

    def adjoint(self) -> CcElement:
        return CcElement(self.instance, {a: m.conj().T for a, m in self.blocks.items()})

    def __matmul__(self, other: CcElement) -> CcElement:
        """Blockwise product ``f g``."""
        self._check(other)
        common = [a for a in self.blocks if a in other.blocks]
        return CcElement(self.instance, {a: self.blocks[a] @ other.blocks[a] for a in common})


class GroupAlgElement(_BlockElement):
    """Element ``Σ a^α_ij u^α_ij`` of ``C[G]`` in the matrix-coefficient basis."""

    side = "group_algebra"

    @classmethod
    def one(cls, instance):
        return cls(instance, {instance.unit: np.ones((1, 1))})

    @classmethod
    def coefficient(cls, instance, label, i: int, j: int):
        """The matrix coefficient ``u^label_ij``."""
        return cls.unit_block(instance, label, i, j)


def random_blocks(
    instance: QuantumGroupInstance, labels: Iterable[Label], rng: np.random.Generator
) -> dict[Label, np.ndarray]:
    """Complex Gaussian blocks on the given labels."""
    out = {}
    for a in labels:
        d = instance.dim(a)
        out[a] = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return out
