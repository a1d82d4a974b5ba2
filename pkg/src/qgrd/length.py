"""Central length functions and the shell decomposition ``S^n``."""

from __future__ import annotations

import json
import math
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import GenerationError, LengthError
from .instances import Label, QuantumGroupInstance

__all__ = [
    "LengthFunction",
    "ShellDecomposition",
    "Violation",
    "word_length",
    "shells",
    "validate_length",
    "shell_index",
]


def shell_index(value: float) -> int:
    """Shell ``n`` with ``value ∈ (n-1, n]``; zero goes to shell 0."""
    if value <= 0:
        return 0
    return int(math.ceil(value - 1e-12))


@dataclass
class LengthFunction:
    """A length function on the labels of an instance.

    ``values`` holds ``l(α)`` for every label of the ball ``l <= radius``;
    outside that ball the function is undefined here.
    """

    instance: QuantumGroupInstance
    values: dict[Label, float]
    radius: float
    generators: tuple[Label, ...] | None = None

    def __call__(self, label: Label) -> float:
        try:
            return self.values[label]
        except KeyError:
            raise LengthError(f"length undefined on {label!r} (validated radius {self.radius})") from None

    def __contains__(self, label: Label) -> bool:
        return label in self.values

    def sort_key(self, label: Label) -> tuple:
        return (self.values[label], self.instance.sort_key(label))

    def ball(self, radius: float) -> list[Label]:
        """Labels with ``l(α) <= radius`` ordered by ``(length, label)``."""
        if radius > self.radius + 1e-12:
            raise LengthError(f"ball of radius {radius} exceeds validated radius {self.radius}")
        out = [a for a, v in self.values.items() if v <= radius + 1e-12]
        out.sort(key=self.sort_key)
        return out

    def to_json(self) -> str:
        inst = self.instance
        pairs = [[inst.format_label(a), self.values[a]] for a in self.ball(self.radius)]
        return json.dumps(pairs)

    @classmethod
    def from_json(cls, instance: QuantumGroupInstance, text: str, radius: float | None = None) -> LengthFunction:
        """Rebuild from ``[[label, value], ...]``; labels in their textual form."""
        values = {instance.parse_label(str(lab)): float(v) for lab, v in json.loads(text)}
        if radius is None:
            radius = max(values.values(), default=0.0)
        return cls(instance, values, radius)


@dataclass(frozen=True)
class ShellDecomposition:
    """Shells ``S^n = {α : l(α) ∈ (n-1, n]}`` for ``n = 0..n_max`` with aggregates."""

    shells: tuple[tuple[Label, ...], ...]
    count: np.ndarray
    sum_dim2: np.ndarray
    sum_qdim2: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.shells) - 1

    def __getitem__(self, n: int) -> tuple[Label, ...]:
        return self.shells[n]


@dataclass(frozen=True)
class Violation:
    axiom: str
    labels: tuple
    detail: str = ""


def _close_under_conjugation(instance: QuantumGroupInstance, gens: Iterable[Label]) -> list[Label]:
    gens = list(dict.fromkeys(gens))
    closed = list(gens)
    for g in gens:
        c = instance.conj(g)
        if c not in closed:
            closed.append(c)
    if len(closed) != len(gens):
        warnings.warn(
            f"generating set not closed under conjugation; added {closed[len(gens):]!r}",
            stacklevel=3,
        )
    return closed


def word_length(
    instance: QuantumGroupInstance,
    generators: Sequence[Label] | None = None,
    radius: int = 10,
    *,
    require: Iterable[Label] | None = None,
    rng: np.random.Generator | None = None,
) -> LengthFunction:
    """Word length ``l_D`` by breadth-first search over fusion products.

    ``l_D(α)`` is the least ``k`` with ``α ⊂ α_1 ⊗ ... ⊗ α_k``, ``α_j ∈ D``.
    Every label of the radius ball is reached.  Labels in ``require`` must be
    reached, otherwise :class:`GenerationError` is raised.  ``rng`` shuffles
    the frontier order (the result must not depend on it).
    """
    if generators is None:
        generators = instance.canonical_generators()
    gens = list(generators)
    if not gens:
        raise LengthError("generating set is empty")
    for g in gens:
        instance.check_label(g)
        if g == instance.unit:
            raise LengthError("the trivial corepresentation cannot be a generator")
    gens = _close_under_conjugation(instance, gens)
    if radius < 0:
        raise LengthError("radius must be non-negative")

    values: dict[Label, float] = {instance.unit: 0.0}
    frontier = [instance.unit]
    saturated = False
    for k in range(1, int(radius) + 1):
        if rng is not None:
            frontier = [frontier[i] for i in rng.permutation(len(frontier))]
        nxt = []
        for a in frontier:
            for g in gens:
                for c in instance.fuse(a, g):
                    if c not in values:
                        values[c] = float(k)
                        nxt.append(c)
        frontier = nxt
        if not frontier:
            saturated = True
            break

    missing = [a for a in (require or ()) if a not in values]
    if missing:
        why = "saturates" if saturated else "does not reach them"
        raise GenerationError(
            f"D does not generate within radius {radius}: BFS {why}; unreached {missing!r}"
        )
    return LengthFunction(instance, values, float(radius), tuple(gens))


def shells(length: LengthFunction, n_max: int) -> ShellDecomposition:
    """Exact partition of the ball ``l <= n_max`` into shells with aggregates."""
    if n_max > length.radius + 1e-12:
        raise LengthError(f"length validated to {length.radius}, shells requested to {n_max}")
    inst = length.instance
    buckets: list[list[Label]] = [[] for _ in range(n_max + 1)]
    for a in length.ball(n_max):
        buckets[shell_index(length(a))].append(a)
    count = np.array([len(b) for b in buckets], dtype=np.int64)
    sum_dim2 = np.array([sum(inst.dim(a) ** 2 for a in b) for b in buckets], dtype=float)
    sum_qdim2 = np.array([sum(inst.qdim(a) ** 2 for a in b) for b in buckets], dtype=float)
    return ShellDecomposition(tuple(tuple(b) for b in buckets), count, sum_dim2, sum_qdim2)


def validate_length(
    instance: QuantumGroupInstance, length: LengthFunction | dict, radius: float, tol: float = 1e-12
) -> list[Violation]:
    """Check the length-function axioms on the ball of the given radius.

    Returns every violation found; an empty list means the axioms hold on
    the ball (unit, properness, conjugation symmetry, subadditivity).
    """
    values: dict[Any, float] = length.values if isinstance(length, LengthFunction) else dict(length)
    ball = [a for a, v in values.items() if v <= radius + tol]
    report: list[Violation] = []
    unit = instance.unit
    if abs(values.get(unit, math.nan) - 0.0) > tol or unit not in values:
        report.append(Violation("l(ε) = 0", (unit,), f"l(ε) = {values.get(unit)}"))
    for a in ball:
        v = values[a]
        if a != unit and v <= tol:
            report.append(Violation("l(α) = 0 iff α = ε", (a,), f"l = {v}"))
        if v < -tol:
            report.append(Violation("l(α) >= 0", (a,), f"l = {v}"))
        c = instance.conj(a)
        if c not in values:
            report.append(Violation("l(ᾱ) = l(α)", (a, c), "l undefined on conjugate"))
        elif abs(values[c] - v) > tol:
            report.append(Violation("l(ᾱ) = l(α)", (a, c), f"{v} != {values[c]}"))
    for a in ball:
        for b in ball:
            bound = values[a] + values[b]
            for c in instance.fuse(a, b):
                if c in values:
                    if values[c] > bound + tol:
                        report.append(
                            Violation("l(γ) <= l(α) + l(β)", (c, a, b), f"{values[c]} > {bound}")
                        )
                elif bound <= radius + tol:
                    report.append(Violation("l(γ) <= l(α) + l(β)", (c, a, b), "l undefined on γ"))
    return report
