"""Representation-category data for concrete discrete quantum groups.

Four families are provided, all described by their irreducible
corepresentations, fusion rules and modular matrices:

* duals of free abelian groups ``Z^d`` (labels: ``int`` for ``d == 1``,
  ``tuple[int, ...]`` otherwise),
* duals of free groups ``F_k`` (labels: reduced words, tuples of nonzero
  ints in ``±1..±k``; the empty word is the unit),
* duals of ``SU_q(2)`` (labels: ``n >= 0`` in the doubled-spin convention,
  ``dim = n + 1``),
* duals of the free orthogonal quantum groups ``O_N^+`` (labels ``k >= 0``;
  fusion data only, no intertwiners).

Intertwiner isometries are computed numerically for every family except
``O_N^+``. For ``SU_q(2)`` they come from the spin ``n/2`` modules of
``U_q(su_2)`` with the symmetric coproduct

    Δ(E) = E ⊗ K^{1/2} + K^{-1/2} ⊗ E,    Δ(F) = F ⊗ K^{1/2} + K^{-1/2} ⊗ F,

in the weight basis ``e_0, ..., e_n`` (``e_0`` of highest weight). In that
basis the modular matrix is ``F^n = diag(q^n, q^{n-2}, ..., q^{-n})`` and
the matrix ``(u^n_ij)`` is unitary in the regular representation.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from collections import Counter
from collections.abc import Hashable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import CapabilityError, InstanceError, IntertwinerError, LabelError

Label = Hashable

__all__ = [
    "IrrepInfo",
    "QuantumGroupInstance",
    "ZdDual",
    "FreeGroupDual",
    "SUq2Dual",
    "ONPlusDual",
    "build_instance",
    "q_integer",
]

_INTERTWINER_TOL = 1e-10


def q_integer(n: int, q: float) -> float:
    """Symmetric q-integer ``[n]_q = (q^n - q^-n) / (q - q^-1)``, equal to ``n`` at ``q = 1``."""
    if q == 1.0:
        return float(n)
    return (q**n - q ** (-n)) / (q - 1.0 / q)


class ConstantDiagonal(Sequence):
    """Read-only sequence of ``length`` copies of ``value``.

    Stands in for ``f_diag`` on unimodular blocks whose dimension is far too
    large to materialize (O_N^+ dimensions grow exponentially).
    """

    __slots__ = ("length", "value")

    def __init__(self, length: int, value: float = 1.0):
        self.length = int(length)
        self.value = float(value)

    def __len__(self):
        return self.length

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self.value] * len(range(*i.indices(self.length)))
        if not -self.length <= i < self.length:
            raise IndexError(i)
        return self.value

    def __eq__(self, other):
        if isinstance(other, ConstantDiagonal):
            return (self.length, self.value) == (other.length, other.value)
        return NotImplemented

    def __hash__(self):
        return hash((self.length, self.value))

    def __repr__(self):
        return f"ConstantDiagonal({self.length}, {self.value})"


@dataclass(frozen=True)
class IrrepInfo:
    """One irreducible corepresentation.

    ``f_diag`` is the diagonal of the modular matrix ``F^α`` in the fixed
    basis of the representation space.
    """

    label: Label
    dim: int
    qdim: float
    f_diag: tuple[float, ...]
    conj: Label

    @property
    def f(self) -> np.ndarray:
        if isinstance(self.f_diag, ConstantDiagonal):
            return np.full(self.f_diag.length, self.f_diag.value)
        return np.asarray(self.f_diag, dtype=float)

    def f_power_sum(self, power: float) -> float:
        """``Σ_i f_i^power`` without materializing constant diagonals."""
        if isinstance(self.f_diag, ConstantDiagonal):
            return self.f_diag.length * self.f_diag.value**power
        return float(np.sum(self.f ** power))


class QuantumGroupInstance(ABC):
    """Capability provider for one discrete quantum group.

    Subclasses supply labels, dimensions, modular data and fusion rules.
    Fusion results and intertwiners are memoized; cache population is
    idempotent, so concurrent readers may at worst duplicate work.
    """

    kind: str = ""
    has_intertwiners: bool = True

    def __init__(self, params: Mapping[str, Any], *, unimodular: bool, amenable: bool):
        self.params = dict(params)
        self.unimodular = unimodular
        self.amenable = amenable
        self._irreps: dict[Label, IrrepInfo] = {}
        self._fusion: dict[tuple[Label, Label], Counter] = {}
        self._intertwiners: dict[tuple[Label, Label], list[tuple[Label, np.ndarray]]] = {}

    # -- label data supplied by subclasses ---------------------------------

    @property
    @abstractmethod
    def unit(self) -> Label:
        """Label of the trivial corepresentation ε."""

    @abstractmethod
    def is_label(self, label: Any) -> bool: ...

    @abstractmethod
    def canonical_generators(self) -> list[Label]:
        """A finite, conjugation-closed generating set."""

    @abstractmethod
    def _make_irrep(self, label: Label) -> IrrepInfo: ...

    @abstractmethod
    def _fuse(self, a: Label, b: Label) -> Counter: ...

    def _intertwiner_list(self, a: Label, b: Label) -> list[tuple[Label, np.ndarray]]:
        raise CapabilityError(f"{self.name} has no intertwiner capability")

    def sort_key(self, label: Label) -> Any:
        return label

    def parse_label(self, text: str) -> Label:
        """Parse a label from its textual form (as used on the command line)."""
        value = int(text)
        self.check_label(value)
        return value

    def format_label(self, label: Label) -> str:
        return str(label)

    # -- public API ---------------------------------------------------------

    @property
    def name(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"

    def descriptor(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.params}

    def check_label(self, label: Any) -> None:
        if not self.is_label(label):
            raise LabelError(f"{label!r} is not an irreducible corepresentation of {self.name}")

    def irrep(self, label: Label) -> IrrepInfo:
        info = self._irreps.get(label)
        if info is None:
            self.check_label(label)
            info = self._make_irrep(label)
            self._irreps[label] = info
        return info

    def dim(self, label: Label) -> int:
        return self.irrep(label).dim

    def qdim(self, label: Label) -> float:
        return self.irrep(label).qdim

    def conj(self, label: Label) -> Label:
        return self.irrep(label).conj

    def fuse(self, a: Label, b: Label) -> Counter:
        """Multiset ``{γ: N^γ_ab}`` of irreducibles in ``a ⊗ b``."""
        key = (a, b)
        out = self._fusion.get(key)
        if out is None:
            self.check_label(a)
            self.check_label(b)
            out = self._fuse(a, b)
            self._fusion[key] = out
        return out

    def intertwiners(self, a: Label, b: Label) -> list[tuple[Label, np.ndarray]]:
        """Isometries ``V: H_γ -> H_a ⊗ H_b``, one per multiplicity copy.

        Each ``V`` has shape ``(dim a * dim b, dim γ)`` with row index
        ``i * dim(b) + k`` for ``e_i ⊗ e_k``.  The phase of each copy is
        fixed so that the first nonzero entry of its first column is real
        positive.
        """
        if not self.has_intertwiners:
            raise CapabilityError(f"{self.name} has no intertwiner capability")
        key = (a, b)
        out = self._intertwiners.get(key)
        if out is None:
            self.check_label(a)
            self.check_label(b)
            out = self._intertwiner_list(a, b)
            found = Counter(g for g, _ in out)
            if found != self.fuse(a, b):
                raise IntertwinerError(
                    f"intertwiners for ({a!r}, {b!r}) give {dict(found)}, "
                    f"fusion rules give {dict(self.fuse(a, b))}"
                )
            self._intertwiners[key] = out
        return out

    def enumerate_irreps(self, radius: int) -> Iterator[Label]:
        """Labels in order of fusion-graph distance from ε (canonical generators)."""
        seen = {self.unit}
        frontier = [self.unit]
        yield self.unit
        gens = self.canonical_generators()
        for _ in range(radius):
            nxt = []
            for a in frontier:
                for g in gens:
                    for c in self.fuse(a, g):
                        if c not in seen:
                            seen.add(c)
                            nxt.append(c)
            nxt.sort(key=self.sort_key)
            yield from nxt
            frontier = nxt
            if not frontier:
                return

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


# -- abelian and free groups --------------------------------------------------


class _OneDimensional(QuantumGroupInstance):
    """Duals of discrete groups: every irrep is a one-dimensional character."""

    @abstractmethod
    def multiply(self, a: Label, b: Label) -> Label: ...

    @abstractmethod
    def inverse(self, a: Label) -> Label: ...

    def _make_irrep(self, label):
        return IrrepInfo(label, 1, 1.0, (1.0,), self.inverse(label))

    def _fuse(self, a, b):
        return Counter({self.multiply(a, b): 1})

    def _intertwiner_list(self, a, b):
        return [(self.multiply(a, b), np.ones((1, 1)))]


class ZdDual(_OneDimensional):
    kind = "z_d"

    def __init__(self, d: int = 1):
        if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
            raise InstanceError(f"z_d needs an integer d >= 1, got {d!r}")
        super().__init__({"d": int(d)}, unimodular=True, amenable=True)
        self.d = int(d)

    @property
    def unit(self):
        return 0 if self.d == 1 else (0,) * self.d

    def is_label(self, label):
        if self.d == 1:
            return isinstance(label, (int, np.integer)) and not isinstance(label, bool)
        return (
            isinstance(label, tuple)
            and len(label) == self.d
            and all(isinstance(x, (int, np.integer)) and not isinstance(x, bool) for x in label)
        )

    def multiply(self, a, b):
        if self.d == 1:
            return int(a) + int(b)
        return tuple(int(x) + int(y) for x, y in zip(a, b))

    def inverse(self, a):
        return -int(a) if self.d == 1 else tuple(-int(x) for x in a)

    def canonical_generators(self):
        if self.d == 1:
            return [1, -1]
        gens = []
        for i in range(self.d):
            for s in (1, -1):
                e = [0] * self.d
                e[i] = s
                gens.append(tuple(e))
        return gens

    def parse_label(self, text):
        if self.d == 1:
            return super().parse_label(text)
        label = tuple(int(t) for t in text.split(","))
        self.check_label(label)
        return label

    def format_label(self, label):
        return str(label) if self.d == 1 else ",".join(str(x) for x in label)


class FreeGroupDual(_OneDimensional):
    kind = "free_group"

    def __init__(self, k: int = 2):
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
            raise InstanceError(f"free_group needs an integer k >= 1, got {k!r}")
        super().__init__({"k": int(k)}, unimodular=True, amenable=(int(k) == 1))
        self.k = int(k)

    @property
    def unit(self):
        return ()

    def is_label(self, label):
        if not isinstance(label, tuple):
            return False
        for i, x in enumerate(label):
            if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
                return False
            if x == 0 or abs(x) > self.k:
                return False
            if i and label[i - 1] == -x:
                return False
        return True

    def multiply(self, a, b):
        out = list(a)
        for x in b:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(int(x))
        return tuple(out)

    def inverse(self, a):
        return tuple(-x for x in reversed(a))

    def canonical_generators(self):
        return [(s * i,) for i in range(1, self.k + 1) for s in (1, -1)]

    def sort_key(self, label):
        return (len(label), label)

    def parse_label(self, text):
        # words as dot-separated letters, "e" for the unit: "1.-2.1"
        text = text.strip()
        label = () if text in ("", "e") else tuple(int(t) for t in text.split("."))
        self.check_label(label)
        return label

    def format_label(self, label):
        return ".".join(str(x) for x in label) if label else "e"


# -- SU_q(2) --------------------------------------------------------------------


def _spin_operators(n: int, q: float) -> tuple[np.ndarray, np.ndarray]:
    """``K^{1/2}`` (diagonal entries) and ``E`` on the spin ``n/2`` module."""
    j = np.arange(n + 1)
    khalf = q ** ((n - 2 * j) / 2.0)
    e = np.zeros((n + 1, n + 1))
    for col in range(1, n + 1):
        e[col - 1, col] = math.sqrt(q_integer(col, q) * q_integer(n - col + 1, q))
    return khalf, e


class SUq2Dual(QuantumGroupInstance):
    kind = "su_q_2"

    def __init__(self, q: float = 0.5):
        try:
            qf = float(q)
        except (TypeError, ValueError):
            raise InstanceError(f"su_q_2 needs a real q, got {q!r}") from None
        if not (0.0 < qf <= 1.0) or math.isnan(qf):
            raise InstanceError(f"su_q_2 needs q in (0, 1], got {q!r}")
        super().__init__({"q": qf}, unimodular=(qf == 1.0), amenable=True)
        self.q = qf
        self._ops: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def unit(self):
        return 0

    def is_label(self, label):
        return isinstance(label, (int, np.integer)) and not isinstance(label, bool) and label >= 0

    def canonical_generators(self):
        return [1]

    def _make_irrep(self, n):
        n = int(n)
        f = tuple(self.q ** (n - 2 * j) for j in range(n + 1))
        return IrrepInfo(n, n + 1, q_integer(n + 1, self.q), f, n)

    def _fuse(self, a, b):
        return Counter({c: 1 for c in range(abs(a - b), a + b + 1, 2)})

    def _operators(self, n):
        ops = self._ops.get(n)
        if ops is None:
            ops = _spin_operators(n, self.q)
            self._ops[n] = ops
        return ops

    def _intertwiner_list(self, a, b):
        ka, ea = self._operators(a)
        kb, eb = self._operators(b)
        # Δ(E) = E ⊗ K^{1/2} + K^{-1/2} ⊗ E; Δ(F) is its transpose
        delta_e = np.kron(ea, np.diag(kb)) + np.kron(np.diag(1.0 / ka), eb)
        delta_f = delta_e.T
        ia, ib = np.meshgrid(np.arange(a + 1), np.arange(b + 1), indexing="ij")
        weights = ((a - 2 * ia) + (b - 2 * ib)).ravel()
        out = []
        for m in range(abs(a - b), a + b + 1, 2):
            idx = np.flatnonzero(weights == m)
            # highest weight vector: kernel of Δ(E) on the weight-m space
            _, sing, vt = np.linalg.svd(delta_e[:, idx])
            rank = int(np.sum(sing > _INTERTWINER_TOL * max(1.0, sing[0] if sing.size else 1.0)))
            if len(idx) - rank != 1:
                raise IntertwinerError(
                    f"highest weight space of weight {m} in {a}⊗{b} has dimension {len(idx) - rank}"
                )
            top = np.zeros(weights.size)
            top[idx] = vt[-1]
            top /= np.linalg.norm(top)
            first = np.flatnonzero(np.abs(top) > _INTERTWINER_TOL)[0]
            if top[first] < 0:
                top = -top
            cols = np.empty((weights.size, m + 1))
            cols[:, 0] = top
            for j in range(m):
                w = delta_f @ cols[:, j]
                cols[:, j + 1] = w / np.linalg.norm(w)
            out.append((m, cols))
        return out


# -- O_N^+ ----------------------------------------------------------------------


class ONPlusDual(QuantumGroupInstance):
    kind = "o_n_plus"
    has_intertwiners = False

    def __init__(self, N: int = 3):
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 2:
            raise InstanceError(f"o_n_plus needs an integer N >= 2, got {N!r}")
        super().__init__({"N": int(N)}, unimodular=True, amenable=(int(N) == 2))
        self.N = int(N)
        self._dims = [1, self.N]

    @property
    def unit(self):
        return 0

    def is_label(self, label):
        return isinstance(label, (int, np.integer)) and not isinstance(label, bool) and label >= 0

    def canonical_generators(self):
        return [1]

    def _dim(self, k: int) -> int:
        while len(self._dims) <= k:
            self._dims.append(self.N * self._dims[-1] - self._dims[-2])
        return self._dims[k]

    def _make_irrep(self, k):
        k = int(k)
        d = self._dim(k)
        return IrrepInfo(k, d, float(d), ConstantDiagonal(d), k)

    def _fuse(self, a, b):
        return Counter({c: 1 for c in range(abs(a - b), a + b + 1, 2)})


# -- construction -------------------------------------------------------------

_KINDS = {
    "z_d": (ZdDual, ("d",)),
    "free_group": (FreeGroupDual, ("k",)),
    "su_q_2": (SUq2Dual, ("q",)),
    "o_n_plus": (ONPlusDual, ("N",)),
}
_DESCRIPTOR_KEYS = {"kind", "q", "d", "k", "N"}


def build_instance(descriptor: Mapping[str, Any] | str) -> QuantumGroupInstance:
    """Build an instance from a descriptor mapping or its JSON text.

    >>> build_instance({"kind": "su_q_2", "q": 0.5}).qdim(1)
    2.5
    """
    if isinstance(descriptor, str):
        try:
            descriptor = json.loads(descriptor)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"instance descriptor is not valid JSON: {exc}") from None
    if not isinstance(descriptor, Mapping):
        raise InstanceError("instance descriptor must be a JSON object")
    unknown = set(descriptor) - _DESCRIPTOR_KEYS
    if unknown:
        raise InstanceError(f"unknown descriptor keys: {sorted(unknown)}")
    kind = descriptor.get("kind")
    if kind not in _KINDS:
        raise InstanceError(f"unknown instance kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls, keys = _KINDS[kind]
    kwargs = {key: descriptor[key] for key in keys if key in descriptor}
    return cls(**kwargs)
