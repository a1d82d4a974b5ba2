"""The spectral triple ``(C[G], l²(G), D)`` with ``D ê^α_ij = l(α) ê^α_ij``.

Everything lives on a truncation ``P_M l²(G)``.  Because ``D`` is diagonal
in the GNS basis it commutes with ``P_M``, so compressing first and taking
commutators afterwards gives the same matrices as compressing ``[D, a]``.
Entrywise, ``[D, A]_rc = (l_r - l_c) A_rc``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elements import GroupAlgElement
from .errors import QGError, TruncationError
from .grp_alg import GnsBasis, OpNormResult, RegularRepresentation, op_norm
from .instances import QuantumGroupInstance
from .length import LengthFunction, shell_index, shells
from .report import csv_text

__all__ = [
    "DiracTruncation",
    "dirac",
    "BandDecomposition",
    "commutator_bands",
    "delta_k",
    "delta_k_iterated",
    "twist_vector",
    "twisted_delta",
    "lip_seminorm",
    "lemma_lower_bound",
    "SummabilityReport",
    "summability_partial",
]


@dataclass
class DiracTruncation:
    basis: GnsBasis

    @property
    def M(self) -> float:
        return self.basis.M

    @property
    def diagonal(self) -> np.ndarray:
        return self.basis.lengths

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.basis.lengths)

    def shell_mask(self, n: int) -> np.ndarray:
        """Index mask of the projection ``p_n``."""
        return self.basis.shell == n

    def multiplicities(self) -> dict[float, int]:
        vals, counts = np.unique(self.basis.lengths, return_counts=True)
        return {float(v): int(c) for v, c in zip(vals, counts)}


def dirac(instance: QuantumGroupInstance, length: LengthFunction, M: float) -> DiracTruncation:
    if length.instance is not instance:
        raise QGError("length function belongs to a different instance")
    return DiracTruncation(GnsBasis(length, M))


def _support_degree(a: GroupAlgElement, length: LengthFunction) -> int:
    return max((shell_index(length(x)) for x in a.support()), default=0)


@dataclass
class BandDecomposition:
    """``T_j = Σ_m p_m a p_{m-j}`` on the truncation, for ``|j| <= p``."""

    basis: GnsBasis
    p: int
    bands: dict[int, np.ndarray]

    def total(self) -> np.ndarray:
        return sum(self.bands.values())

    def weighted(self, k: int) -> np.ndarray:
        """``Σ_j j^k T_j``."""
        out = np.zeros((self.basis.size, self.basis.size), dtype=complex)
        for j, t in self.bands.items():
            if j != 0 or k == 0:
                out += float(j) ** k * t
        return out

    def interior(self) -> np.ndarray:
        """Indices of the window ``shell <= M - p``."""
        return self.basis.window(int(math.floor(self.basis.M + 1e-12)) - self.p)


def commutator_bands(a: GroupAlgElement, length: LengthFunction, M: float) -> BandDecomposition:
    """Split the compressed left-regular matrix of ``a`` by shell offset."""
    p = _support_degree(a, length)
    if 2 * p > M + 1e-12:
        raise TruncationError(f"filtration degree {p} needs M >= {2 * p}, got {M}")
    basis = GnsBasis(length, M)
    mat = RegularRepresentation(basis).matrix(a)
    offset = basis.shell[:, None] - basis.shell[None, :]
    bands = {j: np.where(offset == j, mat, 0) for j in range(-p, p + 1)}
    leftover = np.abs(mat[np.abs(offset) > p])
    if leftover.size and leftover.max() > 1e-12 * max(1.0, np.abs(mat).max()):
        raise QGError("left multiplication couples shells further apart than the filtration degree")
    return BandDecomposition(basis, p, bands)


def delta_k(a: GroupAlgElement, k: int, length: LengthFunction, M: float) -> np.ndarray:
    """``δ^k(a) = Σ_j j^k T_j`` on the truncation."""
    if k < 0:
        raise QGError("k must be non-negative")
    return commutator_bands(a, length, M).weighted(k)


def delta_k_iterated(a: GroupAlgElement, k: int, length: LengthFunction, M: float) -> np.ndarray:
    """``δ^k(a)`` as ``k`` nested matrix commutators with the Dirac truncation."""
    basis = GnsBasis(length, M)
    x = RegularRepresentation(basis).matrix(a)
    d = basis.lengths
    for _ in range(k):
        # D X - X D with D diagonal
        x = d[:, None] * x - x * d[None, :]
    return x


def twist_vector(basis: GnsBasis) -> np.ndarray:
    """Diagonal of ``T^k = C^{1/2}`` in the GNS basis.

    ``C`` acts on ``Λ̂(u^α_ij)`` through the row index ``i`` with eigenvalue
    ``(dim_q(α)/dim(α)) F^α_ii``.
    """
    inst = basis.instance
    out = np.empty(basis.size)
    for a in basis.labels:
        info = inst.irrep(a)
        sl = basis.slice(a)
        out[sl] = np.sqrt(info.qdim / info.dim * info.f[basis.row[sl]])
    return out


def _delta_from_matrix(mat: np.ndarray, basis: GnsBasis, k: int) -> np.ndarray:
    diff = basis.lengths[:, None] - basis.lengths[None, :]
    return diff**k * mat


def twisted_delta(mat: np.ndarray, basis: GnsBasis, k: int, twisted: bool = True) -> np.ndarray:
    """``T^k δ^k(a) T^k`` from the compressed left-regular matrix of ``a``."""
    out = _delta_from_matrix(mat, basis, k)
    if twisted:
        t = twist_vector(basis)
        out = t[:, None] * out * t[None, :]
    return out


def lip_seminorm(
    a: GroupAlgElement,
    k: int,
    length: LengthFunction,
    M: float | None = None,
    tol: float = 1e-6,
    M_max: float | None = None,
    *,
    twisted: bool = True,
) -> OpNormResult:
    """``L^k_T(a) = ‖T^k δ^k(a) T^k‖`` (``L^k`` with ``twisted=False``).

    Evaluated with :func:`op_norm` semantics: a lower bound from growing
    truncations, flagged converged once successive values agree to ``tol``.
    """
    if k < 1:
        raise QGError("k must be at least 1")
    return op_norm(
        a,
        length,
        M0=M,
        tol=tol,
        M_max=M_max,
        transform=lambda mat, basis: twisted_delta(mat, basis, k, twisted),
    )


def lemma_lower_bound(a: GroupAlgElement, length: LengthFunction, k: int) -> float:
    """``Σ_{α,i,j} dim(α)^{-1} l(α)^{2k} |a^α_ij|²``, a lower bound for ``L^k_T(a)²``."""
    total = 0.0
    for lab, m in a.blocks.items():
        total += length(lab) ** (2 * k) * float(np.sum(np.abs(m) ** 2)) / a.instance.dim(lab)
    return total


@dataclass
class SummabilityReport:
    """Partial sums ``Σ_{0 < l(α) <= n} dim(α)² l(α)^{-p}`` with a verdict.

    ``verdict`` comes from the log-log slope of the per-shell terms over the
    last half of the shells: below ``-1.1`` convergent, above ``-0.9`` (or
    increasing terms) divergent, otherwise inconclusive.
    """

    p: float
    n: np.ndarray
    terms: np.ndarray
    partial: np.ndarray
    tail_slope: float
    verdict: str
    threshold: float | None = None  # 2s + 1 when an s estimate is supplied

    @property
    def final(self) -> float:
        return float(self.partial[-1])

    @property
    def above_threshold(self) -> bool | None:
        return None if self.threshold is None else self.p > self.threshold

    def to_csv(self, comments=()) -> str:
        return csv_text(["n", "term", "partial_sum"], zip(self.n, self.terms, self.partial), comments)


def summability_partial(
    instance: QuantumGroupInstance,
    length: LengthFunction,
    p: float,
    N: int,
    s: float | None = None,
) -> SummabilityReport:
    if p <= 0:
        raise QGError("p must be positive")
    if length.instance is not instance:
        raise QGError("length function belongs to a different instance")
    sh = shells(length, N)
    terms = np.zeros(N + 1)
    for n in range(1, N + 1):
        # sums of large integers: keep them exact until the final division
        terms[n] = float(sum(instance.dim(a) ** 2 * length(a) ** (-p) for a in sh[n]))
    partial = np.cumsum(terms)
    ns = np.arange(N + 1)
    sel = (ns >= max(1, N // 2)) & (terms > 0)
    if sel.sum() >= 2:
        slope = float(np.polyfit(np.log(ns[sel]), np.log(terms[sel]), 1)[0])
    else:
        slope = math.nan
    if math.isnan(slope):
        verdict = "inconclusive"
    elif slope < -1.1:
        verdict = "convergent"
    elif slope > -0.9:
        verdict = "divergent"
    else:
        verdict = "inconclusive"
    threshold = None if s is None else 2 * s + 1
    return SummabilityReport(float(p), ns, terms, partial, slope, verdict, threshold)
