"""Group-algebra side: Haar state, Schur inner products, multiplication via
intertwiners, the GNS basis of ``l²(G)`` and truncated left-regular matrices.

Operator norms are computed on truncations ``P_M l²(G)`` spanned by the
coefficients of labels with ``l(α) <= M``.  Compressions of an operator to
a growing chain of subspaces have non-decreasing norms, so every reported
value is a lower bound for the norm on ``l²(G)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigvalsh
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .elements import GroupAlgElement
from .errors import QGError, TruncationError
from .instances import Label, QuantumGroupInstance
from .length import LengthFunction, shell_index

__all__ = [
    "haar_state",
    "inner_product",
    "multiply",
    "adjoint",
    "GnsBasis",
    "RegularRepresentation",
    "left_regular_matrix",
    "spectral_norm",
    "OpNormResult",
    "op_norm",
    "sobolev_norm_cg",
    "coefficient_norms",
]

# dense SVD below this block size, top eigenvalue of the Gram matrix above
_DENSE_LIMIT = 500


def coefficient_norms(instance: QuantumGroupInstance, label: Label) -> np.ndarray:
    """``‖Λ̂(u^α_ij)‖ = (F^α)^{-1/2}_ii / dim_q(α)^{1/2}``, indexed by ``i``."""
    info = instance.irrep(label)
    return 1.0 / np.sqrt(info.f * info.qdim)


def haar_state(x: GroupAlgElement) -> complex:
    """``φ̂(x)``: the coefficient of the unit."""
    return complex(x.block(x.instance.unit)[0, 0])


def inner_product(x: GroupAlgElement, y: GroupAlgElement) -> complex:
    """``<x, y> = φ̂(x^* y)`` from the Schur orthogonality relations
    ``φ̂((u^α_ij)^* u^β_kl) = δ_αβ δ_ik δ_jl (F^α)^{-1}_ii / dim_q(α)``."""
    x._check(y)
    total = 0j
    for a, m in x.blocks.items():
        if a in y.blocks:
            w = coefficient_norms(x.instance, a) ** 2
            total += np.sum(w[:, None] * np.conj(m) * y.blocks[a])
    return complex(total)


def _tensor(instance: QuantumGroupInstance, a: Label, b: Label):
    """Intertwiners of ``a ⊗ b`` as tensors ``T[i, k, r]``."""
    da, db = instance.dim(a), instance.dim(b)
    return [(g, v.reshape(da, db, v.shape[1])) for g, v in instance.intertwiners(a, b)]


def _product_block(amat: np.ndarray, bmat: np.ndarray, t: np.ndarray) -> np.ndarray:
    # C_rs = Σ_{ijkl} A_ij B_kl T_ikr conj(T_jls)
    x = np.einsum("ij,ikr->krj", amat, t)
    y = np.einsum("kl,krj->rjl", bmat, x)
    dg = t.shape[2]
    return y.reshape(dg, -1) @ np.conj(t).reshape(-1, dg)


def multiply(x: GroupAlgElement, y: GroupAlgElement) -> GroupAlgElement:
    """Product in ``C[G]`` from ``u^α_ij u^β_kl = Σ_γ Σ_rs V_(ik),r u^γ_rs conj(V_(jl),s)``."""
    x._check(y)
    inst = x.instance
    out: dict[Label, np.ndarray] = {}
    for a, amat in x.blocks.items():
        for b, bmat in y.blocks.items():
            for g, t in _tensor(inst, a, b):
                c = _product_block(amat, bmat, t)
                out[g] = out[g] + c if g in out else c
    return GroupAlgElement(inst, out)


def _unit_component(instance: QuantumGroupInstance, a: Label) -> np.ndarray:
    """``w[i, k]`` with ``φ̂(u^a_ij u^ā_kl) = w_ik conj(w_jl)``."""
    abar = instance.conj(a)
    for g, t in _tensor(instance, a, abar):
        if g == instance.unit:
            return t[:, :, 0]
    raise QGError(f"no trivial component in {a!r} ⊗ {abar!r}")


def adjoint(x: GroupAlgElement) -> GroupAlgElement:
    """Involution realized through the GNS Gram form.

    The coefficient of ``u^ᾱ_kl`` in ``(u^α_ij)^*`` is
    ``conj(φ̂(u^α_ij u^ᾱ_kl)) / ‖Λ̂(u^ᾱ_kl)‖²``; only the ``ᾱ`` block can
    pair nontrivially with ``α``.
    """
    inst = x.instance
    out: dict[Label, np.ndarray] = {}
    for a, amat in x.blocks.items():
        abar = inst.conj(a)
        w = _unit_component(inst, a)
        block = (np.conj(w).T @ np.conj(amat) @ w) / (coefficient_norms(inst, abar) ** 2)[:, None]
        out[abar] = out[abar] + block if abar in out else block
    return GroupAlgElement(inst, out)


def sobolev_norm_cg(x: GroupAlgElement, length: LengthFunction, s: float) -> float:
    """``‖x‖²_{2,s} = Σ_{α,i,j} dim(α)^{-1} (1 + l(α))^{2s} |a^α_ij|²``."""
    if s < 0:
        raise QGError("Sobolev exponent must be non-negative")
    total = 0.0
    for a, m in x.blocks.items():
        if not np.any(m):
            continue
        total += (1.0 + length(a)) ** (2 * s) * float(np.sum(np.abs(m) ** 2)) / x.instance.dim(a)
    return float(np.sqrt(total))


@dataclass
class GnsBasis:
    """Orthonormal basis ``ê^α_ij = Λ̂(u^α_ij)/‖Λ̂(u^α_ij)‖`` for ``l(α) <= M``.

    Ordered by ``(length, label, i, j)`` so that the truncation at a smaller
    ``M`` is a leading block.
    """

    length: LengthFunction
    M: float
    labels: list[Label] = field(init=False)
    offsets: dict[Label, int] = field(init=False)
    size: int = field(init=False)
    norms: np.ndarray = field(init=False)
    lengths: np.ndarray = field(init=False)
    shell: np.ndarray = field(init=False)
    row: np.ndarray = field(init=False)
    col: np.ndarray = field(init=False)

    def __post_init__(self):
        inst = self.length.instance
        self.labels = self.length.ball(self.M)
        self.offsets = {}
        norms, lengths, rows, cols = [], [], [], []
        pos = 0
        for a in self.labels:
            d = inst.dim(a)
            self.offsets[a] = pos
            pos += d * d
            norms.append(np.repeat(coefficient_norms(inst, a), d))
            lengths.append(np.full(d * d, self.length(a)))
            i, j = np.divmod(np.arange(d * d), d)
            rows.append(i)
            cols.append(j)
        self.size = pos
        self.norms = np.concatenate(norms)
        self.lengths = np.concatenate(lengths)
        self.shell = np.array([shell_index(v) for v in self.lengths], dtype=int)
        self.row = np.concatenate(rows)
        self.col = np.concatenate(cols)

    @property
    def instance(self) -> QuantumGroupInstance:
        return self.length.instance

    def slice(self, label: Label) -> slice:
        d = self.instance.dim(label)
        start = self.offsets[label]
        return slice(start, start + d * d)

    def index(self, label: Label, i: int, j: int) -> int:
        return self.offsets[label] + i * self.instance.dim(label) + j

    def vector(self, x: GroupAlgElement) -> np.ndarray:
        """Coordinates of ``Λ̂(x)`` in the orthonormal basis."""
        vec = np.zeros(self.size, dtype=complex)
        for a, m in x.blocks.items():
            if a not in self.offsets:
                if np.any(m):
                    raise TruncationError(f"label {a!r} lies outside the truncation M={self.M}")
                continue
            sl = self.slice(a)
            vec[sl] = m.reshape(-1) * self.norms[sl]
        return vec

    def element(self, vec: np.ndarray) -> GroupAlgElement:
        """Inverse of :meth:`vector`."""
        inst = self.instance
        blocks = {}
        for a in self.labels:
            sl = self.slice(a)
            d = inst.dim(a)
            blocks[a] = (vec[sl] / self.norms[sl]).reshape(d, d)
        return GroupAlgElement(inst, blocks)

    def window(self, max_shell: int) -> np.ndarray:
        """Indices of basis vectors with shell index ``<= max_shell``."""
        return np.flatnonzero(self.shell <= max_shell)


class RegularRepresentation:
    """Left-regular action of ``C[G]`` compressed to a :class:`GnsBasis`.

    Per-label structure (intertwiner tensors and target offsets) is cached,
    so building matrices for many elements with a common support is cheap.
    """

    def __init__(self, basis: GnsBasis):
        self.basis = basis
        self.instance = basis.instance
        self._plans: dict[Label, list] = {}
        self._abelian = all(self.instance.dim(a) == 1 for a in basis.labels)

    def _plan(self, a: Label):
        plan = self._plans.get(a)
        if plan is not None:
            return plan
        inst, basis = self.instance, self.basis
        if self._abelian and inst.dim(a) == 1:
            rows, cols = [], []
            for b in basis.labels:
                for g, _ in inst.intertwiners(a, b):
                    if g in basis.offsets:
                        rows.append(basis.offsets[g])
                        cols.append(basis.offsets[b])
            plan = ("abelian", np.array(rows, dtype=int), np.array(cols, dtype=int))
        else:
            entries = []
            da = inst.dim(a)
            for b in basis.labels:
                db = inst.dim(b)
                colsl = basis.slice(b)
                for g, t in _tensor(inst, a, b):
                    if g not in basis.offsets:
                        continue
                    dg = inst.dim(g)
                    scale = np.outer(basis.norms[basis.slice(g)], 1.0 / basis.norms[colsl])
                    entries.append((basis.slice(g), colsl, t, da, db, dg, scale))
            plan = ("general", entries)
        self._plans[a] = plan
        return plan

    def matrix(self, x: GroupAlgElement) -> np.ndarray:
        n = self.basis.size
        out = np.zeros((n, n), dtype=complex)
        for a, amat in x.blocks.items():
            if not np.any(amat):
                continue
            plan = self._plan(a)
            if plan[0] == "abelian":
                np.add.at(out, (plan[1], plan[2]), amat[0, 0])
                continue
            for rowsl, colsl, t, da, db, dg, scale in plan[1]:
                # M[(r,s),(k,l)] = Σ_ij A_ij T_ikr conj(T_jls)
                p = np.einsum("ij,ikr->krj", amat, t).reshape(db * dg, da)
                m = (p @ np.conj(t).reshape(da, db * dg)).reshape(db, dg, db, dg)
                out[rowsl, colsl] += m.transpose(1, 3, 0, 2).reshape(dg * dg, db * db) * scale
        return out


def left_regular_matrix(x: GroupAlgElement, length: LengthFunction, M: float) -> np.ndarray:
    """Matrix of ``ξ -> x ξ`` compressed to the truncation ``l <= M``."""
    return RegularRepresentation(GnsBasis(length, M)).matrix(x)


def _dense_norm(mat: np.ndarray) -> float:
    n = min(mat.shape)
    if n <= _DENSE_LIMIT:
        return float(np.linalg.norm(mat, 2))
    if mat.shape[0] == mat.shape[1] and np.allclose(mat, mat.conj().T, rtol=0, atol=1e-13):
        lo = eigvalsh(mat, subset_by_index=[0, 0])[0]
        hi = eigvalsh(mat, subset_by_index=[n - 1, n - 1])[0]
        return float(max(abs(lo), abs(hi)))
    gram = mat.conj().T @ mat
    top = eigvalsh(gram, subset_by_index=[gram.shape[0] - 1, gram.shape[0] - 1])[0]
    return float(np.sqrt(max(top, 0.0)))


def _blocks(mat: np.ndarray):
    """Row/column index sets of the connected components of the bipartite
    graph of nonzero entries; the norm is the max over these blocks."""
    m, n = mat.shape
    rows, cols = np.nonzero(mat)
    if rows.size == 0:
        return []
    graph = coo_matrix((np.ones(rows.size), (rows, m + cols)), shape=(m + n, m + n))
    count, comp = connected_components(graph, directed=False)
    rcomp, ccomp = comp[:m], comp[m:]
    used = np.unique(comp[rows])
    return [(np.flatnonzero(rcomp == c), np.flatnonzero(ccomp == c)) for c in used]


def spectral_norm(mat: np.ndarray) -> float:
    """Largest singular value.

    The matrix is first split along exact zero patterns into independent
    blocks (shifts on abelian duals decompose into short chains, parity
    splits SU_q(2) in two).  Each block then goes through a dense SVD or,
    when large, the top eigenvalue of ``A^* A`` (or of ``A`` itself when
    hermitian); Lanczos-type solvers stall on the clustered singular values
    of near-unitary compressions.
    """
    if min(mat.shape) == 0:
        return 0.0
    if min(mat.shape) <= 32:
        return _dense_norm(mat)
    best = 0.0
    for r, c in _blocks(mat):
        best = max(best, _dense_norm(mat[np.ix_(r, c)]))
    return best


class OpNormResult(NamedTuple):
    estimate: float
    converged: bool
    M_used: float
    history: tuple[float, ...] = ()


def _support_radius(x: GroupAlgElement, length: LengthFunction) -> float:
    return max((length(a) for a in x.support()), default=0.0)


def op_norm(
    x: GroupAlgElement,
    length: LengthFunction,
    M0: float | None = None,
    tol: float = 1e-6,
    M_max: float | None = None,
    step: float = 2,
    transform=None,
) -> OpNormResult:
    """Certified lower bound on ``‖x‖_op`` from growing truncations.

    Evaluates the compression at ``M0, M0 + step, ...`` and stops once two
    successive estimates differ by less than ``tol`` or ``M_max`` is
    reached.  ``transform`` (optional) maps the compressed matrix and its
    basis to the operator whose norm is wanted.
    """
    p = _support_radius(x, length)
    if M0 is None:
        M0 = max(p, 1.0)
    if M_max is None:
        M_max = M0 + 4 * step
    if M0 < p:
        raise TruncationError(f"support radius {p} exceeds the initial truncation {M0}")
    M_max = min(M_max, length.radius)
    history: list[float] = []
    M = M0
    best = 0.0
    converged = False
    M_used = M0
    while True:
        basis = GnsBasis(length, M)
        mat = RegularRepresentation(basis).matrix(x)
        if transform is not None:
            mat = transform(mat, basis)
        est = spectral_norm(mat)
        history.append(est)
        M_used = M
        if len(history) > 1 and abs(est - history[-2]) < tol:
            converged = True
        best = max(best, est)
        if converged or M + step > M_max + 1e-12:
            break
        M += step
    return OpNormResult(best, converged, M_used, tuple(history))
