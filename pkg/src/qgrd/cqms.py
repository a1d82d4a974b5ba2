"""States, the metric ``d_{L^k_T}`` on truncations, and total boundedness.

The distance maximizes ``μ(a) - ν(a)`` over self-adjoint ``a ∈ A_M`` with
zero Haar coefficient subject to ``‖T^k δ^k(a) T^k‖ <= 1``, the norm taken on
a declared truncation ``M_op``.  Restricting to self-adjoint, Haar-centered
elements is the usual reduction: scalars do not change ``|μ(a) - ν(a)|``
and the seminorm vanishes on them, while states are hermitian.

The convex program is a semidefinite one (a linear objective over a
spectral-norm ball of an affine hermitian-matrix map), handed to cvxpy.
Its answer is then certified independently: the seminorm of the returned
element is recomputed by a dense eigensolver and the element rescaled into
the feasible set, so the reported value is always attained by a feasible
certificate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import cvxpy as cp
import numpy as np
from scipy.linalg import eigvalsh, qr

from .elements import GroupAlgElement, random_blocks
from .errors import CapabilityError, QGError, TruncationError
from .grp_alg import GnsBasis, RegularRepresentation, adjoint, haar_state, spectral_norm
from .instances import FreeGroupDual, QuantumGroupInstance, ZdDual
from .length import LengthFunction
from .report import dumps
from .spectral import lemma_lower_bound, twisted_delta

__all__ = [
    "State",
    "evaluate",
    "DistanceResult",
    "distance",
    "constraint_norm",
    "c_n",
    "ProbeReport",
    "total_boundedness_probe",
]


@dataclass
class State:
    """A state on ``C[G]``.

    ``kind`` is one of ``haar``, ``counit``, ``character`` (duals of discrete
    groups, given by one point of the unit circle per generator) and
    ``vector`` (``a -> <ξ, a ξ>`` for a unit vector of a GNS truncation).
    """

    kind: str
    instance: QuantumGroupInstance
    point: tuple[complex, ...] | None = None
    vector: np.ndarray | None = None
    basis: GnsBasis | None = field(default=None, repr=False)

    @classmethod
    def haar(cls, instance):
        return cls("haar", instance)

    @classmethod
    def counit(cls, instance):
        if not instance.amenable:
            raise CapabilityError(f"counit state needs an amenable instance; {instance.name} is not")
        return cls("counit", instance)

    @classmethod
    def character(cls, instance, point):
        if not isinstance(instance, (ZdDual, FreeGroupDual)):
            raise CapabilityError(f"character states need the dual of a discrete group, not {instance.name}")
        pts = (point,) if np.isscalar(point) else tuple(point)
        pts = tuple(complex(z) for z in pts)
        need = instance.d if isinstance(instance, ZdDual) else instance.k
        if len(pts) != need:
            raise QGError(f"character of {instance.name} needs {need} coordinates, got {len(pts)}")
        if any(abs(abs(z) - 1.0) > 1e-12 for z in pts):
            raise QGError("character points must lie on the unit circle")
        return cls("character", instance, point=pts)

    @classmethod
    def vector_state(cls, length: LengthFunction, M: float, xi):
        basis = GnsBasis(length, M)
        v = np.asarray(xi, dtype=complex)
        if v.shape != (basis.size,):
            raise QGError(f"vector has shape {v.shape}, truncation has dimension {basis.size}")
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise QGError("zero vector does not define a state")
        return cls("vector", length.instance, vector=v / nrm, basis=basis)

    def same_as(self, other: State) -> bool:
        if self.kind != other.kind or self.instance is not other.instance:
            return False
        if self.kind == "character":
            return np.allclose(self.point, other.point, rtol=0, atol=1e-15)
        if self.kind == "vector":
            return (
                self.basis.M == other.basis.M
                and self.basis.length is other.basis.length
                and np.allclose(self.vector, other.vector, rtol=0, atol=1e-15)
            )
        return True

    def describe(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.point is not None:
            out["point"] = [[z.real, z.imag] for z in self.point]
        if self.vector is not None:
            out["M"] = self.basis.M
        return out

    def _char_value(self, label) -> complex:
        z = self.point
        inst = self.instance
        if isinstance(inst, ZdDual):
            exps = (label,) if inst.d == 1 else label
            return complex(np.prod([zi ** int(e) for zi, e in zip(z, exps)]))
        return complex(np.prod([z[abs(x) - 1] ** (1 if x > 0 else -1) for x in label])) if label else 1.0

    def evaluate(self, a: GroupAlgElement) -> complex:
        if a.instance is not self.instance:
            raise QGError("element and state belong to different instances")
        if self.kind == "haar":
            return haar_state(a)
        if self.kind == "counit":
            return complex(sum(np.trace(m) for m in a.blocks.values()))
        if self.kind == "character":
            return complex(sum(m[0, 0] * self._char_value(lab) for lab, m in a.blocks.items()))
        if self.kind == "vector":
            basis = self.basis
            for lab in a.support():
                if lab not in basis.offsets:
                    raise TruncationError(f"label {lab!r} lies outside the state's truncation M={basis.M}")
            mat = RegularRepresentation(basis).matrix(a)
            return complex(np.vdot(self.vector, mat @ self.vector))
        raise QGError(f"unknown state kind {self.kind!r}")


def evaluate(state: State, a: GroupAlgElement) -> complex:
    return state.evaluate(a)


def _hermitian_norm(mat: np.ndarray) -> float:
    ev = eigvalsh(mat)
    return float(max(abs(ev[0]), abs(ev[-1])))


def constraint_norm(
    a: GroupAlgElement, k: int, length: LengthFunction, M_op: float, twisted: bool = True
) -> float:
    """``L^k_T(a)`` at the fixed truncation ``M_op`` (a single evaluation)."""
    basis = GnsBasis(length, M_op)
    mat = twisted_delta(RegularRepresentation(basis).matrix(a), basis, k, twisted)
    return spectral_norm(mat)


@dataclass
class DistanceResult:
    value: float
    certificate: GroupAlgElement
    M: float
    M_op: float
    k: int
    bound: float
    seminorm: float  # L^k_T(certificate) at M_op, recomputed densely
    feasibility_residual: float  # max(0, seminorm - bound)
    objective_check: float  # |μ(a*) - ν(a*)| evaluated through the states
    solver: dict

    @property
    def converged(self) -> bool:
        return bool(self.solver.get("converged", False))

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "M": self.M,
            "M_op": self.M_op,
            "k": self.k,
            "bound": self.bound,
            "seminorm": self.seminorm,
            "feasibility_residual": self.feasibility_residual,
            "objective_check": self.objective_check,
            "solver": self.solver,
            "certificate": self.certificate.to_dict(),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


_SOLVER_OPTIONS = {
    "CLARABEL": {"tol_gap_abs": 1e-8, "tol_gap_rel": 1e-8, "tol_feas": 1e-8},
    "SCS": {"eps_abs": 1e-9, "eps_rel": 1e-9, "max_iters": 200_000},
}

# interior-point solvers form dense Hessians over the PSD cone; beyond this
# (real) cone order the first-order SCS is used instead
_IPM_MAX_ORDER = 120


def _default_solver(order: int) -> str:
    installed = cp.installed_solvers()
    if order <= _IPM_MAX_ORDER and "CLARABEL" in installed:
        return "CLARABEL"
    return "SCS"


def _selfadjoint_directions(instance, labels):
    """A real basis of the self-adjoint elements of ``span{u^α_ij : α ∈ labels}``
    (``labels`` closed under conjugation), as elements."""
    cands = []
    for lab in labels:
        d = instance.dim(lab)
        for i in range(d):
            for j in range(d):
                u = GroupAlgElement.coefficient(instance, lab, i, j)
                us = adjoint(u)
                cands.append(u + us)
                cands.append(1j * u - 1j * us)
    offsets, pos = {}, 0
    for lab in labels:
        offsets[lab] = pos
        pos += instance.dim(lab) ** 2
    coords = np.zeros((2 * pos, len(cands)))
    for c, el in enumerate(cands):
        for lab, m in el.blocks.items():
            sl = slice(offsets[lab], offsets[lab] + m.size)
            coords[sl, c] = m.real.ravel()
            coords[pos + sl.start : pos + sl.stop, c] = m.imag.ravel()
    _, r, piv = qr(coords, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > 1e-10 * max(diag[0], 1.0))) if diag.size else 0
    return [cands[p] for p in sorted(piv[:rank])]


def distance(
    mu: State,
    nu: State,
    k: int,
    length: LengthFunction,
    M: float,
    M_op: float | None = None,
    *,
    bound: float = 1.0,
    twisted: bool = True,
    solver: str | None = None,
) -> DistanceResult:
    """Lower bound for ``d_{L^k_T}(μ, ν)`` on ``A_M`` with a feasible certificate.

    ``M_op`` defaults to ``2M``, which contains the band of every element of
    ``A_M`` acting on ``A_M``.
    """
    inst = length.instance
    if mu.instance is not inst or nu.instance is not inst:
        raise QGError("states and length function belong to different instances")
    for st in (mu, nu):
        if st.kind == "vector" and (st.basis.length is not length or st.basis.M < M):
            raise TruncationError("vector state truncation does not contain A_M for this length")
    if k < 1:
        raise QGError("k must be at least 1")
    if bound <= 0:
        raise QGError("seminorm bound must be positive")
    if M_op is None:
        M_op = 2 * M
    if M_op < M:
        raise TruncationError(f"operator truncation M_op={M_op} must contain A_M (M={M})")

    zero = GroupAlgElement(inst)
    if mu.same_as(nu):
        return DistanceResult(0.0, zero, M, M_op, k, bound, 0.0, 0.0, 0.0, {"status": "identical states", "converged": True})

    labels = [a for a in length.ball(M) if a != inst.unit]
    if not labels:
        return DistanceResult(0.0, zero, M, M_op, k, bound, 0.0, 0.0, 0.0, {"status": "empty A_M", "converged": True})
    dirs = _selfadjoint_directions(inst, labels)

    basis = GnsBasis(length, M_op)
    rep = RegularRepresentation(basis)
    phase = 1j**k
    hs = []
    for h in dirs:
        mat = phase * twisted_delta(rep.matrix(h), basis, k, twisted)
        hs.append((mat + mat.conj().T) / 2)
    g = np.array([(mu.evaluate(h) - nu.evaluate(h)).real for h in dirs])

    n = basis.size
    c = cp.Variable(len(dirs))
    re = sum(c[r] * hs[r].real for r in range(len(dirs)))
    im = sum(c[r] * hs[r].imag for r in range(len(dirs)))
    big = cp.bmat([[re, -im], [im, re]])
    eye = np.eye(2 * n)
    big_sym = (big + big.T) / 2
    prob = cp.Problem(cp.Maximize(g @ c), [bound * eye - big_sym >> 0, bound * eye + big_sym >> 0])
    chosen = solver or _default_solver(2 * n)
    try:
        with warnings.catch_warnings():
            # accuracy is judged below by the certificate, not the solver's own flag
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=chosen, **_SOLVER_OPTIONS.get(chosen, {}))
    except cp.error.SolverError as exc:
        return DistanceResult(0.0, zero, M, M_op, k, bound, 0.0, 0.0, 0.0,
                              {"status": f"solver error: {exc}", "solver": chosen, "converged": False})
    coef = np.zeros(len(dirs)) if c.value is None else np.asarray(c.value, dtype=float)

    # certification: rescale into the feasible set using a dense eigensolver
    mat = sum(coef[r] * hs[r] for r in range(len(dirs)))
    nrm = _hermitian_norm(mat) if np.any(coef) else 0.0
    scale = 1.0 if nrm <= bound else bound / nrm
    coef = coef * scale
    value = float(g @ coef)
    if value < 0:
        coef, value = -coef, -value
    cert = zero
    for r, h in enumerate(dirs):
        if coef[r] != 0:
            cert = cert + float(coef[r]) * h
    seminorm = _hermitian_norm(sum(coef[r] * hs[r] for r in range(len(dirs))))
    check = abs(mu.evaluate(cert) - nu.evaluate(cert))
    raw = float(prob.value) if prob.value is not None else math.nan
    converged = prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) and abs(raw - value) <= 1e-6 * max(1.0, abs(raw))
    diag = {
        "status": prob.status,
        "solver": chosen,
        "solver_value": raw,
        "rescale": scale,
        "directions": len(dirs),
        "matrix_size": n,
        "converged": bool(converged),
    }
    return DistanceResult(value, cert, M, M_op, k, bound, seminorm, max(0.0, seminorm - bound), float(check), diag)


def c_n(instance: QuantumGroupInstance, length: LengthFunction, n: float, k: int) -> float:
    """``c_n = (Σ_{0 < l(α) <= n} Σ_{i,j} dim(α) l(α)^{-2k})^{1/2}``.

    The Cauchy-Schwarz step behind the low-part estimate runs over all
    coefficients ``(α, i, j)``, hence ``dim(α)³`` per label.
    """
    total = 0.0
    for a in length.ball(n):
        if a != instance.unit:
            total += instance.dim(a) ** 3 * length(a) ** (-2 * k)
    return math.sqrt(total)


@dataclass
class ProbeReport:
    k: int
    n: float
    c: float
    s: float
    c_n: float
    support: float
    M_op: float
    samples: int
    seed: int
    low_margin: np.ndarray  # c_n - ‖low‖
    tail_margin: np.ndarray  # bound² - ‖tail‖²
    tol: float = 1e-8

    @property
    def low_violations(self) -> int:
        return int(np.sum(self.low_margin < -self.tol))

    @property
    def tail_violations(self) -> int:
        return int(np.sum(self.tail_margin < -self.tol))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "c": self.c,
            "s": self.s,
            "c_n": self.c_n,
            "support": self.support,
            "M_op": self.M_op,
            "samples": self.samples,
            "seed": self.seed,
            "low_violations": self.low_violations,
            "tail_violations": self.tail_violations,
            "min_low_margin": float(np.min(self.low_margin)) if self.samples else None,
            "min_tail_margin": float(np.min(self.tail_margin)) if self.samples else None,
        }


def total_boundedness_probe(
    instance: QuantumGroupInstance,
    k: int,
    s_est: float | None,
    n: float,
    length: LengthFunction,
    samples: int = 100,
    seed: int = 0,
    *,
    c_est: float | None = None,
    rd_report=None,
    support: float | None = None,
    M_op: float | None = None,
) -> ProbeReport:
    """Check the low/tail estimates on random ``a`` with ``L^k_T(a) = 1``.

    Low part (``l <= n``): ``‖·‖_op <= c_n``.  Tail (``l > n``):
    ``‖·‖²_op <= c² 2^{2s} n^{2(s-k)} Σ_{l > n} dim^{-1} l^{2k} |a|²`` with RD
    constants ``(c, s)`` taken from ``rd_report.rd_constants()`` unless
    given.  Samples live on ``0 < l <= support`` (default ``n + 1``) and all
    operator norms use the truncation ``M_op`` (default ``support + 1``).
    """
    if rd_report is not None:
        c_rd, s_rd = rd_report.rd_constants()
        c_est = c_rd if c_est is None else c_est
        s_est = s_rd if s_est is None else s_est
    if c_est is None or s_est is None:
        raise QGError("missing RD constants: supply an RdReport or (c_est, s_est)")
    if not k > s_est:
        raise QGError(f"need k > s, got k={k}, s={s_est}")
    if not instance.has_intertwiners:
        raise CapabilityError(f"{instance.name} has no intertwiners")
    if n <= 0:
        raise QGError("n must be positive")
    support = n + 1 if support is None else support
    M_op = support + 1 if M_op is None else M_op
    if M_op < support:
        raise TruncationError("M_op must contain the sample support")
    labels = [a for a in length.ball(support) if a != instance.unit]
    basis = GnsBasis(length, M_op)
    rep = RegularRepresentation(basis)
    cn = c_n(instance, length, n, k)
    factor = c_est**2 * 2 ** (2 * s_est) * n ** (2 * (s_est - k))
    low_m, tail_m = [], []
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        a = GroupAlgElement(instance, random_blocks(instance, labels, rng))
        lip = spectral_norm(twisted_delta(rep.matrix(a), basis, k))
        a = (1.0 / lip) * a
        low = GroupAlgElement(instance, {x: m for x, m in a.blocks.items() if length(x) <= n})
        tail = GroupAlgElement(instance, {x: m for x, m in a.blocks.items() if length(x) > n})
        low_m.append(cn - spectral_norm(rep.matrix(low)))
        rhs = factor * lemma_lower_bound(tail, length, k)
        tail_m.append(rhs - spectral_norm(rep.matrix(tail)) ** 2)
    return ProbeReport(k, n, c_est, s_est, cn, support, M_op, samples, seed, np.array(low_m), np.array(tail_m))
