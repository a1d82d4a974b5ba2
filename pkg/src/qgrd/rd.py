"""Polynomial growth and rapid decay on concrete instances.

Growth is read off the shell aggregates ``Σ_{S^n} dim²`` (classical) and
``Σ_{S^n} dim_q²`` (quantum).  Rapid decay is tested in its shell form: for
``f`` supported on one shell, ``‖F(f)‖_op / ‖f‖_{2,0}`` should grow at most
polynomially in ``n``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .elements import CcElement, random_blocks
from .errors import CapabilityError, QGError
from .fun_alg import c_element, fourier, haar_phi, haar_phi_central, sobolev_norm_cc
from .grp_alg import GnsBasis, RegularRepresentation, spectral_norm
from .instances import QuantumGroupInstance
from .length import LengthFunction, shells
from .report import csv_text, dumps

__all__ = [
    "GrowthTable",
    "GrowthFit",
    "growth_table",
    "phi_qn",
    "fit_growth",
    "ModularContrast",
    "compare_modular",
    "RdRow",
    "RdReport",
    "rd_test",
]

COLUMNS = {"classical": "sum_dim2", "quantum": "sum_qdim2", "count": "count"}


@dataclass(frozen=True)
class GrowthTable:
    """Rows ``(n, |S^n|, Σ dim², Σ dim_q²)`` for ``n = 0..N``."""

    n: np.ndarray
    count: np.ndarray
    sum_dim2: np.ndarray
    sum_qdim2: np.ndarray
    instance: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return int(self.n[-1])

    def column(self, name: str) -> np.ndarray:
        try:
            return np.asarray(getattr(self, COLUMNS[name]), dtype=float)
        except KeyError:
            raise QGError(f"unknown growth column {name!r}; expected one of {sorted(COLUMNS)}") from None

    def rows(self):
        for i in range(len(self.n)):
            yield (int(self.n[i]), int(self.count[i]), float(self.sum_dim2[i]), float(self.sum_qdim2[i]))

    def to_csv(self, comments=()) -> str:
        return csv_text(["n", "count", "sum_dim2", "sum_qdim2"], self.rows(), comments)


def growth_table(instance: QuantumGroupInstance, length: LengthFunction, N: int) -> GrowthTable:
    sh = shells(length, N)
    return GrowthTable(np.arange(N + 1), sh.count, sh.sum_dim2, sh.sum_qdim2, instance.descriptor())


# largest block materialized when evaluating φ(q_n)
_MAX_BLOCK = 4096


def phi_qn(instance: QuantumGroupInstance, length: LengthFunction, N: int) -> np.ndarray:
    """``φ(q_n)`` with ``q_n = Σ_{α∈S^n} p_α C^{-1}``, through the Haar weight.

    Shells whose blocks are small enough are built as :class:`CcElement`
    and fed to :func:`haar_phi`; larger ones use :func:`haar_phi_central`.
    """
    sh = shells(length, N)
    out = np.empty(N + 1)
    for n in range(N + 1):
        if all(instance.dim(a) <= _MAX_BLOCK for a in sh[n]):
            out[n] = haar_phi(instance, c_element(instance, sh[n], power=-1.0)).real
        else:
            out[n] = haar_phi_central(instance, sh[n], power=-1.0)
    return out


@dataclass(frozen=True)
class GrowthFit:
    """Verdict of :func:`fit_growth`.

    ``degree`` is the log-log slope against ``log(1+n)``; ``rate`` the slope
    of ``log(sum)`` against ``n``.  Residuals are RMS of the two fits.
    """

    kind: str  # "polynomial", "exponential" or "inconclusive"
    degree: float
    rate: float
    residual_poly: float
    residual_exp: float
    tail_change: float

    @property
    def polynomial(self) -> bool:
        return self.kind == "polynomial"

    def to_dict(self) -> dict:
        return asdict(self)


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(x)) if len(res) else 0.0
    return float(coef[0]), rms


def fit_growth(
    table: GrowthTable | np.ndarray,
    column: str = "classical",
    *,
    min_rate: float = 0.05,
    stable_change: float = 0.25,
) -> GrowthFit:
    """Classify the growth of a shell column as polynomial or exponential.

    Both ``log y ~ log(1+n)`` and ``log y ~ n`` are fitted over ``n >= 2``.
    The column is exponential when the second fit has slope above
    ``min_rate`` and the smaller residual; it is polynomial when the
    log-log slope over the two quarters of the last half of the rows
    changes by less than ``stable_change``.
    """
    y = table.column(column) if isinstance(table, GrowthTable) else np.asarray(table, dtype=float)
    n = np.arange(len(y))
    if len(y) < 9:
        raise QGError("growth fit needs at least 9 rows (N >= 8)")
    if not np.any(y[1:] > 0):
        raise QGError("degenerate growth table: all shells beyond n = 0 are empty")
    sel = (n >= 2) & (y > 0)
    ns, ly = n[sel], np.log(y[sel])
    degree, res_poly = _linfit(np.log1p(ns), ly)
    rate, res_exp = _linfit(ns.astype(float), ly)

    half = ns[ns >= ns[-1] / 2]
    mid = (half[0] + half[-1]) / 2
    q1, q2 = half[half <= mid], half[half >= mid]
    if len(q1) >= 2 and len(q2) >= 2:
        s1, _ = _linfit(np.log1p(q1), np.log(y[q1]))
        s2, _ = _linfit(np.log1p(q2), np.log(y[q2]))
        change = abs(s2 - s1)
    else:
        change = math.inf

    if rate > min_rate and res_exp < res_poly:
        kind = "exponential"
    elif change < stable_change:
        kind = "polynomial"
    else:
        kind = "inconclusive"
    return GrowthFit(kind, degree, rate, res_poly, res_exp, change)


@dataclass(frozen=True)
class ModularContrast:
    classical: GrowthFit
    quantum: GrowthFit
    columns_identical: bool

    def to_dict(self) -> dict:
        return {
            "classical": self.classical.to_dict(),
            "quantum": self.quantum.to_dict(),
            "columns_identical": self.columns_identical,
        }


def compare_modular(instance: QuantumGroupInstance, length: LengthFunction, N: int, **kw) -> ModularContrast:
    """Side-by-side growth verdicts for ``Σ dim²`` and ``Σ dim_q²``."""
    table = growth_table(instance, length, N)
    same = bool(np.allclose(table.sum_dim2, table.sum_qdim2, rtol=1e-12, atol=0))
    return ModularContrast(fit_growth(table, "classical", **kw), fit_growth(table, "quantum", **kw), same)


@dataclass(frozen=True)
class RdRow:
    n: int
    ratio: float  # max over samples of ‖F(f)‖_op / ‖f‖_{2,0}
    chain_bound: float  # sqrt(4 Σ_{S^n} dim²)
    M_used: float
    converged: bool
    violations: int  # samples above chain_bound


@dataclass
class RdReport:
    """Per-shell ratios with a fitted envelope ``r_n ≲ c (1+n)^s``.

    ``c``, ``s`` come from least squares on ``log r_n`` against
    ``log(1+n)``; ``c_env = max_n r_n / (1+n)^s`` makes the envelope hold on
    every sampled shell.
    """

    rows: list[RdRow]
    s: float
    c: float
    residual: float
    c_env: float
    meta: dict

    @property
    def violations(self) -> int:
        return sum(r.violations for r in self.rows)

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.rows)

    def rd_constants(self) -> tuple[float, float]:
        """Constants ``(c', s')`` with ``‖F(f)‖_op <= c' ‖f‖_{2,s'}`` on sampled data.

        Summing the shell envelope with Cauchy-Schwarz over
        ``Σ_n (1+n)^{-2} = π²/6`` gives ``c' = c_env π/√6`` and ``s' = s + 1``.
        Lengths are assumed integer-valued so that ``1 + n = 1 + l(α)`` on ``S^n``.
        """
        return self.c_env * math.pi / math.sqrt(6.0), self.s + 1.0

    def to_dict(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "fit": {"s": self.s, "c": self.c, "residual": self.residual, "c_env": self.c_env},
            "violations": self.violations,
            "all_converged": self.all_converged,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self, comments=()) -> str:
        rows = ((r.n, r.ratio, r.chain_bound, r.M_used, r.converged, r.violations) for r in self.rows)
        return csv_text(["n", "ratio", "chain_bound", "M_used", "converged", "violations"], rows, comments)


def _sample(instance, labels, seed, n, i) -> CcElement:
    rng = np.random.default_rng([seed, n, i])
    return CcElement(instance, random_blocks(instance, labels, rng))


def rd_test(
    instance: QuantumGroupInstance,
    length: LengthFunction,
    n_max: int,
    samples: int = 100,
    seed: int = 0,
    *,
    pad: float = 2,
    scale: float = 1.0,
    step: float = 2,
    tol: float = 1e-6,
) -> RdReport:
    """Sampled shell ratios ``r_n`` for ``n = 0..n_max``.

    Each ``f`` has complex Gaussian blocks on ``S^n`` drawn from the seed
    sequence ``(seed, n, i)``, so the result does not depend on evaluation
    order.  ``‖F(f)‖_op`` is evaluated on the truncation
    ``M_n = ceil(scale·n) + pad``; for the maximizing sample the norm is
    recomputed at ``M_n + step`` and the shell is flagged converged if the
    two differ by less than ``tol`` (relative).
    """
    if not instance.has_intertwiners:
        raise CapabilityError(f"{instance.name} has no intertwiners; operator norms unavailable")
    sh = shells(length, n_max)
    rows: list[RdRow] = []
    for n in range(n_max + 1):
        labels = sh[n]
        bound = math.sqrt(4.0 * float(sh.sum_dim2[n]))
        M = min(math.ceil(scale * n) + pad, length.radius)
        rep = RegularRepresentation(GnsBasis(length, M))
        best, best_x, best_norm, bad = 0.0, None, 1.0, 0
        for i in range(samples):
            f = _sample(instance, labels, seed, n, i)
            x = fourier(instance, f)
            norm_f = sobolev_norm_cc(instance, f, length, 0.0)
            r = spectral_norm(rep.matrix(x)) / norm_f
            if r > bound * (1 + 1e-9):
                bad += 1
            if r > best:
                best, best_x, best_norm = r, x, norm_f
        converged = False
        if best_x is not None and M + step <= length.radius:
            wider = RegularRepresentation(GnsBasis(length, M + step)).matrix(best_x)
            converged = abs(spectral_norm(wider) / best_norm - best) <= tol * max(best, 1.0)
        rows.append(RdRow(n, best, bound, M, converged, bad))

    ns = np.array([r.n for r in rows], dtype=float)
    rs = np.array([r.ratio for r in rows])
    if len(rows) >= 2:
        coef, res, *_ = np.polyfit(np.log1p(ns), np.log(rs), 1, full=True)
        s, logc = float(coef[0]), float(coef[1])
        residual = math.sqrt(float(res[0]) / len(rows)) if len(res) else 0.0
    else:
        s, logc, residual = 0.0, float(np.log(rs[0])), 0.0
    c_env = float(np.max(rs / (1 + ns) ** s))
    meta = {
        "instance": instance.descriptor(),
        "n_max": n_max,
        "samples": samples,
        "seed": seed,
        "pad": pad,
        "scale": scale,
        "step": step,
        "tol": tol,
    }
    return RdReport(rows, s, math.exp(logc), residual, c_env, meta)
