"""Function-algebra side: Haar weights on ``C_c(G)``, the element ``C``,
Sobolev norms and the Fourier transform ``C_c(G) -> C[G]``.

Conventions
-----------
The pairing between ``C_c(G)`` and ``C[G]`` is ``<f, u^α_ij> = (p_α f)_ij``.
From ``F(f)(h) = φ(h f)`` evaluated on matrix units this gives the block
formula

    F(f)^α_ij = dim_q(α) · F^α_ii · (p_α f)_ji,

i.e. ``F(f)^α = dim_q(α) · F^α · (p_α f)^T``.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .elements import CcElement, GroupAlgElement
from .errors import QGError
from .instances import Label, QuantumGroupInstance
from .length import LengthFunction

__all__ = [
    "haar_phi",
    "haar_psi",
    "c_element",
    "haar_phi_central",
    "projection",
    "sobolev_norm_cc",
    "fourier",
    "fourier_inv",
    "fourier_block_matrix",
    "pairing",
]


def _check_instance(instance: QuantumGroupInstance, f: CcElement) -> None:
    if not isinstance(f, CcElement):
        raise QGError(f"expected a CcElement, got {type(f).__name__}")
    if f.instance is not instance:
        raise QGError("element belongs to a different instance")


def haar_phi(instance: QuantumGroupInstance, f: CcElement) -> complex:
    """Left Haar weight ``φ(f) = Σ_α dim_q(α) tr(F^α p_α f)``."""
    _check_instance(instance, f)
    total = 0j
    for a, m in f.blocks.items():
        info = instance.irrep(a)
        total += info.qdim * np.sum(info.f * np.diag(m))
    return complex(total)


def haar_psi(instance: QuantumGroupInstance, f: CcElement) -> complex:
    """Right Haar weight ``ψ(f) = Σ_α dim_q(α) tr((F^α)^{-1} p_α f)``."""
    _check_instance(instance, f)
    total = 0j
    for a, m in f.blocks.items():
        info = instance.irrep(a)
        total += info.qdim * np.sum(np.diag(m) / info.f)
    return complex(total)


def projection(instance: QuantumGroupInstance, labels: Iterable[Label]) -> CcElement:
    """Sum of the central projections ``p_α`` over ``labels``."""
    return CcElement(instance, {a: np.eye(instance.dim(a)) for a in labels})


def c_element(instance: QuantumGroupInstance, support: Iterable[Label], power: float = 1.0) -> CcElement:
    """Truncation of ``C^power`` with ``C = Σ_α (dim_q(α)/dim(α)) F^α p_α``."""
    blocks = {}
    for a in support:
        info = instance.irrep(a)
        blocks[a] = np.diag((info.qdim / info.dim * info.f) ** power)
    return CcElement(instance, blocks)


def haar_phi_central(instance: QuantumGroupInstance, labels: Iterable[Label], power: float = 1.0) -> float:
    """``φ(Σ_α p_α C^power)`` evaluated block by block from the modular data.

    ``φ(p_α C^power) = dim_q(α) (dim_q(α)/dim(α))^power Σ_i (F^α_ii)^{1+power}``,
    which never forms the blocks; used where dimensions are too large for
    :func:`c_element`.
    """
    total = 0.0
    for a in labels:
        info = instance.irrep(a)
        total += info.qdim * (info.qdim / info.dim) ** power * info.f_power_sum(1.0 + power)
    return float(total)


def sobolev_norm_cc(instance: QuantumGroupInstance, f: CcElement, length: LengthFunction, s: float) -> float:
    """Sobolev ``s``-norm of ``f ∈ C_c(G)``.

    ``‖f‖²_{2,s} = Σ_α (dim_q(α)²/dim(α)) tr(((1+L)^s f F)^* (1+L)^s f F)``;
    since ``L`` is central, ``(1+L)^s`` is the scalar ``(1+l(α))^s`` per block.
    """
    _check_instance(instance, f)
    if s < 0:
        raise QGError("Sobolev exponent must be non-negative")
    total = 0.0
    for a, m in f.blocks.items():
        if not np.any(m):
            continue
        info = instance.irrep(a)
        g = m * info.f[None, :]  # f F
        total += info.qdim**2 / info.dim * (1.0 + length(a)) ** (2 * s) * float(np.sum(np.abs(g) ** 2))
    return float(np.sqrt(total))


def fourier_block_matrix(instance: QuantumGroupInstance, label: Label) -> np.ndarray:
    """Matrix of ``vec(p_α f) -> vec(F(f)^α)`` (row-major vectorization)."""
    info = instance.irrep(label)
    d = info.dim
    mat = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            mat[i * d + j, j * d + i] = info.qdim * info.f[i]
    return mat


def fourier(instance: QuantumGroupInstance, f: CcElement) -> GroupAlgElement:
    """Fourier transform ``F(f)``, the element of ``C[G]`` with ``<h, F(f)> = φ(h f)``."""
    _check_instance(instance, f)
    out = {}
    for a, m in f.blocks.items():
        info = instance.irrep(a)
        out[a] = info.qdim * info.f[:, None] * m.T
    return GroupAlgElement(instance, out)


def fourier_inv(instance: QuantumGroupInstance, x: GroupAlgElement) -> CcElement:
    """Inverse Fourier transform, block by block through the inverse of
    :func:`fourier_block_matrix`."""
    if not isinstance(x, GroupAlgElement) or x.instance is not instance:
        raise QGError("expected a GroupAlgElement of this instance")
    out = {}
    for a, m in x.blocks.items():
        d = instance.dim(a)
        vec = np.linalg.solve(fourier_block_matrix(instance, a), m.reshape(d * d))
        out[a] = vec.reshape(d, d)
    return CcElement(instance, out)


def pairing(f: CcElement, x: GroupAlgElement) -> complex:
    """Bilinear pairing ``<f, x> = Σ_α Σ_ij (p_α f)_ij a^α_ij``."""
    total = 0j
    for a, m in x.blocks.items():
        if a in f.blocks:
            total += np.sum(f.blocks[a] * m)
    return complex(total)
