"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the terminal summary) and then
asserts the same condition.
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from qgrd import CcElement, GroupAlgElement, build_instance, word_length
from qgrd.cqms import State, c_n, distance, total_boundedness_probe
from qgrd.elements import random_blocks
from qgrd.fun_alg import fourier, sobolev_norm_cc
from qgrd.grp_alg import GnsBasis, RegularRepresentation, adjoint, haar_state, multiply, sobolev_norm_cg, spectral_norm
from qgrd.rd import compare_modular, growth_table, phi_qn, rd_test
from qgrd.spectral import (
    commutator_bands,
    delta_k,
    delta_k_iterated,
    lemma_lower_bound,
    summability_partial,
    twisted_delta,
)

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def su_rd(su, su_len):
    t0 = time.perf_counter()
    rep = rd_test(su, su_len, 12, samples=100, seed=0)
    return rep, time.perf_counter() - t0


def test_criterion_01_fourier_isometry(su, su_len, acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    labels = su_len.ball(6)
    worst = 0.0
    for _ in range(200):
        f = CcElement(su, random_blocks(su, labels, rng))
        x = fourier(su, f)
        for s in (0, 1, 2):
            a, b = sobolev_norm_cg(x, su_len, s), sobolev_norm_cc(su, f, su_len, s)
            worst = max(worst, abs(a - b) / b)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 10
    acceptance(1, ok, f"Fourier isometry: max rel err {worst:.2e} (<= 1e-8), {dt:.1f}s (< 10s)")
    assert ok


def test_criterion_02_schur_and_intertwiners(su, su_len, acceptance):
    t0 = time.perf_counter()
    coeffs = [(a, i, j) for a in su_len.ball(6) for i in range(su.dim(a)) for j in range(su.dim(a))]
    els = [GroupAlgElement.coefficient(su, *c) for c in coeffs]
    adj = [adjoint(e) for e in els]
    gram_err = 0.0
    for (c1, x), (c2, y) in itertools.product(zip(coeffs, adj), zip(coeffs, els)):
        val = haar_state(multiply(x, y))
        a, i, _ = c1
        want = 1.0 / (su.irrep(a).f[i] * su.qdim(a)) if c1 == c2 else 0.0
        gram_err = max(gram_err, abs(val - want))
    comp_err = 0.0
    for a, b in itertools.product(su_len.ball(6), repeat=2):
        total = sum(v @ v.conj().T for _, v in su.intertwiners(a, b))
        comp_err = max(comp_err, np.abs(total - np.eye(total.shape[0])).max())
    dt = time.perf_counter() - t0
    ok = gram_err <= 1e-9 and comp_err <= 1e-10 and dt < 60
    acceptance(
        2,
        ok,
        f"Gram vs Schur max err {gram_err:.2e} over {len(coeffs)}^2 pairs (<= 1e-9); "
        f"completeness err {comp_err:.2e} (<= 1e-10); {dt:.1f}s (< 60s)",
    )
    assert ok


def test_criterion_03_modular_contrast(su, su_len, z, z_len, acceptance):
    t0 = time.perf_counter()
    c = compare_modular(su, su_len, 40)
    zc = compare_modular(z, z_len, 40)
    zt = growth_table(z, z_len, 40)
    dt = time.perf_counter() - t0
    z_const = bool(np.all(zt.sum_dim2[1:] == 2) and np.all(zt.sum_qdim2[1:] == 2))
    ok = (
        c.classical.polynomial
        and abs(c.classical.degree - 2.0) <= 0.2
        and c.quantum.kind == "exponential"
        and abs(c.quantum.rate - 1.386) <= 0.1
        and zc.classical.polynomial
        and zc.quantum.polynomial
        and z_const
        and dt < 5
    )
    acceptance(
        3,
        ok,
        f"SU classical {c.classical.kind} deg {c.classical.degree:.3f}; quantum {c.quantum.kind} "
        f"rate {c.quantum.rate:.4f}; Z columns constant={z_const} ({zc.classical.kind}/{zc.quantum.kind}); {dt:.2f}s",
    )
    assert ok


def test_criterion_04_growth_cross_check(su, su_len, z, z_len, o3, o3_len, z2, f2, acceptance):
    # the free group has 4*3^(n-1) labels on shell n; N = 30 is out of reach
    cases = [
        ("su_q_2", su, su_len, 30),
        ("z_d(1)", z, z_len, 30),
        ("z_d(2)", z2, word_length(z2, radius=30), 30),
        ("o_n_plus(3)", o3, o3_len, 30),
        ("free_group(2)", f2, word_length(f2, radius=10), 10),
    ]
    parts, ok = [], True
    for name, inst, lf, N in cases:
        t = growth_table(inst, lf, N)
        err = float(np.max(np.abs(phi_qn(inst, lf, N) - t.sum_dim2) / t.sum_dim2))
        ok &= err <= 1e-9
        parts.append(f"{name} N={N} {err:.1e}")
    acceptance(4, ok, "phi(q_n) vs sum dim^2 max rel err: " + ", ".join(parts) + " (<= 1e-9)")
    assert ok


def test_criterion_05_rd_shell_bound(z, z_len, su_rd, acceptance):
    t0 = time.perf_counter()
    zr = rd_test(z, z_len, 64, samples=500, seed=0, scale=2)
    dt_z = time.perf_counter() - t0
    sr, dt_su = su_rd
    z_max = max(r.ratio for r in zr.rows)
    su_ok = all(r.ratio <= 2 * (r.n + 1) for r in sr.rows)
    su_worst = max(r.ratio / (2 * (r.n + 1)) for r in sr.rows)
    total = dt_z + dt_su
    ok = z_max <= 2 * math.sqrt(2) and abs(zr.s) <= 0.15 and su_ok and total < 600
    acceptance(
        5,
        ok,
        f"Z max r_n {z_max:.4f} (<= {2 * math.sqrt(2):.4f}), s = {zr.s:.4f} (|s| <= 0.15); "
        f"SU max r_n/(2(n+1)) {su_worst:.3f} (<= 1); {total:.0f}s (< 600s)",
    )
    assert ok


def test_criterion_06_band_identity(su, su_len, z, z_len, z2, acceptance):
    # M = 16 is out of reach for the free group (3^16 labels on the outer shell)
    cases = [("su_q_2", su, su_len), ("z_d(1)", z, z_len), ("z_d(2)", z2, word_length(z2, radius=16))]
    parts, ok = [], True
    for name, inst, lf in cases:
        worst = 0.0
        for i in range(50):
            rng = np.random.default_rng([6, i])
            a = GroupAlgElement(inst, random_blocks(inst, lf.ball(3), rng))
            b = commutator_bands(a, lf, 16)
            win = b.interior()
            for k in (2, 3):
                diff = np.abs(b.weighted(k) - delta_k_iterated(a, k, lf, 16))[np.ix_(win, win)].max()
                worst = max(worst, float(diff))
        ok &= worst <= 1e-10
        parts.append(f"{name} {worst:.1e}")
    acceptance(6, ok, "band vs iterated max entry diff, k=2,3, M=16, 50 samples: " + ", ".join(parts) + " (<= 1e-10)")
    assert ok


def test_criterion_07_lemmas(su, su_len, z, z_len, acceptance):
    basis_err = 0.0
    violations, checked, margin = 0, 0, math.inf
    for inst, lf in ((su, su_len), (z, z_len)):
        basis = GnsBasis(lf, 8)
        one = basis.vector(GroupAlgElement.one(inst))
        for a in lf.ball(4):
            d = inst.dim(a)
            for i, j in itertools.product(range(d), repeat=2):
                x = GroupAlgElement.coefficient(inst, a, i, j)
                for k in (1, 2, 3):
                    lhs = delta_k(x, k, lf, 8) @ one
                    basis_err = max(basis_err, float(np.abs(lhs - basis.lengths**k * basis.vector(x)).max()))
        op_basis = GnsBasis(lf, 6)
        rep = RegularRepresentation(op_basis)
        for i in range(200):
            rng = np.random.default_rng([7, i])
            a = GroupAlgElement(inst, random_blocks(inst, lf.ball(3), rng))
            mat = rep.matrix(a)
            for k in (1, 2, 3):
                lip = spectral_norm(twisted_delta(mat, op_basis, k))
                checked += 1
                gap = lip**2 - lemma_lower_bound(a, lf, k)
                margin = min(margin, gap)
                if gap < -1e-8:
                    violations += 1
    ok = basis_err <= 1e-10 and violations == 0
    acceptance(
        7,
        ok,
        f"basis identity max err {basis_err:.1e} (<= 1e-10); lower bound violations {violations}/{checked}, "
        f"min margin {margin:.3e}",
    )
    assert ok


def test_criterion_08_summability(su, su_len, o3, o3_len, acceptance):
    t0 = time.perf_counter()
    z = build_instance({"kind": "z_d", "d": 1})
    zr = summability_partial(z, word_length(z, radius=10_000), 2, 10_000)
    rel = abs(zr.final - math.pi**2 / 3) / (math.pi**2 / 3)
    su4 = summability_partial(su, su_len, 4, 40).verdict
    su2 = summability_partial(su, su_len, 2, 40).verdict
    o3v = {p: summability_partial(o3, o3_len, p, 40).verdict for p in range(1, 21)}
    dt = time.perf_counter() - t0
    ok = rel <= 0.01 and su4 == "convergent" and su2 == "divergent" and set(o3v.values()) == {"divergent"} and dt < 30
    acceptance(
        8,
        ok,
        f"Z p=2 partial {zr.final:.5f} vs pi^2/3 (rel {rel:.1e}); SU p=4 {su4}, p=2 {su2}; "
        f"O3 p=1..20 verdicts {sorted(set(o3v.values()))}; {dt:.1f}s (< 30s)",
    )
    assert ok


def _grid_oracle(M=6, M_op=16):
    """Brute-force d(char 1, char -1) on the dual of Z, k = 1.

    By the reflection n -> -n (which commutes with D) the optimum may be taken
    among a = sum_n c_n (u^n + u^-n) with real c_n, for which
    mu(a) - nu(a) = 4 sum_{n odd} c_n.  The matrix of [D, a] on
    l^2({-M_op..M_op}) is built directly, and the ratio objective / norm is
    maximized over directions c by a coarse grid refined around the best point.
    """
    size = 2 * M_op + 1
    mats = np.zeros((M, size, size))
    for n in range(1, M + 1):
        for m in range(-M_op, M_op + 1):
            for t in (n, -n):
                if abs(m + t) <= M_op:
                    mats[n - 1, m + t + M_op, m + M_op] += abs(m + t) - abs(m)
    odd = np.array([1.0 if n % 2 else 0.0 for n in range(1, M + 1)])

    def ratios(cs):
        ops = np.einsum("bn,nij->bij", cs, mats)
        norms = np.linalg.norm(ops, ord=2, axis=(1, 2))
        out = np.full(len(cs), -np.inf)
        nz = norms > 1e-12
        out[nz] = 4 * (cs[nz] @ odd) / norms[nz]
        return out

    mesh = np.array(list(itertools.product(np.linspace(-1, 1, 5), repeat=M)))
    vals = ratios(mesh)
    best_c, best = mesh[np.argmax(vals)], float(vals.max())
    steps = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=M)))
    h = 0.25
    while h > 1e-5:
        cand = best_c + h * steps
        vals = ratios(cand)
        i = int(np.argmax(vals))
        if vals[i] > best + 1e-13:
            best, best_c = float(vals[i]), cand[i]
        else:
            h /= 2
    return best, best_c


def test_criterion_09_distance_vs_oracle(z, z_len, acceptance):
    t0 = time.perf_counter()
    mu, nu = State.character(z, 1.0), State.character(z, -1.0)
    results = {M: distance(mu, nu, 1, z_len, M, 16) for M in (4, 6, 8)}
    oracle, _ = _grid_oracle(6, 16)
    dt = time.perf_counter() - t0
    vals = [results[M].value for M in (4, 6, 8)]
    rel = abs(results[6].value - oracle) / oracle
    resid = max(r.feasibility_residual for r in results.values())
    mono = all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))
    ok = rel <= 0.05 and resid <= 1e-6 and mono and dt < 300
    acceptance(
        9,
        ok,
        f"solver {results[6].value:.5f} vs grid oracle {oracle:.5f} (rel {rel:.1e}, <= 5%); "
        f"residual {resid:.1e}; M=4,6,8 -> {', '.join(f'{v:.4f}' for v in vals)}; {dt:.1f}s",
    )
    assert ok


def test_criterion_10_probe(su, su_len, z, z_len, su_rd, acceptance):
    rep, _ = su_rd
    c_rd, s_rd = rep.rd_constants()
    exact = math.sqrt(2 * sum(m**-4.0 for m in range(1, 5)))
    cz = c_n(z, z_len, 4, 2)
    parts, low, tail = [], 0, 0
    for n in (2, 4, 8):
        pr = total_boundedness_probe(su, 3, None, n, su_len, samples=100, seed=10, rd_report=rep)
        low += pr.low_violations
        tail += pr.tail_violations
        parts.append(f"n={n}: {pr.low_violations}/{pr.tail_violations}")
    ok = low == 0 and tail == 0 and abs(cz - exact) <= 1e-12
    acceptance(
        10,
        ok,
        f"RD constants c={c_rd:.3f}, s={s_rd:.3f}; violations (low/tail) " + ", ".join(parts)
        + f"; c_n(Z,k=2,n=4) = {cz:.6f} (exact {exact:.6f})",
    )
    assert ok


CLI_RUNS = [
    ["growth", "--instance", "su_q_2", "--q", "0.5", "--gen", "1", "--N", "40", "--format", "csv"],
    ["rd-fit", "--instance", "su_q_2", "--q", "0.5", "--N", "4", "--samples", "10", "--seed", "3", "--format", "json"],
    ["distance", "--instance", "z_d", "--d", "1", "--state1", "char:1", "--state2", "char:-1", "--k", "1", "--M", "4"],
    ["probe", "--instance", "su_q_2", "--q", "0.5", "--k", "3", "--n", "2", "--s", "1.3", "--c", "3", "--samples", "5"],
    ["summability", "--instance", "o_n_plus", "--n-orth", "3", "--p", "4", "--N", "30", "--format", "csv"],
]


def _cli(argv):
    proc = subprocess.run([sys.executable, "-m", "qgrd", *argv], capture_output=True, check=False)
    assert proc.returncode == 0, proc.stderr.decode()
    return b"\n".join(line for line in proc.stdout.split(b"\n") if b"timestamp" not in line)


def test_criterion_11_determinism(acceptance):
    same = [_cli(argv) == _cli(argv) for argv in CLI_RUNS]
    ok = all(same)
    names = ", ".join(f"{a[0]}={'identical' if s else 'DIFFERENT'}" for a, s in zip(CLI_RUNS, same))
    acceptance(11, ok, f"repeated CLI runs byte-identical (timestamp excluded): {names}")
    assert ok
