import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Rational
from sympy.physics.quantum.cg import CG

from qgrd import CapabilityError, InstanceError, IntertwinerError, LabelError, build_instance, q_integer
from qgrd.instances import ConstantDiagonal


def _small_labels(inst, radius=6):
    return list(inst.enumerate_irreps(radius))


def test_z_irrep(z):
    info = z.irrep(5)
    assert (info.dim, info.qdim, tuple(info.f_diag), info.conj) == (1, 1.0, (1.0,), -5)


def test_su_irrep_q_half(su):
    info = su.irrep(1)
    assert info.dim == 2
    assert info.qdim == pytest.approx(2.5, rel=1e-14)
    assert np.allclose(info.f, [0.5, 2.0])
    assert info.conj == 1


def test_o3_dims(o3):
    assert [o3.dim(k) for k in range(4)] == [1, 3, 8, 21]


@pytest.mark.parametrize("desc", [
    {"kind": "su_q_2", "q": 0.0},
    {"kind": "su_q_2", "q": 1.5},
    {"kind": "su_q_2", "q": -0.2},
    {"kind": "z_d", "d": 0},
    {"kind": "free_group", "k": 0},
    {"kind": "o_n_plus", "N": 1},
    {"kind": "sl_3"},
    {"kind": "z_d", "d": 1, "extra": 2},
])
def test_bad_descriptors(desc):
    with pytest.raises(InstanceError):
        build_instance(desc)


def test_descriptor_json_roundtrip(su):
    inst = build_instance('{"kind": "su_q_2", "q": 0.5}')
    assert inst.descriptor() == su.descriptor()


@pytest.mark.parametrize("name", ["su", "su1", "z", "z2", "f2", "o3"])
def test_irrep_invariants(request, name):
    inst = request.getfixturevalue(name)
    for a in _small_labels(inst, 5):
        info = inst.irrep(a)
        assert info.f_power_sum(1) == pytest.approx(info.qdim, rel=1e-10)
        assert info.f_power_sum(-1) == pytest.approx(info.qdim, rel=1e-10)
        assert info.qdim >= info.dim - 1e-12
        c = inst.conj(a)
        assert inst.conj(c) == a
        assert inst.dim(c) == info.dim and inst.qdim(c) == pytest.approx(info.qdim)
        if inst.unimodular:
            assert np.allclose(info.f, 1.0, atol=1e-12)
    if not inst.unimodular:
        assert any(not np.allclose(inst.irrep(a).f, 1.0) for a in _small_labels(inst, 2))


@pytest.mark.parametrize("name", ["su", "z", "z2", "f2", "o3"])
def test_fusion_invariants(request, name):
    inst = request.getfixturevalue(name)
    labels = _small_labels(inst, 3)
    for a, b in itertools.product(labels, labels):
        fus = inst.fuse(a, b)
        assert sum(m * inst.dim(g) for g, m in fus.items()) == inst.dim(a) * inst.dim(b)
        qsum = sum(m * inst.qdim(g) for g, m in fus.items())
        assert qsum == pytest.approx(inst.qdim(a) * inst.qdim(b), rel=1e-9)
        assert fus.get(inst.unit, 0) == (1 if b == inst.conj(a) else 0)
    for a in labels:
        assert inst.fuse(inst.unit, a) == Counter({a: 1}) == inst.fuse(a, inst.unit)


def test_fuse_examples(z, su, o3):
    assert z.fuse(3, -1) == Counter({2: 1})
    assert su.fuse(1, 1) == Counter({0: 1, 2: 1})
    assert o3.fuse(2, 1) == Counter({1: 1, 3: 1})


def test_unknown_label(z, su):
    with pytest.raises(LabelError):
        su.fuse(-1, 1)
    with pytest.raises(LabelError):
        z.irrep(1.5)


def _flatten(inst, counter, c):
    out = Counter()
    for g, m in counter.items():
        for h, n in inst.fuse(g, c).items():
            out[h] += m * n
    return out


def _flatten_left(inst, a, counter):
    out = Counter()
    for g, m in counter.items():
        for h, n in inst.fuse(a, g).items():
            out[h] += m * n
    return out


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
def test_fusion_associative_su(a, b, c):
    inst = build_instance({"kind": "su_q_2", "q": 0.5})
    assert _flatten(inst, inst.fuse(a, b), c) == _flatten_left(inst, a, inst.fuse(b, c))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=4),
       st.lists(st.sampled_from([1, -1, 2, -2]), max_size=4),
       st.lists(st.sampled_from([1, -1, 2, -2]), max_size=4))
def test_fusion_associative_free(w1, w2, w3):
    inst = build_instance({"kind": "free_group", "k": 2})
    a, b, c = (inst.multiply((), tuple(w)) for w in (w1, w2, w3))
    assert _flatten(inst, inst.fuse(a, b), c) == _flatten_left(inst, a, inst.fuse(b, c))


def test_z_intertwiner(z):
    (g, v), = z.intertwiners(2, 3)
    assert g == 5 and v.shape == (1, 1) and v[0, 0] == 1


@pytest.mark.parametrize("q", [0.5, 1.0, 0.8])
def test_su_intertwiner_invariants(q):
    inst = build_instance({"kind": "su_q_2", "q": q})
    for a in range(5):
        for b in range(5):
            ents = inst.intertwiners(a, b)
            assert Counter(g for g, _ in ents) == inst.fuse(a, b)
            total = np.zeros(((a + 1) * (b + 1),) * 2)
            cols = np.hstack([v for _, v in ents])
            for g, v in ents:
                assert v.shape == ((a + 1) * (b + 1), g + 1)
                assert np.allclose(v.T @ v, np.eye(g + 1), atol=1e-10)
                total += v @ v.T
            assert np.allclose(total, np.eye(total.shape[0]), atol=1e-10)
            assert np.allclose(cols.T @ cols, np.eye(cols.shape[1]), atol=1e-10)


def test_singlet_q1(su1):
    v = dict(su1.intertwiners(1, 1))[0][:, 0]
    expected = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert min(np.abs(v - expected).max(), np.abs(v + expected).max()) < 1e-12


def test_singlet_q_half(su):
    v = dict(su.intertwiners(1, 1))[0][:, 0]
    q = 0.5
    cands = [np.array([0, 1, -q, 0]) / np.sqrt(1 + q**2), np.array([0, 1, -1 / q, 0]) / np.sqrt(1 + q**-2)]
    assert min(min(np.abs(v - c).max(), np.abs(v + c).max()) for c in cands) < 1e-12


def test_intertwiners_match_sympy_cg_at_q1(su1):
    # basis vector e_j of spin n/2 has magnetic number n/2 - j
    for a in range(4):
        for b in range(4):
            ja, jb = Rational(a, 2), Rational(b, 2)
            for g, v in su1.intertwiners(a, b):
                jg = Rational(g, 2)
                ref = np.zeros_like(v)
                for i in range(a + 1):
                    for k in range(b + 1):
                        for r in range(g + 1):
                            coef = CG(ja, ja - i, jb, jb - k, jg, jg - r).doit()
                            ref[i * (b + 1) + k, r] = float(coef)
                sign = np.sign(np.sum(v * ref))
                assert np.allclose(v, sign * ref, atol=1e-10), (a, b, g)


def test_phase_convention(su):
    for a in range(4):
        for b in range(4):
            for _, v in su.intertwiners(a, b):
                first = v[np.flatnonzero(np.abs(v[:, 0]) > 1e-10)[0], 0]
                assert first > 0


def test_intertwiners_deterministic():
    a = build_instance({"kind": "su_q_2", "q": 0.5}).intertwiners(3, 2)
    b = build_instance({"kind": "su_q_2", "q": 0.5}).intertwiners(3, 2)
    for (g1, v1), (g2, v2) in zip(a, b):
        assert g1 == g2 and np.array_equal(v1, v2)


def test_o_n_has_no_intertwiners(o3):
    with pytest.raises(CapabilityError):
        o3.intertwiners(1, 1)


def test_rank_mismatch_detected(su):
    inst = build_instance({"kind": "su_q_2", "q": 0.5})
    inst._fusion[(1, 1)] = Counter({0: 1, 2: 2})
    with pytest.raises(IntertwinerError):
        inst.intertwiners(1, 1)


def test_q_integer():
    q = 0.5
    for n in range(1, 10):
        closed = (q**n - q**-n) / (q - 1 / q)
        assert q_integer(n, q) == pytest.approx(closed)
        assert q_integer(n, q) == pytest.approx(sum(q ** (n - 1 - 2 * j) for j in range(n)))
    assert q_integer(7, 1.0) == 7


def test_constant_diagonal():
    c = ConstantDiagonal(10**15)
    assert len(c) == 10**15 and c[5] == 1.0 and c[-1] == 1.0
    with pytest.raises(IndexError):
        c[10**15]


def test_enumerate_is_bfs(o3, z2):
    assert list(o3.enumerate_irreps(3)) == [0, 1, 2, 3]
    assert len(list(z2.enumerate_irreps(2))) == 13
