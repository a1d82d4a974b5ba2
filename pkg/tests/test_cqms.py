import math

import numpy as np
import pytest

from qgrd import CapabilityError, GroupAlgElement, QGError, TruncationError
from qgrd.cqms import State, c_n, constraint_norm, distance, evaluate, total_boundedness_probe
from qgrd.rd import rd_test

u = GroupAlgElement.coefficient


def test_state_examples(su, z):
    x = u(su, 2, 1, 1)
    assert evaluate(State.haar(su), x) == 0
    eps = State.counit(su)
    assert evaluate(eps, u(su, 2, 1, 1)) == 1 and evaluate(eps, u(su, 2, 0, 1)) == 0
    z0 = np.exp(0.7j)
    ch = State.character(z, z0)
    for n in range(-4, 5):
        assert evaluate(ch, u(z, n, 0, 0)) == pytest.approx(z0**n)


def test_state_errors(su, o3, z):
    with pytest.raises(CapabilityError):
        State.counit(o3)
    with pytest.raises(CapabilityError):
        State.character(su, 1)
    with pytest.raises(QGError):
        State.character(z, 2.0)


def test_free_group_character(f2):
    ch = State.character(f2, (1j, -1))
    assert evaluate(ch, u(f2, (1, -2, 1), 0, 0)) == pytest.approx(1j * -1 * 1j)


def test_vector_state(su, su_len):
    basis_one = State.vector_state(su_len, 2, np.r_[1.0, np.zeros(1 + 4 + 9 - 1)])
    assert basis_one.evaluate(u(su, 1, 0, 0) + GroupAlgElement.one(su)) == pytest.approx(1)
    with pytest.raises(QGError):
        State.vector_state(su_len, 2, np.zeros(3))
    with pytest.raises(TruncationError):
        basis_one.evaluate(u(su, 3, 0, 0))


def test_identical_states(z, z_len):
    res = distance(State.haar(z), State.haar(z), 1, z_len, 4)
    assert res.value == 0 and not res.certificate.blocks


@pytest.fixture(scope="module")
def z_dist(z, z_len):
    pts = {"1": 1.0, "i": 1j, "-1": -1.0}
    states = {k: State.character(z, v) for k, v in pts.items()}
    out = {}
    for a in pts:
        for b in pts:
            if a != b:
                out[a, b] = distance(states[a], states[b], 1, z_len, 3, 8)
    return out


def test_distance_certificate(z_dist):
    for res in z_dist.values():
        assert res.feasibility_residual <= 1e-6
        assert res.value > 0
        assert res.objective_check == pytest.approx(res.value, rel=1e-8)
        assert res.converged


def test_distance_symmetric(z_dist):
    for (a, b), res in z_dist.items():
        assert res.value == pytest.approx(z_dist[b, a].value, rel=1e-5)


def test_distance_triangle(z_dist):
    d = {k: v.value for k, v in z_dist.items()}
    assert d["1", "-1"] <= d["1", "i"] + d["i", "-1"] + 1e-6


def test_distance_scales_with_bound(z, z_len):
    mu, nu = State.character(z, 1.0), State.character(z, -1.0)
    one = distance(mu, nu, 1, z_len, 3, 8)
    two = distance(mu, nu, 1, z_len, 3, 8, bound=2.0)
    assert two.value == pytest.approx(2 * one.value, rel=1e-5)


def test_distance_certificate_selfadjoint(z_dist, z):
    from qgrd.grp_alg import adjoint, haar_state

    cert = z_dist["1", "-1"].certificate
    assert adjoint(cert).allclose(cert, atol=1e-12)
    assert haar_state(cert) == 0


def test_distance_seminorm_recomputed(z, z_len, z_dist):
    res = z_dist["1", "-1"]
    assert constraint_norm(res.certificate, 1, z_len, 8) == pytest.approx(res.seminorm, rel=1e-9)


def test_distance_errors(z, z_len, su_len):
    mu = State.character(z, 1.0)
    with pytest.raises(QGError):
        distance(mu, State.haar(z), 0, z_len, 3)
    with pytest.raises(TruncationError):
        distance(mu, State.haar(z), 1, z_len, 4, M_op=3)
    with pytest.raises(QGError):
        distance(mu, State.haar(z), 1, su_len, 3)


def test_distance_haar_counit_su(su, su_len):
    res = distance(State.haar(su), State.counit(su), 1, su_len, 1, 3)
    assert res.value > 0 and res.feasibility_residual <= 1e-6


def test_c_n_example(z, z_len):
    assert c_n(z, z_len, 4, 2) == pytest.approx(math.sqrt(2 * sum(m**-4 for m in range(1, 5))), rel=1e-14)
    assert c_n(z, z_len, 4, 2) == pytest.approx(1.468844395, abs=1e-9)


def test_c_n_counts_dim_cubed(su, su_len):
    assert c_n(su, su_len, 2, 1) == pytest.approx(math.sqrt(8 / 1 + 27 / 4))


def test_probe_su(su, su_len):
    rep = rd_test(su, su_len, 4, samples=5)
    probe = total_boundedness_probe(su, 3, None, 2, su_len, samples=10, rd_report=rep)
    assert probe.low_violations == 0 and probe.tail_violations == 0
    assert probe.to_dict()["samples"] == 10


def test_probe_requires_constants(su, su_len):
    with pytest.raises(QGError):
        total_boundedness_probe(su, 3, None, 2, su_len, samples=1)
    with pytest.raises(QGError):
        total_boundedness_probe(su, 1, 2.0, 2, su_len, samples=1, c_est=1.0)
