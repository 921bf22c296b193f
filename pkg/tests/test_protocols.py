import math

import numpy as np
import pytest
from hypothesis import given

from conftest import phis, thetas
from qswitch import analytic
from qswitch.params import InputParams, SwitchParams
from qswitch.protocols import (
    ProtocolRun,
    average_fidelity,
    averaged,
    branch_model,
    classical_mixture_fidelity,
    classical_mixture_grid,
    pointwise,
    run,
    transfer_tensor,
)
from qswitch.channels import kraus_protocol1, kraus_protocol2
from qswitch.qmat import haar_average

ANY_INPUT = InputParams(1.3, 4.1)
SQ2 = math.sqrt(2)


def test_protocol_run_validation():
    s = SwitchParams(0.5)
    with pytest.raises(ValueError):
        ProtocolRun(3, 1, None, s)
    with pytest.raises(ValueError):
        ProtocolRun(1, 1, "on", s)
    with pytest.raises(ValueError):
        ProtocolRun(1, 2, None, s)
    assert ProtocolRun(2, 2, "off", s).branch == "off"


def test_run_examples():
    r = run(ProtocolRun(1, 1, None, SwitchParams(0.0), ANY_INPUT))
    assert math.isclose(r.fidelity, 1.0, abs_tol=1e-12)
    r = run(ProtocolRun(1, 1, None, SwitchParams(math.pi / 2), ANY_INPUT))
    assert math.isclose(r.fidelity, 0.75, abs_tol=1e-12)
    r = run(ProtocolRun(1, 2, "on", SwitchParams(math.pi / 2, math.pi), ANY_INPUT))
    assert math.isclose(r.fidelity, 0.8, abs_tol=1e-12)
    assert math.isclose(r.probability, 5 / 8, abs_tol=1e-12)
    r = run(ProtocolRun(2, 1, None, SwitchParams(math.pi), InputParams(math.pi / 2, 0.3)))
    assert math.isclose(r.fidelity, 0.5, abs_tol=1e-12)


def test_run_bob_state_is_density():
    r = run(ProtocolRun(2, 2, "off", SwitchParams(2.0, 1.0), ANY_INPUT))
    assert r.bob_state.shape == (2, 2)
    assert math.isclose(np.trace(r.bob_state).real, 1.0, abs_tol=1e-13)


def test_outcome_probabilities_bounded():
    # neither protocol can starve a post-selection branch: P >= 3/8 resp. (16 - sqrt2)/32
    t = np.linspace(0, math.pi, 41)[:, None]
    p = np.linspace(0, 2 * math.pi, 41)[None, :]
    for protocol, floor in ((1, 3 / 8), (2, (16 - SQ2) / 32)):
        for outcome in ("on", "off"):
            _, prob = averaged(protocol, outcome, t, p)
            assert prob.min() >= floor - 1e-12


def test_transfer_tensor_matches_run():
    s, q = SwitchParams(2.2, 0.7), InputParams(0.9, 5.5)
    for protocol, branch in ((1, "trace"), (2, "on"), (2, "off")):
        path, outcome = (1, None) if branch == "trace" else (2, branch)
        direct = run(ProtocolRun(protocol, path, outcome, s, q))
        f, p = pointwise(protocol, branch, s.theta, s.phi, q.theta_prime, q.phi_prime)
        assert math.isclose(float(f), direct.fidelity, abs_tol=1e-13)
        assert math.isclose(float(p), direct.probability, abs_tol=1e-13)


def test_transfer_tensor_shape_and_branch():
    T = transfer_tensor(kraus_protocol1(), "trace")
    assert T.shape == (2,) * 6
    with pytest.raises(ValueError):
        transfer_tensor(kraus_protocol1(), "sideways")


@given(thetas, phis, thetas, phis)
def test_pointwise_matches_closed_form(t, p, tp, pp):
    f1, _ = pointwise(2, "trace", t, p, tp, pp)
    assert math.isclose(float(f1), analytic.f1_pointwise(t, tp), abs_tol=1e-12)
    f2, prob = pointwise(2, "on", t, p, tp, pp)
    assert math.isclose(float(f2), analytic.f2_pointwise(t, p, tp, "on"), abs_tol=1e-12)
    assert math.isclose(float(prob), analytic.p_on_pr2(t, p), abs_tol=1e-12)


@given(thetas, phis)
def test_protocol1_input_independent(t, p):
    rng = np.random.default_rng(7)
    tp = np.arccos(rng.uniform(-1, 1, 200))
    pp = rng.uniform(0, 2 * math.pi, 200)
    for branch in ("trace", "on", "off"):
        f, _ = pointwise(1, branch, t, p, tp, pp)
        assert np.ptp(f) <= 1e-12


def test_quadrature_matches_per_input_average():
    # engine vs. plain per-node average of full runs, on a coarse rule
    s = SwitchParams(1.1, 2.5)
    direct = haar_average(lambda q: run(ProtocolRun(2, 2, "on", s, q)).fidelity, n_theta=6, n_phi=8)
    oracle = (40 + 8 * math.cos(1.1) - 3 * SQ2 * math.sin(1.1) * math.cos(2.5)) / (
        48 - 3 * SQ2 * math.sin(1.1) * math.cos(2.5))
    # six Gauss nodes integrate the degree-4 input polynomial exactly
    assert math.isclose(direct, oracle, abs_tol=1e-12)


def test_average_examples():
    assert math.isclose(average_fidelity(2, 1, None, SwitchParams(math.pi / 2)), 5 / 6, abs_tol=1e-12)
    assert math.isclose(average_fidelity(2, 2, "on", SwitchParams(0.0)), 1.0, abs_tol=1e-12)
    val = average_fidelity(2, 2, "on", SwitchParams(math.pi / 2, math.pi))
    assert math.isclose(val, (40 + 3 * SQ2) / (48 + 3 * SQ2), abs_tol=1e-12)
    assert abs(val - 0.846868) < 1e-6


def test_averaged_vectorised():
    theta = np.array([[0.1, 1.0], [2.0, 3.0]])
    phi = np.full_like(theta, 0.5)
    f, p = averaged(1, "on", theta, phi)
    assert f.shape == p.shape == (2, 2)
    np.testing.assert_allclose(f, analytic.f_pr1_pa2(theta, phi), atol=1e-12)


def test_custom_kraus_not_cached():
    a = branch_model(1, "trace")
    b = branch_model(1, "trace", kraus_protocol1())
    assert a is branch_model(1, "trace") and a is not b
    np.testing.assert_allclose(a.transfer, b.transfer)


def test_classical_mixture_examples():
    assert math.isclose(classical_mixture_fidelity(1, SwitchParams(math.pi / 2)), 0.75, abs_tol=1e-12)
    assert math.isclose(classical_mixture_fidelity(2, SwitchParams(math.pi)), 2 / 3, abs_tol=1e-12)
    assert math.isclose(classical_mixture_fidelity(1, SwitchParams(0.0)), 1.0, abs_tol=1e-12)


def test_classical_mixture_equals_path1():
    theta = np.linspace(0, math.pi, 31)
    for p in (1, 2):
        mix = classical_mixture_grid(p, theta)
        path1, _ = averaged(p, "trace", theta, 0.3)
        np.testing.assert_allclose(mix, path1, atol=1e-12)


def test_kraus_override_changes_result():
    from qswitch.channels import kraus_teleport, perturbed
    bad = kraus_protocol2(perturbed(kraus_teleport(), 1e-3))
    f_bad, _ = averaged(2, "trace", 0.5, 0.0, bad)
    f_ok, _ = averaged(2, "trace", 0.5, 0.0, kraus_protocol2())
    assert abs(float(f_bad) - float(f_ok)) > 1e-6
