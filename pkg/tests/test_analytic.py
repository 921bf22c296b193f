import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import phis, thetas
from qswitch import analytic as an
from qswitch.errors import DomainError

PI = math.pi
SQ2 = math.sqrt(2)
D2_EQUATOR = 1 / (SQ2 * (48 + 3 * SQ2))


def close(a, b, tol=1e-12):
    return math.isclose(a, b, rel_tol=0, abs_tol=tol)


def test_path1_values():
    assert an.f_pr1_pa1(0) == 1.0
    assert close(an.f_pr1_pa1(PI), 0.5)
    assert close(an.f_pr1_pa1(PI / 2), 0.75)
    assert an.f_pr2_pa1(0) == 1.0
    assert close(an.f_pr2_pa1(PI), 2 / 3)
    assert close(an.f_pr2_pa1(PI / 2), 5 / 6)


def test_path2_values():
    assert close(an.f_pr1_pa2(0, 1.234), 1.0)
    assert close(an.f_pr1_pa2(PI / 2, 0), 2 / 3)
    assert close(an.f_pr1_pa2(PI / 2, PI), 0.8)
    assert close(an.f_pr2_pa2(0, 2.0), 1.0)
    assert close(an.f_pr2_pa2(PI, 2.0), 2 / 3)
    assert close(an.f_pr2_pa2(PI / 2, PI), (40 + 3 * SQ2) / (48 + 3 * SQ2))


def test_probabilities():
    assert close(an.p_on_pr1(0, 0), 0.5)
    assert close(an.p_on_pr1(PI / 2, 0), 3 / 8)
    assert close(an.p_on_pr1(PI / 2, PI), 5 / 8)
    assert close(an.p_on_pr1(PI / 2, PI, "off"), 3 / 8)


def test_differences():
    assert an.d1(0, 1.0) == 0.0
    assert close(an.d1(PI / 2, PI), 1 / 20)
    assert close(an.d1_max(PI / 2, PI / 2), 0.0)
    assert an.d2(0, 1.0) == 0.0
    assert close(an.d2(PI / 2, PI), D2_EQUATOR)
    assert close(an.d2_max(PI / 2, PI / 2), 0.0)


def test_d1_max_is_best_outcome_not_abs():
    # with phi = 0 the off outcome wins; |d1| would report the on-outcome loss instead
    t, p = 2.0, 0.0
    best = max(an.f_pr1_pa2(t, p, "on"), an.f_pr1_pa2(t, p, "off")) - an.f_pr1_pa1(t)
    assert close(an.d1_max(t, p), best)
    assert not close(an.d1_abs(t, p), best, 1e-6)


def test_bad_outcome():
    with pytest.raises(ValueError):
        an.f_pr1_pa2(1.0, 1.0, "up")


@given(thetas, phis)
def test_difference_definitions(t, p):
    assert close(an.d1(t, p), an.f_pr1_pa2(t, p) - an.f_pr1_pa1(t))
    assert close(an.d2(t, p), an.f_pr2_pa2(t, p) - an.f_pr2_pa1(t))
    assert an.d1_max(t, p) >= -1e-12 and an.d2_max(t, p) >= -1e-12


@given(thetas, phis)
def test_off_is_phase_shifted_on(t, p):
    shifted = (p + PI) % (2 * PI)
    assert close(an.f_pr1_pa2(t, p, "off"), an.f_pr1_pa2(t, shifted, "on"))
    assert close(an.f_pr2_pa2(t, p, "off"), an.f_pr2_pa2(t, shifted, "on"))
    assert close(an.p_on_pr1(t, p) + an.p_on_pr1(t, p, "off"), 1.0)
    assert close(an.p_on_pr2(t, p) + an.p_on_pr2(t, p, "off"), 1.0)


@given(thetas, phis)
def test_ranges(t, p):
    assert 0.5 - 1e-15 <= an.f_pr1_pa1(t) <= 1
    assert 2 / 3 - 1e-15 <= an.f_pr2_pa1(t) <= 1
    assert 0.5 < an.f_pr2_pa2(t, p) <= 1 + 1e-15
    assert 3 / 8 - 1e-15 <= an.p_on_pr1(t, p) <= 5 / 8 + 1e-15


@given(thetas, thetas)
def test_pointwise_averages_to_path1(t, _):
    # the quartic input moment averages to 2/3
    from qswitch.qmat import haar_average
    avg = haar_average(lambda q: an.f1_pointwise(t, q.theta_prime), n_theta=8, n_phi=2)
    assert close(avg, an.f_pr2_pa1(t))


def test_coherences():
    c = an.coherences(PI / 2, 0)
    assert close(c.c_z, 1) and close(c.c_x, 0)
    c = an.coherences(0, 2.5)
    assert close(c.c_z, 0) and close(c.c_x, 1)
    c = an.coherences(PI / 2, PI / 2)
    assert close(c.c_z, 1) and close(c.c_x, 1)


def test_delta_examples():
    assert an.delta1(0.0, 2.0, "first") == 0.0
    assert close(an.delta1(1.0, PI, "first"), 1 / 20)
    assert close(an.delta1(1.0, PI, "second"), 1 / 20)
    assert close(an.delta2(1.0, PI, "first"), D2_EQUATOR)
    with pytest.raises(ValueError):
        an.delta1(0.5, 1.0, "third")


@given(thetas, phis)
def test_delta_matches_d(t, p):
    branch = "first" if t <= PI / 2 else "second"
    c_z = math.sin(t)
    # arcsin round-trip loses digits near theta = pi/2
    tol = 1e-12 + 1e-16 / max(abs(math.cos(t)), 1e-4)
    assert close(an.delta1(c_z, p, branch), an.d1(t, p), tol)
    assert close(an.delta2(c_z, p, branch), an.d2(t, p), tol)


def test_derivative_witnesses():
    assert abs(an.ddelta1_dcz(0.0, PI, "second") - 0.125) <= 1e-6
    assert abs(an.ddelta1_dcz(0.9, PI, "second") - (-0.035)) <= 1e-3
    assert an.ddelta1_dcz(0.0, 0.0, "first") == 0.0


@given(st.floats(0.0, 0.99), phis, st.sampled_from(["first", "second"]))
def test_derivative_matches_finite_difference(c, p, branch):
    h = 1e-6
    lo = max(c - h, 0.0)
    fd = (an.delta1(c + h, p, branch) - an.delta1(lo, p, branch)) / (c + h - lo)
    assert abs(an.ddelta1_dcz(c, p, branch) - fd) <= 1e-6


def test_derivative_domain():
    with pytest.raises(DomainError):
        an.ddelta1_dcz(1.0, PI, "first")
    with pytest.raises(DomainError):
        an.ddelta1_dcz(-0.1, PI, "first")


def test_regions():
    assert an.classify_region(PI / 4, PI) == an.Region("first", "inner")
    assert an.classify_region(3 * PI / 4, 0) == an.Region("second", "outer")
    assert an.classify_region(PI / 2, PI / 2) == an.Region("first", "inner")
    assert an.Region("second", "inner").roman == "iv"
    with pytest.raises(ValueError):
        an.Region("middle", "inner")


def test_region_tie_is_observationally_irrelevant():
    c_z, c_x = 1.0, 1.0  # theta = phi = pi/2
    values = {an.g1_branch(c_z, c_x, an.Region(a, b))
              for a in ("first", "second") for b in ("inner", "outer")}
    assert max(values) - min(values) <= 1e-15


def test_g_examples():
    iv = an.Region("second", "inner")
    assert close(an.g1_branch(1.0, 0.0, iv), 1 / 20)
    assert close(an.g2_branch(1.0, 0.0, iv), D2_EQUATOR)
    for th in ("first", "second"):
        for ph in ("inner", "outer"):
            assert an.g1_branch(0.5, 1.0, an.Region(th, ph)) == 0.0


def test_g_rejects_inconsistent_pair():
    with pytest.raises(DomainError):
        an.g1_branch(0.1, 0.1, an.Region("first", "inner"))


@given(thetas, phis)
def test_g_matches_d(t, p):
    assume(abs(t - PI / 2) > 1e-3)
    c = an.coherences(t, p)
    region = an.classify_region(t, p)
    assert close(an.g1_branch(c.c_z, c.c_x, region), an.d1(t, p), 1e-11)
    assert close(an.g2_branch(c.c_z, c.c_x, region), an.d2(t, p), 1e-11)


def test_threshold():
    t = an.classical_threshold_pr1pa1()
    assert close(t, 2 * math.acos(1 / math.sqrt(3)))
    # cos^2(t/2) = 1/3; 141.06 deg is 2 arccos(1/3), where f is only 5/9
    assert abs(math.degrees(t) - 109.4712) <= 1e-4
    assert close(an.f_pr1_pa1(2 * math.acos(1 / 3)), 5 / 9)
    assert close(an.f_pr1_pa1(t), 2 / 3)
    assert an.f_pr1_pa1(t - 0.01) > 2 / 3


def test_grid_values_vectorised():
    t = np.linspace(0, PI, 5)[:, None]
    p = np.linspace(0, 2 * PI, 7)[None, :]
    vals = an.grid_values(t, p)
    assert set(vals) == set(an.COLUMNS)
    assert all(v.shape == (5, 7) for v in vals.values())


def test_report():
    rep = an.report(PI / 2, 0.0)
    assert close(rep.analytic["F_Pr1Pa2_on"], 2 / 3)
    assert close(rep.analytic["P_on"], 0.375)
    assert rep.max_abs_discrepancy is None
    rep.attach_numeric({"P_on": 0.375 + 1e-13})
    assert rep.max_abs_discrepancy == pytest.approx(1e-13, abs=1e-15)
    assert "discrepancies" in rep.as_dict()
