"""Closed-form fidelities, path differences and coherence relations.

All scalar functions accept floats or numpy arrays and broadcast. Angles are
in radians. With X = sin(theta) cos(phi) and c = cos(theta), the main forms
are

    Protocol 1, discard switch    (3 + c) / 4
    Protocol 1, post-select on    (3 + c - X) / (4 - X),     P(on) = (4 - X) / 8
    Protocol 2, discard switch    (5 + c) / 6
    Protocol 2, post-select on    (40 + 8c - 3 sqrt2 X) / (48 - 3 sqrt2 X)

and the ``off`` outcome is obtained by X -> -X (i.e. phi -> phi + pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError

SQRT2 = math.sqrt(2.0)

Outcome = Literal["on", "off"]
Branch = Literal["first", "second"]

# tolerance for the (c_z, c_x) consistency check in g1_branch/g2_branch
_PAIR_TOL = 1e-12


def _sign(outcome: str) -> int:
    if outcome == "on":
        return 1
    if outcome == "off":
        return -1
    raise ValueError(f"outcome must be 'on' or 'off', got {outcome!r}")


def _x(theta, phi):
    return np.sin(theta) * np.cos(phi)


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def f_pr1_pa1(theta):
    return _out(0.5 * (1 + np.cos(np.asarray(theta, float) / 2) ** 2))


def f_pr1_pa2(theta, phi, outcome: Outcome = "on"):
    x = _sign(outcome) * _x(theta, phi)
    return _out((3 + np.cos(theta) - x) / (4 - x))


def p_on_pr1(theta, phi, outcome: Outcome = "on"):
    """Probability of the selected switch outcome in Protocol 1 (``on`` by default)."""
    return _out((4 - _sign(outcome) * _x(theta, phi)) / 8)


def d1(theta, phi):
    x = _x(theta, phi)
    return _out(x * (np.cos(theta) - 1) / (4 * (4 - x)))


def d1_max(theta, phi):
    """Best post-selected outcome minus the discard-switch fidelity, Protocol 1."""
    best = np.maximum(f_pr1_pa2(theta, phi, "on"), f_pr1_pa2(theta, phi, "off"))
    return _out(best - f_pr1_pa1(theta))


def d1_abs(theta, phi):
    """|d1|; coincides with :func:`d1_max` only where d1 >= 0."""
    return _out(np.abs(d1(theta, phi)))


def f_pr2_pa1(theta):
    return _out((2 + np.cos(np.asarray(theta, float) / 2) ** 2) / 3)


def f_pr2_pa2(theta, phi, outcome: Outcome = "on"):
    y = 3 * SQRT2 * _sign(outcome) * _x(theta, phi)
    return _out((40 + 8 * np.cos(theta) - y) / (48 - y))


def p_on_pr2(theta, phi, outcome: Outcome = "on"):
    return _out((16 - SQRT2 * _sign(outcome) * _x(theta, phi)) / 32)


def d2(theta, phi):
    x = _x(theta, phi)
    return _out(x * (np.cos(theta) - 1) / (SQRT2 * (48 - 3 * SQRT2 * x)))


def d2_max(theta, phi):
    best = np.maximum(f_pr2_pa2(theta, phi, "on"), f_pr2_pa2(theta, phi, "off"))
    return _out(best - f_pr2_pa1(theta))


def f1_pointwise(theta, theta_p):
    """Protocol 2, discard switch, for one input cos(t'/2)|0> + e^{i p'} sin(t'/2)|1>."""
    a2 = np.cos(np.asarray(theta_p, float) / 2) ** 2
    al2 = np.cos(np.asarray(theta, float) / 2) ** 2
    return _out(al2 + (1 - al2) * (a2**2 + (1 - a2) ** 2))


def f2_pointwise(theta, phi, theta_p, outcome: Outcome = "on"):
    """Protocol 2, post-selected, for one input state (no average)."""
    y = SQRT2 * _sign(outcome) * _x(theta, phi)
    a2 = np.cos(np.asarray(theta_p, float) / 2) ** 2
    al2 = np.cos(np.asarray(theta, float) / 2) ** 2
    return _out((16 * al2 - y + 16 * (1 - al2) * (a2**2 + (1 - a2) ** 2)) / (16 - y))


@dataclass(frozen=True)
class CoherencePair:
    """l1 coherence of the switch in the sigma_z (``c_z``) and sigma_x (``c_x``) bases."""

    c_z: float
    c_x: float


def coherences(theta, phi) -> CoherencePair:
    c_z = np.sin(theta)
    # sqrt(1 - sin^2 cos^2) rewritten without the cancellation near c_x = 0
    c_x = np.sqrt(np.cos(theta) ** 2 + (np.sin(theta) * np.sin(phi)) ** 2)
    return CoherencePair(_out(c_z), _out(c_x))


def _branch_root(c_z, branch: str):
    """sqrt(1 - c_z^2) carrying the sign of cos(theta) on the given theta-branch."""
    c_z = np.asarray(c_z, float)
    root = np.sqrt(np.clip((1 - c_z) * (1 + c_z), 0.0, None))
    if branch == "first":
        return root
    if branch == "second":
        return -root
    raise ValueError(f"branch must be 'first' or 'second', got {branch!r}")


def delta1(c_z, phi, branch: Branch):
    """Protocol 1 path difference written through c_z = sin(theta)."""
    k = np.cos(phi)
    return _out(c_z * k * (_branch_root(c_z, branch) - 1) / (4 * (4 - c_z * k)))


def delta2(c_z, phi, branch: Branch):
    k = np.cos(phi)
    return _out(c_z * k * (_branch_root(c_z, branch) - 1) / (SQRT2 * (48 - 3 * SQRT2 * c_z * k)))


def ddelta1_dcz(c_z, phi, branch: Branch):
    """d(delta1)/d(c_z); singular at c_z = 1, which is rejected."""
    c_z = np.asarray(c_z, dtype=float)
    if np.any(c_z >= 1) or np.any(c_z < 0):
        raise DomainError("ddelta1_dcz needs 0 <= c_z < 1")
    k = np.cos(phi)
    s = np.sqrt(1 - c_z**2)
    if branch == "first":
        num = k * (4 - 4 * s - 8 * c_z**2 + c_z**3 * k)
    elif branch == "second":
        num = -k * (4 + 4 * s - 8 * c_z**2 + c_z**3 * k)
    else:
        raise ValueError(f"branch must be 'first' or 'second', got {branch!r}")
    return _out(num / (4 * (4 - c_z * k) ** 2 * s))


@dataclass(frozen=True)
class Region:
    """Quadrant of the (theta, phi) domain used by the coherence forms.

    ``theta_half`` is ``first`` for theta <= pi/2; ``phi_half`` is ``inner``
    for pi/2 <= phi <= 3 pi/2. Boundaries go to ``first``/``inner``.
    """

    theta_half: Literal["first", "second"]
    phi_half: Literal["inner", "outer"]

    def __post_init__(self):
        if self.theta_half not in ("first", "second"):
            raise ValueError(f"bad theta_half {self.theta_half!r}")
        if self.phi_half not in ("inner", "outer"):
            raise ValueError(f"bad phi_half {self.phi_half!r}")

    @property
    def roman(self) -> str:
        return {
            ("first", "outer"): "i",
            ("first", "inner"): "ii",
            ("second", "outer"): "iii",
            ("second", "inner"): "iv",
        }[self.theta_half, self.phi_half]


def classify_region(theta: float, phi: float) -> Region:
    theta_half = "first" if theta <= math.pi / 2 else "second"
    phi_half = "inner" if math.pi / 2 <= phi <= 3 * math.pi / 2 else "outer"
    return Region(theta_half, phi_half)


def _check_pair(c_z, c_x):
    c_z = np.asarray(c_z, float)
    c_x = np.asarray(c_x, float)
    bad = (
        (c_z < -_PAIR_TOL) | (c_z > 1 + _PAIR_TOL) | (c_x < -_PAIR_TOL) | (c_x > 1 + _PAIR_TOL)
        | (1 - c_x**2 > c_z**2 + _PAIR_TOL)
    )
    if np.any(bad):
        raise DomainError("inconsistent coherence pair: need 0<=c_z,c_x<=1 and 1-c_x^2 <= c_z^2")
    return c_z, c_x


def _g_parts(c_z, c_x, region: Region):
    c_z, c_x = _check_pair(c_z, c_x)
    # |sin(theta) cos(phi)| and cos(theta)
    u = np.sqrt(np.clip((1 - c_x) * (1 + c_x), 0.0, None))
    cos_t = _branch_root(c_z, region.theta_half)
    # sign of cos(phi)
    sgn = -1.0 if region.phi_half == "inner" else 1.0
    return u, cos_t, sgn


def g1_branch(c_z, c_x, region: Region):
    """Protocol 1 path difference as a function of both coherences."""
    u, cos_t, sgn = _g_parts(c_z, c_x, region)
    return _out(sgn * u * (cos_t - 1) / (4 * (4 - sgn * u)))


def g2_branch(c_z, c_x, region: Region):
    u, cos_t, sgn = _g_parts(c_z, c_x, region)
    return _out(sgn * u * (cos_t - 1) / (SQRT2 * (48 - 3 * SQRT2 * sgn * u)))


def classical_threshold_pr1pa1() -> float:
    """Largest theta (radians) with f_pr1_pa1 >= 2/3, i.e. cos^2(theta/2) = 1/3.

    About 1.9106 rad (109.47 degrees).
    """
    return 2 * math.acos(1 / math.sqrt(3))


# grid column name -> report label
COLUMNS = {
    "f_p1pa1": "F_Pr1Pa1",
    "f_p1pa2_on": "F_Pr1Pa2_on",
    "f_p1pa2_off": "F_Pr1Pa2_off",
    "p_on_p1": "P_on",
    "d1": "D1",
    "d1max": "D1max",
    "f_p2pa1": "F_Pr2Pa1",
    "f_p2pa2_on": "F_Pr2Pa2_on",
    "f_p2pa2_off": "F_Pr2Pa2_off",
    "d2": "D2",
    "d2max": "D2max",
    "c_z": "c_z",
    "c_x": "c_x",
}

PROTOCOL_COLUMNS = {
    1: ("f_p1pa1", "f_p1pa2_on", "f_p1pa2_off", "p_on_p1", "d1", "d1max"),
    2: ("f_p2pa1", "f_p2pa2_on", "f_p2pa2_off", "d2", "d2max"),
}


def grid_values(theta, phi) -> dict[str, np.ndarray]:
    """Every closed-form grid column evaluated on broadcast (theta, phi)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    coh = coherences(theta, phi)
    return {
        "f_p1pa1": np.broadcast_to(f_pr1_pa1(theta), theta.shape),
        "f_p1pa2_on": f_pr1_pa2(theta, phi, "on"),
        "f_p1pa2_off": f_pr1_pa2(theta, phi, "off"),
        "p_on_p1": p_on_pr1(theta, phi),
        "d1": d1(theta, phi),
        "d1max": d1_max(theta, phi),
        "f_p2pa1": np.broadcast_to(f_pr2_pa1(theta), theta.shape),
        "f_p2pa2_on": f_pr2_pa2(theta, phi, "on"),
        "f_p2pa2_off": f_pr2_pa2(theta, phi, "off"),
        "d2": d2(theta, phi),
        "d2max": d2_max(theta, phi),
        "c_z": np.asarray(coh.c_z),
        "c_x": np.asarray(coh.c_x),
    }


@dataclass
class FidelityReport:
    """All closed-form values at one switch setting, optionally with numeric twins."""

    theta: float
    phi: float
    analytic: dict[str, float]
    numeric: dict[str, float] | None = None
    discrepancies: dict[str, float] = field(default_factory=dict)

    @property
    def max_abs_discrepancy(self) -> float | None:
        if not self.discrepancies:
            return None
        return max(self.discrepancies.values())

    def attach_numeric(self, numeric: dict[str, float]) -> None:
        self.numeric = dict(numeric)
        self.discrepancies = {
            k: abs(self.analytic[k] - v) for k, v in numeric.items() if k in self.analytic
        }

    def as_dict(self) -> dict:
        out = {"theta": self.theta, "phi": self.phi, "analytic": self.analytic}
        if self.numeric is not None:
            out["numeric"] = self.numeric
            out["discrepancies"] = self.discrepancies
            out["max_abs_discrepancy"] = self.max_abs_discrepancy
        return out


def report(theta: float, phi: float) -> FidelityReport:
    """Closed-form :class:`FidelityReport` at one (theta, phi)."""
    values = {COLUMNS[k]: float(v) for k, v in grid_values(theta, phi).items()}
    branch = "first" if theta <= math.pi / 2 else "second"
    region = classify_region(theta, phi)
    c_z, c_x = values["c_z"], values["c_x"]
    values.update(
        Delta1=delta1(c_z, phi, branch),
        Delta2=delta2(c_z, phi, branch),
        G1=g1_branch(c_z, c_x, region),
        G2=g2_branch(c_z, c_x, region),
    )
    return FidelityReport(float(theta), float(phi), values)
