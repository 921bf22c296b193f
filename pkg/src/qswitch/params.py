"""Bloch-sphere parameters for the switch qubit and the qubit to be teleported."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# absorbs roundoff from degree conversion; anything further out is rejected
_ANGLE_SLACK = 1e-12


def _check_angle(name: str, value: float, upper: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < -_ANGLE_SLACK or value > upper + _ANGLE_SLACK:
        raise DomainError(f"{name}={value!r} outside [0, {upper:.12g}]")
    return min(max(value, 0.0), upper)


@dataclass(frozen=True)
class SwitchParams:
    """Switch state ``cos(theta/2)|on> + exp(i phi) sin(theta/2)|off>``.

    ``theta`` must lie in [0, pi] and ``phi`` in [0, 2 pi]. Values are
    validated, never wrapped.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", _check_angle("theta", self.theta, math.pi))
        object.__setattr__(self, "phi", _check_angle("phi", self.phi, 2 * math.pi))

    @property
    def alpha(self) -> complex:
        return complex(math.cos(self.theta / 2))

    @property
    def beta(self) -> complex:
        return complex(math.cos(self.phi), math.sin(self.phi)) * math.sin(self.theta / 2)


@dataclass(frozen=True)
class InputParams:
    """Input qubit ``cos(theta'/2)|0> + exp(i phi') sin(theta'/2)|1>``."""

    theta_prime: float
    phi_prime: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "theta_prime", _check_angle("theta_prime", self.theta_prime, math.pi)
        )
        object.__setattr__(
            self, "phi_prime", _check_angle("phi_prime", self.phi_prime, 2 * math.pi)
        )

    @property
    def a(self) -> complex:
        return complex(math.cos(self.theta_prime / 2))

    @property
    def b(self) -> complex:
        phase = complex(math.cos(self.phi_prime), math.sin(self.phi_prime))
        return phase * math.sin(self.theta_prime / 2)
