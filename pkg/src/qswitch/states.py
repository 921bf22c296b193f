"""Named kets and single-qubit operators.

The switch uses |on> = |0> and |off> = |1>. Joint kets are ordered
S, A', A, B.
"""

from __future__ import annotations

import math

import numpy as np

from .params import InputParams, SwitchParams
from .qmat import tensor

__all__ = [
    "SwitchParams",
    "InputParams",
    "ket0",
    "ket1",
    "ON",
    "OFF",
    "bell",
    "switch_state",
    "input_qubit",
    "initial_joint",
    "hadamard",
    "pauli",
    "identity",
]

_R2 = 1 / math.sqrt(2)


def _readonly(m):
    m.setflags(write=False)
    return m


ket0 = _readonly(np.array([[1], [0]], dtype=np.complex128))
ket1 = _readonly(np.array([[0], [1]], dtype=np.complex128))
ON = ket0
OFF = ket1

_BELL = {
    "phi+": np.array([1, 0, 0, 1]) * _R2,
    "phi-": np.array([1, 0, 0, -1]) * _R2,
    "psi+": np.array([0, 1, 1, 0]) * _R2,
    "psi-": np.array([0, 1, -1, 0]) * _R2,
}
# accept the unicode minus too
_BELL_ALIASES = {k.replace("-", "−"): k for k in _BELL}


def bell(kind: str) -> np.ndarray:
    """Bell ket as a 4x1 column; ``kind`` in {'phi+', 'phi-', 'psi+', 'psi-'}."""
    key = _BELL_ALIASES.get(kind, kind)
    try:
        return _BELL[key].astype(np.complex128).reshape(4, 1)
    except KeyError:
        raise ValueError(f"unknown Bell state {kind!r}") from None


def switch_state(p: SwitchParams) -> np.ndarray:
    return np.array([[p.alpha], [p.beta]], dtype=np.complex128)


def input_qubit(p: InputParams) -> np.ndarray:
    return np.array([[p.a], [p.b]], dtype=np.complex128)


def initial_joint(s: SwitchParams, q: InputParams) -> np.ndarray:
    """(alpha|on> + beta|off>)_S |psi>_A' |psi->_AB as a 16x1 column."""
    return tensor(switch_state(s), input_qubit(q), bell("psi-"))


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) * _R2


def pauli(axis: str) -> np.ndarray:
    """Pauli matrix for ``axis`` in {'x', 'y', 'z'} (``'i'`` gives the identity)."""
    axis = axis.lower()
    if axis == "x":
        return np.array([[0, 1], [1, 0]], dtype=np.complex128)
    if axis == "y":
        return np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    if axis == "z":
        return np.array([[1, 0], [0, -1]], dtype=np.complex128)
    if axis == "i":
        return identity(2)
    raise ValueError(f"unknown Pauli axis {axis!r}")


def identity(n: int = 2) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)
