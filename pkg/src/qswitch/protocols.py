"""Numerical execution of the switched teleportation protocols.

Nothing here uses a closed-form fidelity. Single runs push the full
16-dimensional state through the Kraus set. Grid evaluation uses the
*transfer tensor* of a protocol branch: the map from (switch operator,
input operator) to Bob's unnormalized state, obtained by running the
same Kraus pipeline on the 16 operator-basis inputs
``|s><s'| (x) |i><j| (x) |psi-><psi-|``. The map is linear, so contracting
the tensor against any switch/input pair reproduces a full run exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import channels
from .channels import KrausSet, postselect_switch, switch_branch
from .errors import DegeneratePostselection
from .params import InputParams, SwitchParams
from .qmat import (
    FULL,
    SYSTEM,
    apply_kraus,
    fidelity_to_pure,
    haar_average_values,
    haar_nodes,
    partial_trace,
    projector,
    tensor,
)
from .states import bell, initial_joint, input_qubit

PROTOCOLS = (1, 2)
BRANCHES = ("trace", "on", "off")

# rows of the (switch coefficients x node) contraction done per batch
_CHUNK = 2048


@dataclass(frozen=True)
class ProtocolRun:
    """Which protocol/path/outcome to run, at which switch and input parameters."""

    protocol: int
    path: int
    outcome: Optional[str]
    switch: SwitchParams
    input: InputParams = InputParams(0.0, 0.0)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be 1 or 2, got {self.protocol!r}")
        if self.path not in (1, 2):
            raise ValueError(f"path must be 1 or 2, got {self.path!r}")
        if self.path == 1 and self.outcome is not None:
            raise ValueError("path 1 discards the switch; outcome must be None")
        if self.path == 2 and self.outcome not in channels.OUTCOMES:
            raise ValueError(f"path 2 needs outcome 'on' or 'off', got {self.outcome!r}")

    @property
    def branch(self) -> str:
        return "trace" if self.path == 1 else self.outcome


@dataclass(frozen=True)
class RunResult:
    bob_state: np.ndarray
    fidelity: float
    probability: float


def kraus_for(protocol: int) -> KrausSet:
    if protocol == 1:
        return channels.kraus_protocol1()
    if protocol == 2:
        return channels.kraus_protocol2()
    raise ValueError(f"protocol must be 1 or 2, got {protocol!r}")


def _to_system(evolved: np.ndarray, branch: str) -> np.ndarray:
    if branch == "trace":
        return partial_trace(evolved, FULL, SYSTEM.labels)
    return switch_branch(evolved, branch)


def run(r: ProtocolRun, kraus: KrausSet | None = None) -> RunResult:
    """Evolve |xi><xi| through the protocol and read out Bob's qubit."""
    kraus = kraus if kraus is not None else kraus_for(r.protocol)
    xi = initial_joint(r.switch, r.input)
    evolved = apply_kraus(projector(xi), kraus.ops)
    if r.path == 1:
        system = partial_trace(evolved, FULL, SYSTEM.labels)
        prob = 1.0
    else:
        system, prob = postselect_switch(evolved, r.outcome)
    bob = partial_trace(system, SYSTEM, {"B"})
    return RunResult(bob, fidelity_to_pure(bob, input_qubit(r.input)), prob)


def transfer_tensor(kraus: KrausSet, branch: str) -> np.ndarray:
    """``T[s, s', i, j]`` = Bob's unnormalized 2x2 state for the basis input.

    Shape ``(2, 2, 2, 2, 2, 2)``; the last two axes index Bob's matrix.
    """
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}, got {branch!r}")
    singlet = projector(bell("psi-"))
    eye = np.eye(2, dtype=np.complex128)
    out = np.empty((2,) * 6, dtype=np.complex128)
    for s in range(2):
        for s2 in range(2):
            for i in range(2):
                for j in range(2):
                    rho_in = tensor(np.outer(eye[s], eye[s2]), np.outer(eye[i], eye[j]), singlet)
                    system = _to_system(apply_kraus(rho_in, kraus.ops), branch)
                    out[s, s2, i, j] = partial_trace(system, SYSTEM, {"B"})
    out.setflags(write=False)
    return out


def switch_amplitudes(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    alpha = np.cos(theta / 2).astype(np.complex128)
    beta = np.exp(1j * phi) * np.sin(theta / 2)
    return np.stack(np.broadcast_arrays(alpha, beta), axis=-1)


def input_amplitudes(theta_p, phi_p) -> np.ndarray:
    return switch_amplitudes(theta_p, phi_p)


def _switch_features(theta, phi) -> np.ndarray:
    """Real coordinates (|alpha|^2, |beta|^2, Re ab*, Im ab*) of the switch operator."""
    amp = switch_amplitudes(np.ravel(theta), np.ravel(phi))
    alpha, beta = amp[:, 0], amp[:, 1]
    cross = alpha * beta.conj()
    return np.column_stack([np.abs(alpha) ** 2, np.abs(beta) ** 2, cross.real, cross.imag])


def _input_responses(T: np.ndarray, q: np.ndarray):
    """Per-input real response rows for <q|bob|q> and Tr(bob).

    Each returned array has shape (4, m) and is dotted with switch features.
    """
    rho_a = np.einsum("mi,mj->mij", q, q.conj())
    overlap = np.einsum("mij,stijab,ma,mb->mst", rho_a, T, q.conj(), q)
    trace = np.einsum("mij,stijaa->mst", rho_a, T)

    def real_rows(w):
        return np.stack([
            w[:, 0, 0].real,
            w[:, 1, 1].real,
            (w[:, 0, 1] + w[:, 1, 0]).real,
            -(w[:, 0, 1] - w[:, 1, 0]).imag,
        ])

    return real_rows(overlap), real_rows(trace)


@dataclass(frozen=True)
class BranchModel:
    """Transfer tensor of one protocol branch plus its quadrature responses.

    ``w_fid``/``w_tr`` hold, per Haar node, the real rows that turn switch
    features into <psi|bob|psi> and Tr(bob).
    """

    branch: str
    transfer: np.ndarray
    w_fid: np.ndarray
    w_tr: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, kraus: KrausSet, branch: str) -> "BranchModel":
        T = transfer_tensor(kraus, branch)
        tp, pp, weights = haar_nodes()
        w_fid, w_tr = _input_responses(T, input_amplitudes(tp, pp))
        for arr in (w_fid, w_tr):
            arr.setflags(write=False)
        return cls(branch, T, w_fid, w_tr, weights)

    def pointwise(self, theta, phi, theta_p, phi_p):
        theta, phi, theta_p, phi_p = np.broadcast_arrays(
            *(np.asarray(x, dtype=float) for x in (theta, phi, theta_p, phi_p))
        )
        shape = theta.shape
        c = _switch_features(theta, phi)
        w_fid, w_tr = _input_responses(self.transfer, input_amplitudes(theta_p.ravel(), phi_p.ravel()))
        num = np.einsum("nk,kn->n", c, w_fid)
        den = np.einsum("nk,kn->n", c, w_tr)
        if self.branch == "trace":
            return num.reshape(shape), den.reshape(shape)
        _check_probability(den, self.branch)
        return (num / den).reshape(shape), den.reshape(shape)

    def averaged(self, theta, phi):
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        shape = theta.shape
        c = _switch_features(theta, phi)
        prob = c @ haar_average_values(self.w_tr, self.weights)
        if self.branch == "trace":
            fid = c @ haar_average_values(self.w_fid, self.weights)
            return fid.reshape(shape), prob.reshape(shape)
        fid = np.empty(len(c))
        for start in range(0, len(c), _CHUNK):
            block = c[start:start + _CHUNK]
            den = block @ self.w_tr
            _check_probability(den, self.branch)
            fid[start:start + _CHUNK] = haar_average_values((block @ self.w_fid) / den, self.weights)
        return fid.reshape(shape), prob.reshape(shape)


@lru_cache(maxsize=None)
def _default_model(protocol: int, branch: str) -> BranchModel:
    return BranchModel.build(kraus_for(protocol), branch)


def branch_model(protocol: int, branch: str, kraus: KrausSet | None = None) -> BranchModel:
    """Engine for one protocol branch; cached unless a custom Kraus set is given."""
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}, got {branch!r}")
    if kraus is None:
        return _default_model(protocol, branch)
    return BranchModel.build(kraus, branch)


def pointwise(protocol, branch, theta, phi, theta_p, phi_p, kraus: KrausSet | None = None):
    """Fidelity and branch probability for paired switch/input parameter arrays.

    All four angle arrays broadcast together. Path-1 fidelities are not
    renormalized; path-2 ones are conditioned on the outcome.
    """
    return branch_model(protocol, branch, kraus).pointwise(theta, phi, theta_p, phi_p)


def _check_probability(den, branch):
    low = float(np.min(den)) if np.size(den) else 1.0
    if low < channels.POSTSELECT_MIN_PROB:
        raise DegeneratePostselection(f"P({branch}) = {low:.3e} at some grid point")


def averaged(protocol, branch, theta, phi, kraus: KrausSet | None = None):
    """Haar-averaged fidelity and probability over a set of switch parameters.

    Returns two arrays shaped like the broadcast of ``theta`` and ``phi``.
    """
    return branch_model(protocol, branch, kraus).averaged(theta, phi)


def average_fidelity(protocol: int, path: int, outcome: str | None, s: SwitchParams,
                     kraus: KrausSet | None = None) -> float:
    """Uniform average over input qubits of the run fidelity."""
    r = ProtocolRun(protocol, path, outcome, s)
    fid, _ = averaged(protocol, r.branch, s.theta, s.phi, kraus)
    return float(fid)


def classical_mixture_fidelity(protocol: int, s: SwitchParams,
                               kraus: KrausSet | None = None) -> float:
    """Fidelity when the singlet is present with probability |alpha|^2 instead of in superposition."""
    return float(classical_mixture_grid(protocol, s.theta, kraus))


def classical_mixture_grid(protocol: int, theta, kraus: KrausSet | None = None):
    """Vectorised :func:`classical_mixture_fidelity`; depends on theta only.

    Bob's states from the pure |on> and pure |off> runs are mixed with
    weights cos^2(theta/2), sin^2(theta/2) at every input node, then averaged.
    """
    theta = np.asarray(theta, dtype=float)
    model = branch_model(protocol, "trace", kraus)
    tp, pp, weights = haar_nodes()
    q = input_amplitudes(tp, pp)
    on = _bob_states(model.transfer, 0.0, q)
    off = _bob_states(model.transfer, math.pi, q)
    f_on = np.einsum("ma,mab,mb->m", q.conj(), on, q).real
    f_off = np.einsum("ma,mab,mb->m", q.conj(), off, q).real
    w_on = np.cos(theta / 2) ** 2
    # <q|w rho_on + (1-w) rho_off|q>, node by node
    mixed = np.multiply.outer(w_on, f_on) + np.multiply.outer(1 - w_on, f_off)
    return haar_average_values(mixed, weights)


def _bob_states(T, theta, q):
    sv = switch_amplitudes(theta, 0.0)
    rho_s = np.outer(sv, sv.conj())
    rho_a = np.einsum("mi,mj->mij", q, q.conj())
    return np.einsum("st,mij,stijab->mab", rho_s, rho_a, T)
