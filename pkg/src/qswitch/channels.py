"""Kraus families for switched teleportation and the switch read-out step."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CompletenessError, DegeneratePostselection, DimensionError
from .qmat import FULL, SYSTEM, SubsystemLayout, as_matrix, kraus_residual, projector, stack_ops, tensor
from .states import OFF, ON, bell, hadamard, identity, ket0, ket1, pauli

COMPLETENESS_TOL = 1e-12
POSTSELECT_MIN_PROB = 1e-14

OUTCOMES = ("on", "off")


@dataclass(frozen=True)
class KrausSet:
    """Immutable stack of Kraus operators acting on ``layout``.

    Completeness is validated on construction unless ``check=False``; the
    unchecked form exists only for fault injection.
    """

    ops: np.ndarray
    layout: SubsystemLayout
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        ops = np.array(stack_ops(self.ops), copy=True)
        if ops.shape[1] != self.layout.dim:
            raise DimensionError(
                f"Kraus dimension {ops.shape[1]} does not match layout {self.layout.labels}"
            )
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        if self.check:
            res = self.residual()
            if res > COMPLETENESS_TOL:
                raise CompletenessError(f"sum E^dag E deviates from I by {res:.3e}")

    def __len__(self):
        return self.ops.shape[0]

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, i):
        return self.ops[i]

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    def residual(self) -> float:
        return kraus_residual(self.ops)


def _basis3(bits: str) -> np.ndarray:
    kets = {"0": ket0, "1": ket1}
    return tensor(*(kets[b] for b in bits))


def _outer3(ket_bits: str, bra_bits: str) -> np.ndarray:
    return _basis3(ket_bits) @ _basis3(bra_bits).conj().T


@lru_cache(maxsize=None)
def kraus_teleport() -> KrausSet:
    """Bell measurement on A'A, Bob's Pauli correction, and Alice's reset of A'A to the singlet."""
    i2 = identity(2)
    k = [tensor(projector(bell("psi-")), i2)]
    for bell_kind, axis in (("psi+", "z"), ("phi-", "x"), ("phi+", "y")):
        s = pauli(axis)
        alice_fix = tensor(i2, s, i2)
        k.append(alice_fix @ tensor(projector(bell(bell_kind)), s))
    return KrausSet(np.array(k), SYSTEM)


@lru_cache(maxsize=None)
def _default_measure_prepare_ops() -> np.ndarray:
    chis = ("000", "011", "100", "111")
    ops = [
        _outer3("000", "001"),
        _outer3("010", "010"),
        _outer3("101", "101"),
        _outer3("111", "110"),
    ]
    # completion terms; each annihilates |psi>|psi->
    ops += [_outer3(chi, src) for chi, src in zip(chis, ("000", "011", "100", "111"))]
    return np.array(ops)


@lru_cache(maxsize=None)
def kraus_measure_prepare() -> KrausSet:
    """Measure A' in the computational basis and prepare the result on B."""
    return KrausSet(_default_measure_prepare_ops(), SYSTEM)


def _controlled(on_ops, off_ops) -> np.ndarray:
    p_on = projector(ON)
    p_off = projector(OFF)
    return np.array([tensor(p_on, a) + tensor(p_off, b) for a, b in zip(on_ops, off_ops)])


def kraus_protocol1(teleport: KrausSet | None = None) -> KrausSet:
    """Teleport when the switch is on, idle (I/2 per operator) when it is off."""
    if teleport is None:
        return _kraus_protocol1_default()
    return _protocol1_from(teleport)


def _protocol1_from(teleport: KrausSet) -> KrausSet:
    half_id = 0.5 * identity(8)
    ops = _controlled(teleport.ops, [half_id] * len(teleport))
    return KrausSet(ops, FULL, check=teleport.check)


@lru_cache(maxsize=None)
def _kraus_protocol1_default() -> KrausSet:
    return _protocol1_from(kraus_teleport())


def kraus_protocol2(
    teleport: KrausSet | None = None, measure_prepare: KrausSet | None = None
) -> KrausSet:
    """Teleport when on, measure-and-prepare when off; 4 x 8 = 32 operators.

    Operators are ordered with the teleport index major.
    """
    if teleport is None and measure_prepare is None:
        return _kraus_protocol2_default()
    return _protocol2_from(teleport or kraus_teleport(), measure_prepare or kraus_measure_prepare())


def _protocol2_from(teleport: KrausSet, measure_prepare: KrausSet) -> KrausSet:
    on_ops = [k / math.sqrt(8) for k in teleport.ops for _ in measure_prepare.ops]
    off_ops = [l / 2 for _ in teleport.ops for l in measure_prepare.ops]
    return KrausSet(
        _controlled(on_ops, off_ops), FULL, check=teleport.check and measure_prepare.check
    )


@lru_cache(maxsize=None)
def _kraus_protocol2_default() -> KrausSet:
    return _protocol2_from(kraus_teleport(), kraus_measure_prepare())


def perturbed(kset: KrausSet, eps: float, index=None) -> KrausSet:
    """Copy of ``kset`` with ``eps`` added to one operator entry, completeness unchecked.

    By default the first nonzero entry is used, so the completeness residual
    moves at first order in ``eps`` (a zero entry would only move it by eps^2).
    """
    ops = np.array(kset.ops, copy=True)
    if index is None:
        index = tuple(int(i) for i in np.argwhere(np.abs(ops) > 0)[0])
    ops[index] += eps
    return KrausSet(ops, kset.layout, check=False)


def _readout_row(outcome: str) -> np.ndarray:
    """<outcome| H on the switch, tensored with I on A'AB (8x16)."""
    if outcome not in OUTCOMES:
        raise ValueError(f"outcome must be 'on' or 'off', got {outcome!r}")
    bra = (ON if outcome == "on" else OFF).conj().T @ hadamard()
    return tensor(bra, identity(8))


def switch_branch(rho, outcome: str) -> np.ndarray:
    """Unnormalized A'AB block left after H on S and projection onto ``outcome``.

    Linear in ``rho``; its trace is the outcome probability.
    """
    rho = as_matrix(rho)
    if rho.shape != (FULL.dim, FULL.dim):
        raise DimensionError(f"expected a 16x16 operator on S,A',A,B, got {rho.shape}")
    row = _readout_row(outcome)
    return row @ rho @ row.conj().T


def postselect_switch(rho, outcome: str) -> tuple[np.ndarray, float]:
    """Hadamard-rotate and measure the switch, keeping ``outcome``.

    Returns the normalized A'AB state and the outcome probability.
    """
    block = switch_branch(rho, outcome)
    prob = float(np.trace(block).real)
    if prob < POSTSELECT_MIN_PROB:
        raise DegeneratePostselection(f"P({outcome}) = {prob:.3e} is below {POSTSELECT_MIN_PROB}")
    return block / prob, min(prob, 1.0)
