"""Dense complex linear algebra on small multi-qubit registers.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; kets
are column vectors of shape ``(d, 1)``. Every function here is pure and
returns a fresh array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Callable, Iterable

import numpy as np

from .errors import DimensionError, NotNormalizedError, QuadratureError
from .params import InputParams

LABELS = ("S", "A'", "A", "B")

HAAR_THETA_NODES = 64
HAAR_PHI_NODES = 128


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered qubit labels fixing the tensor-factor order of a register."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise ValueError("layout needs at least one qubit")
        unknown = [lab for lab in labels if lab not in LABELS]
        if unknown:
            raise ValueError(f"unknown qubit labels {unknown}; allowed {LABELS}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def index(self, label: str) -> int:
        return self.labels.index(label)


FULL = SubsystemLayout(("S", "A'", "A", "B"))
SYSTEM = SubsystemLayout(("A'", "A", "B"))


def as_matrix(x) -> np.ndarray:
    """Coerce to a 2-D complex array; 1-D input becomes a column vector."""
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {m.shape}")
    return m


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor most significant."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, (as_matrix(op) for op in ops))


def projector(psi) -> np.ndarray:
    """|psi><psi| for a column vector."""
    v = as_matrix(psi)
    if v.shape[1] != 1:
        raise DimensionError(f"projector expects a ket, got shape {v.shape}")
    return v @ v.conj().T


def partial_trace(rho, layout: SubsystemLayout, keep: Iterable[str]) -> np.ndarray:
    """Trace out every qubit of ``layout`` not listed in ``keep``.

    The surviving factors stay in layout order. Any square operator of the
    right size is accepted, not just density matrices, so the map can be
    applied to operator-basis elements.
    """
    rho = as_matrix(rho)
    n = layout.n_qubits
    if rho.shape != (layout.dim, layout.dim):
        raise DimensionError(f"operator shape {rho.shape} does not match layout {layout.labels}")
    keep = set(keep)
    missing = keep - set(layout.labels)
    if missing:
        raise ValueError(f"labels {sorted(missing)} not in layout {layout.labels}")
    kept = [i for i, lab in enumerate(layout.labels) if lab in keep]
    if len(kept) == n:
        return rho.copy()

    # einsum subscripts: row indices a.., column indices A..; traced qubits share a letter
    rows = [chr(ord("a") + i) for i in range(n)]
    cols = [chr(ord("A") + i) if i in kept else rows[i] for i in range(n)]
    out = "".join(rows[i] for i in kept) + "".join(cols[i] for i in kept)
    reduced = np.einsum(f"{''.join(rows)}{''.join(cols)}->{out}", rho.reshape((2,) * (2 * n)))
    d = 2 ** len(kept)
    return reduced.reshape(d, d)


def stack_ops(ops) -> np.ndarray:
    """Return Kraus operators as a ``(k, d, d)`` complex array."""
    arr = np.asarray([as_matrix(op) for op in ops] if isinstance(ops, (list, tuple)) else ops,
                     dtype=np.complex128)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DimensionError(f"Kraus operators must be square, got shape {arr.shape}")
    return arr


def apply_kraus(rho, ops) -> np.ndarray:
    """sum_i E_i rho E_i^dag."""
    rho = as_matrix(rho)
    ops = stack_ops(ops)
    if rho.shape != ops.shape[1:]:
        raise DimensionError(f"operator shape {rho.shape} vs Kraus shape {ops.shape[1:]}")
    return np.einsum("kij,jl,kml->im", ops, rho, ops.conj(), optimize=True)


def kraus_residual(ops) -> float:
    """max |sum E^dag E - I| entrywise."""
    ops = stack_ops(ops)
    total = np.einsum("kji,kjl->il", ops.conj(), ops)
    return float(np.max(np.abs(total - np.eye(ops.shape[1]))))


def fidelity_to_pure(rho, psi, *, norm_tol: float = 1e-9) -> float:
    """Overlap <psi|rho|psi> (not its square root)."""
    rho = as_matrix(rho)
    v = as_matrix(psi)
    if v.shape[1] != 1 or rho.shape != (v.shape[0], v.shape[0]):
        raise DimensionError(f"rho {rho.shape} incompatible with ket {v.shape}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > norm_tol:
        raise NotNormalizedError(f"|psi| = {norm!r}")
    return float(np.real(v.conj().T @ rho @ v)[0, 0])


def is_density_matrix(rho, *, herm_tol=1e-12, trace_tol=1e-12, psd_tol=1e-10) -> bool:
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        return False
    if abs(np.trace(rho) - 1.0) > trace_tol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -psd_tol)


def l1_coherence(rho, basis=None):
    """Sum of |off-diagonal| entries of ``rho`` in the orthonormal ``basis``.

    ``basis`` holds the basis kets as columns; default is the computational
    basis. A stack of matrices ``(..., d, d)`` gives an array of values.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim < 2 or rho.shape[-1] != rho.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {rho.shape}")
    if basis is not None:
        u = as_matrix(basis)
        rho = u.conj().T @ rho @ u
    mag = np.abs(rho)
    value = mag.sum(axis=(-2, -1)) - np.trace(mag, axis1=-2, axis2=-1)
    return float(value) if np.ndim(value) == 0 else value


@lru_cache(maxsize=None)
def _haar_grid(n_theta: int, n_phi: int):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta_p = np.arccos(x)
    phi_p = 2 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta_p, phi_p, indexing="ij")
    weights = np.outer(w / 2, np.full(n_phi, 1.0 / n_phi))
    out = tt.ravel(), pp.ravel(), weights.ravel()
    for arr in out:
        arr.setflags(write=False)
    return out


def haar_nodes(n_theta: int = HAAR_THETA_NODES, n_phi: int = HAAR_PHI_NODES):
    """Product-rule nodes for the uniform average over the Bloch sphere.

    Gauss-Legendre in cos(theta') times the periodic trapezoid rule in phi'.
    Returns ``(theta_prime, phi_prime, weights)`` flat arrays; weights sum to 1.
    """
    return _haar_grid(int(n_theta), int(n_phi))


def haar_average(
    f: Callable[[InputParams], float],
    n_theta: int = HAAR_THETA_NODES,
    n_phi: int = HAAR_PHI_NODES,
) -> float:
    """Average ``f`` over pure input states distributed uniformly on the sphere."""
    theta_p, phi_p, weights = haar_nodes(n_theta, n_phi)
    values = np.empty_like(weights)
    for k, (t, p) in enumerate(zip(theta_p, phi_p)):
        values[k] = f(InputParams(t, p))
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise QuadratureError(
            f"integrand not finite at theta'={theta_p[bad]!r}, phi'={phi_p[bad]!r}"
        )
    return float(math.fsum(weights * values))


def haar_average_values(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Contract node values (last axis) against quadrature weights."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise QuadratureError("integrand not finite at some quadrature node")
    return values @ weights
