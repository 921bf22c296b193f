"""Teleportation through a quantum switch that superposes a shared singlet
with a noisy alternative.

The subpackages split into plain linear algebra (:mod:`qswitch.qmat`),
state preparation (:mod:`qswitch.states`), Kraus operators
(:mod:`qswitch.channels`), numerical protocol runs (:mod:`qswitch.protocols`),
closed forms (:mod:`qswitch.analytic`) and grid sweeps (:mod:`qswitch.sweep`).
"""

from .analytic import classify_region, coherences, report
from .channels import KrausSet, kraus_protocol1, kraus_protocol2
from .errors import (
    CompletenessError,
    DegeneratePostselection,
    DimensionError,
    DomainError,
    NotNormalizedError,
    QSwitchError,
    QuadratureError,
)
from .params import InputParams, SwitchParams
from .protocols import ProtocolRun, RunResult, average_fidelity, averaged, run
from .sweep import SweepConfig, compute

__version__ = "0.1.0"

__all__ = [
    "CompletenessError",
    "DegeneratePostselection",
    "DimensionError",
    "DomainError",
    "InputParams",
    "KrausSet",
    "NotNormalizedError",
    "ProtocolRun",
    "QSwitchError",
    "QuadratureError",
    "RunResult",
    "SweepConfig",
    "SwitchParams",
    "average_fidelity",
    "averaged",
    "classify_region",
    "coherences",
    "compute",
    "kraus_protocol1",
    "kraus_protocol2",
    "report",
    "run",
]
