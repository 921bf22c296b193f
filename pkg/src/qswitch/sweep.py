"""Grid sweeps over switch parameters and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analytic
from .channels import KrausSet, kraus_measure_prepare, kraus_protocol1, kraus_protocol2, kraus_teleport, perturbed
from .protocols import averaged, switch_amplitudes
from .qmat import l1_coherence
from .states import hadamard

BASE_COLUMNS = ("theta", "phi")
VALUE_COLUMNS = tuple(analytic.COLUMNS)
ALL_COLUMNS = BASE_COLUMNS + VALUE_COLUMNS

DEFAULT_GRID = (181, 360)


@dataclass(frozen=True)
class SweepConfig:
    theta_points: int = DEFAULT_GRID[0]
    phi_points: int = DEFAULT_GRID[1]
    theta_range: tuple[float, float] = (0.0, math.pi)
    phi_range: tuple[float, float] = (0.0, 2 * math.pi)
    protocols: tuple[int, ...] = (1, 2)
    outputs: tuple[str, ...] | None = None
    format: str = "csv"
    tolerance: float = 1e-10
    jobs: int = 1
    verify: bool = False
    degrees: bool = False
    perturb: float = 0.0
    out: str | None = None

    def __post_init__(self):
        if self.theta_points < 2 or self.phi_points < 2:
            raise ValueError("grid needs at least 2 points along each axis")
        lo, hi = self.theta_range
        if not (0 <= lo <= hi <= math.pi + 1e-12):
            raise ValueError(f"theta range {self.theta_range} not inside [0, pi]")
        lo, hi = self.phi_range
        if not (0 <= lo <= hi <= 2 * math.pi + 1e-12):
            raise ValueError(f"phi range {self.phi_range} not inside [0, 2pi]")
        if not self.protocols or set(self.protocols) - {1, 2}:
            raise ValueError(f"protocols must be a non-empty subset of {{1, 2}}, got {self.protocols}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.outputs is not None:
            unknown = set(self.outputs) - set(ALL_COLUMNS)
            if unknown:
                raise ValueError(f"unknown columns {sorted(unknown)}")

    def value_columns(self) -> list[str]:
        allowed = {"c_z", "c_x"}
        for p in self.protocols:
            allowed.update(analytic.PROTOCOL_COLUMNS[p])
        wanted = self.outputs if self.outputs is not None else VALUE_COLUMNS
        return [c for c in VALUE_COLUMNS if c in allowed and c in wanted]


_PI_TERM = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+]+))?\s*$")


def parse_angle(text: str) -> float:
    """Float, or a multiple of pi such as ``pi``, ``2pi``, ``3*pi/2``."""
    text = str(text).strip()
    m = _PI_TERM.match(text)
    if m:
        sign_only = {"": 1.0, "+": 1.0, "-": -1.0}
        coef = sign_only.get(m.group(1))
        if coef is None:
            coef = float(m.group(1))
        return coef * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    return float(text)


def parse_range(text: str) -> tuple[float, float]:
    parts = [p for p in re.split(r"[,:]", str(text)) if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"range must be 'lo,hi', got {text!r}")
    return parse_angle(parts[0]), parse_angle(parts[1])


def parse_grid(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX*]\s*(\d+)\s*", str(text))
    if not m:
        raise ValueError(f"grid must look like 181x360, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def parse_protocols(text: str) -> tuple[int, ...]:
    text = str(text).strip().lower()
    if text in ("all", "both", ""):
        return (1, 2)
    return tuple(sorted({int(p) for p in re.split(r"[,\s]+", text) if p}))


def _parse_bool(text: str) -> bool:
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Returns SweepConfig kwargs."""
    return config_kwargs(read_config_raw(path))


def read_config_raw(path) -> dict[str, str]:
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        raw[key.replace("-", "_").lower()] = value
    return raw


def config_kwargs(raw: dict) -> dict:
    degrees = _parse_bool(raw.get("degrees", "false"))
    scale = math.pi / 180 if degrees else 1.0
    out = {"degrees": degrees} if "degrees" in raw else {}
    for key, value in raw.items():
        if key == "grid":
            out["theta_points"], out["phi_points"] = parse_grid(value)
        elif key in ("theta_points", "phi_points", "jobs"):
            out[key] = int(value)
        elif key in ("theta_range", "phi_range"):
            lo, hi = parse_range(value)
            out[key] = (lo * scale, hi * scale)
        elif key in ("protocol", "protocols"):
            out["protocols"] = parse_protocols(value)
        elif key in ("outputs", "columns"):
            out["outputs"] = tuple(c.strip() for c in value.split(",") if c.strip())
        elif key in ("tolerance", "perturb"):
            out[key] = float(value)
        elif key == "format":
            out["format"] = value.lower()
        elif key == "verify":
            out["verify"] = _parse_bool(value)
        elif key == "out":
            out["out"] = value
        elif key != "degrees":
            raise ValueError(f"unknown config key {key!r}")
    return out


def grid_axes(config: SweepConfig):
    thetas = np.linspace(*config.theta_range, config.theta_points)
    phis = np.linspace(*config.phi_range, config.phi_points)
    return thetas, phis


def flat_grid(config: SweepConfig):
    """theta-major flattened grid: phi varies fastest."""
    thetas, phis = grid_axes(config)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    return tt.ravel(), pp.ravel()


def protocol_kraus_sets(perturb: float = 0.0) -> dict[int, KrausSet] | None:
    """Kraus sets for both protocols, optionally with one teleport entry perturbed.

    Returns None for the unperturbed default so callers use cached engines.
    """
    if perturb == 0.0:
        return None
    k = perturbed(kraus_teleport(), perturb)
    return {1: kraus_protocol1(k), 2: kraus_protocol2(k, kraus_measure_prepare())}


def numeric_values(theta, phi, protocols=(1, 2), kraus_sets=None) -> dict[str, np.ndarray]:
    """Grid columns computed by evolving states, never from closed forms."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    out = {}
    tags = {1: "p1", 2: "p2"}
    for p in protocols:
        kraus = None if kraus_sets is None else kraus_sets[p]
        f_keep, _ = averaged(p, "trace", theta, phi, kraus)
        f_on, p_on = averaged(p, "on", theta, phi, kraus)
        f_off, _ = averaged(p, "off", theta, phi, kraus)
        t = tags[p]
        out[f"f_{t}pa1"] = f_keep
        out[f"f_{t}pa2_on"] = f_on
        out[f"f_{t}pa2_off"] = f_off
        if p == 1:
            out["p_on_p1"] = p_on
        out[f"d{p}"] = f_on - f_keep
        out[f"d{p}max"] = np.maximum(f_on, f_off) - f_keep
    amp = switch_amplitudes(theta.ravel(), phi.ravel())
    rho_s = amp[:, :, None] * amp[:, None, :].conj()
    out["c_z"] = l1_coherence(rho_s).reshape(theta.shape)
    out["c_x"] = l1_coherence(rho_s, hadamard()).reshape(theta.shape)
    return out


def _row_blocks(config: SweepConfig):
    thetas, phis = grid_axes(config)
    # one block per theta row, so results never depend on the worker count
    for t in thetas:
        yield np.full_like(phis, t), phis


@dataclass
class SweepResult:
    columns: list[str]
    data: np.ndarray  # rows x columns, float
    degrees: bool = False
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def compute(config: SweepConfig, kraus_sets=None) -> SweepResult:
    """Evaluate the configured columns on the grid (plus *_num/*_err when verifying)."""
    values = config.value_columns()
    theta, phi = flat_grid(config)
    ana = analytic.grid_values(theta, phi)
    cols = {"theta": theta, "phi": phi}
    cols.update({c: ana[c] for c in values})
    if config.verify:
        if kraus_sets is None:
            kraus_sets = protocol_kraus_sets(config.perturb)
        blocks = list(_row_blocks(config))

        def work(block):
            return numeric_values(block[0], block[1], config.protocols, kraus_sets)

        if config.jobs > 1:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                parts = list(pool.map(work, blocks))
        else:
            parts = [work(b) for b in blocks]
        for c in values:
            num = np.concatenate([part[c] for part in parts])
            cols[f"{c}_num"] = num
            cols[f"{c}_err"] = np.abs(num - ana[c])
    # grid coordinates are always emitted so rows stay self-describing
    names = list(BASE_COLUMNS) + values
    if config.verify:
        names += [f"{c}_num" for c in values] + [f"{c}_err" for c in values]
    data = np.column_stack([cols[c] for c in names])
    if config.degrees:
        data[:, :2] = np.degrees(data[:, :2])
    return SweepResult(names, data, config.degrees)


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.data:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def to_json(result: SweepResult) -> str:
    rows = [[float(_fmt(x)) for x in row] for row in result.data]
    doc = {"columns": result.columns, "angle_unit": "degrees" if result.degrees else "radians",
           "rows": rows}
    return json.dumps(doc, indent=None, separators=(",", ":")) + "\n"


def render(result: SweepResult, fmt: str) -> str:
    return to_csv(result) if fmt == "csv" else to_json(result)


FIGURES = {
    "fig1": [("f_p1pa2_on", None), ("half", 0.5), ("two_thirds", 2 / 3)],
    "fig2a": [("f_p1pa2_minus_half", ("f_p1pa2_on", 0.5))],
    "fig2b": [("f_p1pa2_minus_two_thirds", ("f_p1pa2_on", 2 / 3))],
    "fig3": [("f_p2pa2_on", None), ("two_thirds", 2 / 3)],
    "fig4": [("f_p2pa2_minus_two_thirds", ("f_p2pa2_on", 2 / 3))],
    "fig5a": [("d1max", None)],
    "fig5b": [("d2max", None)],
}


def figure_tables(config: SweepConfig | None = None) -> dict[str, SweepResult]:
    """Surface data behind each figure on the configured grid."""
    config = config or SweepConfig()
    theta, phi = flat_grid(config)
    ana = analytic.grid_values(theta, phi)
    tables = {}
    for name, spec in FIGURES.items():
        cols = ["theta", "phi"]
        arrays = [theta, phi]
        for col, src in spec:
            cols.append(col)
            if src is None:
                arrays.append(ana[col])
            elif isinstance(src, tuple):
                arrays.append(ana[src[0]] - src[1])
            else:
                arrays.append(np.full_like(theta, src))
        tables[name] = SweepResult(cols, np.column_stack(arrays))
    return tables


def negative_fraction(table: SweepResult, column: str) -> float:
    values = table.column(column)
    return float(np.count_nonzero(values < 0) / values.size)


def write_figures(out_dir, config: SweepConfig | None = None) -> dict:
    """Write fig*.csv files; returns a summary with the negative-area fractions."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = figure_tables(config)
    for name, table in tables.items():
        (out_dir / f"{name}.csv").write_text(to_csv(table), newline="")
    return {
        "files": sorted(f"{name}.csv" for name in tables),
        "fig2a_negative_fraction": negative_fraction(tables["fig2a"], "f_p1pa2_minus_half"),
        "fig2b_negative_fraction": negative_fraction(tables["fig2b"], "f_p1pa2_minus_two_thirds"),
        "fig4_negative_fraction": negative_fraction(tables["fig4"], "f_p2pa2_minus_two_thirds"),
        "fig5a_min": float(tables["fig5a"].column("d1max").min()),
        "fig5b_min": float(tables["fig5b"].column("d2max").min()),
    }


def with_overrides(config: SweepConfig, **kwargs) -> SweepConfig:
    return replace(config, **{k: v for k, v in kwargs.items() if v is not None})
