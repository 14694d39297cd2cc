"""Parameter sweeps, oracle/closed-form comparison and sampled trajectories.

Every sweep returns a :class:`Table` with a fixed column order and one row per
grid point, in row-major grid order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .closed_form import closed_form_infidelity, closed_form_output, pi_values, resolve_direction
from .metrics import concurrence, infidelity
from .noise import GadmParams, channel_provenance, noisy_bell
from .protocol import Direction, ProtocolConfig, infidelity_for, initial_ensemble, run_protocol, run_sampled, target_for
from .states import QubitParams

MIN_GRID = 2
EXCITED_CONFIG = ProtocolConfig(QubitParams.one(), QubitParams.one(), QubitParams.one())


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: list

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        return format_csv(self.columns, self.rows)

    def to_json(self) -> str:
        return dump_json(self.records())


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def format_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(v) for v in r])
    return buf.getvalue()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def grid_points(lo: float, hi: float, n: int) -> np.ndarray:
    if n < MIN_GRID:
        raise ValueError(f"grid needs at least {MIN_GRID} points per axis, got {n}")
    return np.linspace(lo, hi, n)


def _closed_form_columns(cfg: ProtocolConfig, direction: Direction) -> tuple:
    d = resolve_direction(direction, cfg.aux)
    cf = closed_form_infidelity(d, cfg.alice, cfg.bob, cfg.aux)
    pi = pi_values(cfg.alice, cfg.bob, cfg.aux)
    return d.value, cf.value, cf.raw, cf.out_of_range, pi.pi_a, pi.pi_b


def circuit_infidelity(cfg: ProtocolConfig, direction: Direction | str = Direction.AUTO) -> float:
    """Infidelity of the simulated output against the target picked by ``direction``."""
    return infidelity_for(cfg, run_protocol(cfg).final_ab, direction)


VALUE_COLUMNS = (
    "direction",
    "infidelity_circuit",
    "infidelity_closed_form",
    "closed_form_raw",
    "closed_form_out_of_range",
    "pi_a",
    "pi_b",
)
SWEEP_AUX_COLUMNS = ("theta_aux", "phi_aux") + VALUE_COLUMNS
SWEEP_INITIAL_COLUMNS = ("theta_a", "theta_b") + VALUE_COLUMNS
SWEEP_NOISE_COLUMNS = ("eta", "p", "concurrence", "infidelity_circuit")


def sweep_aux(base: ProtocolConfig, n: int, direction: Direction | str = Direction.AUTO) -> Table:
    """Grid over the aux angles, ``theta_aux`` in [0, pi] then ``phi_aux`` in [0, 2pi]."""
    direction = Direction(direction)
    rows = []
    for ta in grid_points(0.0, math.pi, n):
        for pa in grid_points(0.0, 2 * math.pi, n):
            cfg = replace(base, aux=QubitParams(ta, pa))
            cols = _closed_form_columns(cfg, direction)
            inf = circuit_infidelity(cfg, direction)
            rows.append((float(ta), float(pa), cols[0], inf, *cols[1:]))
    return Table(SWEEP_AUX_COLUMNS, rows)


def sweep_initial(base: ProtocolConfig, n: int, direction: Direction | str = Direction.AUTO) -> Table:
    """Grid over ``theta_a`` then ``theta_b`` in [0, pi]; the phases stay fixed."""
    direction = Direction(direction)
    rows = []
    for ta in grid_points(0.0, math.pi, n):
        for tb in grid_points(0.0, math.pi, n):
            cfg = replace(
                base,
                alice=QubitParams(ta, base.alice.phi),
                bob=QubitParams(tb, base.bob.phi),
            )
            cols = _closed_form_columns(cfg, direction)
            inf = circuit_infidelity(cfg, direction)
            rows.append((float(ta), float(tb), cols[0], inf, *cols[1:]))
    return Table(SWEEP_INITIAL_COLUMNS, rows)


def sweep_noise(base: ProtocolConfig, n: int, direction: Direction | str = Direction.AUTO) -> Table:
    """Grid over ``eta`` then ``p`` with the closed-form noisy Bell state as the channel."""
    rows = []
    for eta in grid_points(0.0, 1.0, n):
        for p in grid_points(0.0, 1.0, n):
            rho = noisy_bell(GadmParams(eta, p))
            cfg = replace(base, noise=None, channel_override=rho)
            rows.append((float(eta), float(p), concurrence(rho), circuit_infidelity(cfg, direction)))
    return Table(SWEEP_NOISE_COLUMNS, rows)


# -- comparison report ---------------------------------------------------------

COMPARE_COLUMNS = (
    "theta_a",
    "theta_b",
    "direction",
    "infidelity_circuit",
    "infidelity_closed_form",
    "closed_form_raw",
    "closed_form_out_of_range",
    "infidelity_closed_form_state",
    "gap_closed_form",
    "gap_closed_form_state",
)
COLUMN_PROVENANCE = {
    "theta_a": "grid coordinate",
    "theta_b": "grid coordinate",
    "direction": "closed-form direction (auto resolved from the aux weight)",
    "infidelity_circuit": "circuit oracle",
    "infidelity_closed_form": "closed-form infidelity, clamped to [0, 1]",
    "closed_form_raw": "closed-form infidelity, unclamped",
    "closed_form_out_of_range": "raw value outside [-1e-9, 1 + 1e-9]",
    "infidelity_closed_form_state": "closed-form output mixture scored against the ideal target",
    "gap_closed_form": "|infidelity_closed_form - infidelity_circuit|",
    "gap_closed_form_state": "|infidelity_closed_form_state - infidelity_circuit|",
}
MAX_GAP_COUNT = 10


def compare(base: ProtocolConfig, n: int, direction: Direction | str = Direction.AUTO) -> dict:
    """Circuit oracle against the closed forms over a (theta_a, theta_b) grid.

    A disagreement is reported, never treated as an error.
    """
    direction = Direction(direction)
    rows = []
    for ta in grid_points(0.0, math.pi, n):
        for tb in grid_points(0.0, math.pi, n):
            cfg = replace(
                base,
                alice=QubitParams(ta, base.alice.phi),
                bob=QubitParams(tb, base.bob.phi),
                noise=None,
                channel_override=None,
            )
            d = resolve_direction(direction, cfg.aux)
            cf = closed_form_infidelity(d, cfg.alice, cfg.bob, cfg.aux)
            inf = circuit_infidelity(cfg, direction)
            state_inf = infidelity(target_for(cfg, direction), closed_form_output(cfg, d))
            rows.append(
                (
                    float(ta),
                    float(tb),
                    d.value,
                    inf,
                    cf.value,
                    cf.raw,
                    cf.out_of_range,
                    state_inf,
                    abs(cf.value - inf),
                    abs(state_inf - inf),
                )
            )
    table = Table(COMPARE_COLUMNS, rows)
    gap = COMPARE_COLUMNS.index("gap_closed_form")
    # stable sort keeps grid order among ties
    ranked = sorted(range(len(rows)), key=lambda i: -rows[i][gap])[:MAX_GAP_COUNT]
    records = table.records()
    return {
        "columns": list(COMPARE_COLUMNS),
        "provenance": COLUMN_PROVENANCE,
        "aux": {"theta": base.aux.theta, "phi": base.aux.phi},
        "points": records,
        "max_gaps": [records[i] for i in ranked],
        "summary": {
            "grid": n,
            "max_gap_closed_form": max(table.column("gap_closed_form")),
            "max_gap_closed_form_state": max(table.column("gap_closed_form_state")),
            "out_of_range_count": sum(table.column("closed_form_out_of_range")),
        },
        "channel_provenance": channel_provenance(),
    }


def compare_summary(report: dict) -> str:
    s = report["summary"]
    lines = [
        f"grid {s['grid']}x{s['grid']}: max |closed form - circuit| = {s['max_gap_closed_form']:.6g}, "
        f"max |closed-form state - circuit| = {s['max_gap_closed_form_state']:.6g}",
    ]
    for r in report["max_gaps"]:
        lines.append(
            f"  theta_a={r['theta_a']:.6g} theta_b={r['theta_b']:.6g} "
            f"circuit={r['infidelity_circuit']:.6g} closed_form={r['infidelity_closed_form']:.6g} "
            f"gap={r['gap_closed_form']:.6g}"
        )
    cp = report["channel_provenance"]
    lines.append(f"noisy Bell state reproduced by GAD on: {', '.join(cp['reproduces']) or 'none'}")
    return "\n".join(lines) + "\n"


# -- trajectories ----------------------------------------------------------------

MEASURED_QUBITS = ("RA", "RB", "BellB", "BellA")
TRAJECTORY_COLUMNS = ("shot",) + MEASURED_QUBITS + ("infidelity",)
SE_FLOOR = 1e-12


@dataclass(frozen=True)
class TrajectoryResult:
    shots: Table
    seed: int
    deterministic_infidelity: float

    @property
    def mean_infidelity(self) -> float:
        return float(np.mean(self.shots.column("infidelity")))

    @property
    def standard_error(self) -> float:
        """Binomial standard error ``sqrt(F (1 - F) / shots)`` around the deterministic value."""
        f = self.deterministic_infidelity
        return math.sqrt(f * (1.0 - f) / len(self.shots.rows))

    @property
    def within_3_sigma(self) -> bool:
        return abs(self.mean_infidelity - self.deterministic_infidelity) <= 3 * max(
            self.standard_error, SE_FLOOR
        )

    def branch_frequencies(self) -> dict:
        """Fraction of shots with outcome 1 on each measured qubit."""
        return {q: float(np.mean(self.shots.column(q))) for q in MEASURED_QUBITS}

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "shots": len(self.shots.rows),
            "branch_frequencies": self.branch_frequencies(),
            "mean_infidelity": self.mean_infidelity,
            "deterministic_infidelity": self.deterministic_infidelity,
            "standard_error": self.standard_error,
            "within_3_sigma": self.within_3_sigma,
        }


def trajectory(
    cfg: ProtocolConfig, shots: int, seed: int, direction: Direction | str = Direction.AUTO
) -> TrajectoryResult:
    """Sample ``shots`` runs; shot ``k`` draws from child ``k`` of ``SeedSequence(seed)``."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rows = []
    ensemble = initial_ensemble(cfg)
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(shots)):
        rho, outcomes, _ = run_sampled(cfg, np.random.default_rng(child), ensemble)
        rows.append((k, *(outcomes[q] for q in MEASURED_QUBITS), infidelity_for(cfg, rho, direction)))
    det = infidelity_for(cfg, run_protocol(cfg).final_ab, direction)
    return TrajectoryResult(Table(TRAJECTORY_COLUMNS, rows), seed, det)


def single_run(cfg: ProtocolConfig, direction: Direction | str = Direction.AUTO) -> dict:
    """Everything the ``run`` subcommand reports for one configuration."""
    res = run_protocol(cfg)
    out = {
        "infidelity_circuit": infidelity_for(cfg, res.final_ab, direction),
        "infidelity_closed_form": None,
        "closed_form_raw": None,
        "closed_form_out_of_range": None,
        "direction": resolve_direction(direction, cfg.aux).value,
    }
    if cfg.is_noiseless:
        cf = closed_form_infidelity(direction, cfg.alice, cfg.bob, cfg.aux)
        out.update(
            infidelity_closed_form=cf.value, closed_form_raw=cf.raw, closed_form_out_of_range=cf.out_of_range
        )
    pi = pi_values(cfg.alice, cfg.bob, cfg.aux)
    out.update(
        pi_a=pi.pi_a,
        pi_b=pi.pi_b,
        cbits_sent=res.trace.cbits_sent,
        ebits_consumed=res.trace.ebits_consumed,
        final_state={"real": res.final_ab.real.tolist(), "imag": res.final_ab.imag.tolist()},
    )
    return out
