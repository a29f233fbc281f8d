"""Analytical power/latency/energy model, calibration, inductor sizing.

Cycle accounting (idealized mode), with c = capacity = cols/2 and
n_T(l) the per-level operation histogram:

    single macro : B(l) = sum_T ceil(n_T(l) / c)      one op kind per cycle
    three macros : B(l) = max_T ceil(n_T(l) / c)      op kinds run in parallel
    six macros   : B(l) = max_T ceil(n_T(l) / (2c))   two macros per op kind

    cycles = cpb * sum_l B(l) + drain                 cpb = 1 pipelined else 2
                                                      drain = 1 when pipelined

Energy:

    E = sum_T ops_T * e_T
      + write_bits * e_write_bit * (1 - eta)          resonant recycling
      + active_macro_cycles * e_macro_overhead
      + cycles * e_control

``active_macro_cycles`` counts capacity-sized batch executions
(sum over levels and op kinds of ceil(n_T / c)); it is the same for every
macro count at equal macro size, which is what makes total energy
invariant from one to three macros while latency shrinks.  Per-op
energies are anchored to published per-operation values (65 fJ NAND2,
116 fJ NOR2) and are never fitted; control energy defaults to zero with
its cost folded into the per-active-macro overhead.

In scheduled mode the same energy terms are taken from an actual
Schedule, replays included, and cycles from its true length.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import CalibrationError, DegenerateError, InfeasibleError, ParseError
from .mapper import Schedule
from .techmap import NAND2, NOR2, NOT, LevelProfile
from .topology import Topology, capacity, min_memory_bits

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_CALIBRATION_PATH = DATA_DIR / "default.cal"
FIXTURES_PATH = DATA_DIR / "reference_fixtures.csv"


@dataclass(frozen=True)
class Calibration:
    clock_hz: float = 1e9
    e_nand_j: float = 65e-15
    e_nor_j: float = 116e-15
    e_not_j: float = 65e-15  # NOT executes as a single-operand NAND2
    e_write_bit_j: float = 50e-15
    recycle_fraction: float = 0.45
    e_macro_overhead_j: float = 2e-12  # per active macro per cycle
    e_control_j: float = 0.0  # per cycle; folded into overhead by default
    c_bitline_per_cell_f: float = 0.2e-15
    pulse_nand_s: float = 150e-12  # documentation constants
    pulse_nor_s: float = 350e-12

    def __post_init__(self):
        if not 0 <= self.recycle_fraction < 1:
            raise CalibrationError("recycle fraction must be in [0, 1)")
        if self.e_nand_j > self.e_nor_j:
            raise CalibrationError("NAND2 energy must not exceed NOR2 energy")
        for name in (
            "clock_hz", "e_nand_j", "e_nor_j", "e_not_j", "e_write_bit_j",
            "e_macro_overhead_j", "e_control_j", "c_bitline_per_cell_f",
        ):
            if getattr(self, name) < 0:
                raise CalibrationError(f"{name} must be non-negative")

    def op_energy(self, op: str) -> float:
        return {NAND2: self.e_nand_j, NOR2: self.e_nor_j, NOT: self.e_not_j}[op]


@dataclass(frozen=True)
class Metrics:
    cycles: int
    latency_ns: float
    energy_nj: float
    power_mw: float
    area_proxy_kb: float

    def to_dict(self) -> dict:
        return {
            "cycles": self.cycles,
            "latency_ns": self.latency_ns,
            "energy_nJ": self.energy_nj,
            "power_mW": self.power_mw,
            "area_proxy_KB": self.area_proxy_kb,
        }


@dataclass(frozen=True)
class InductorSpec:
    inductance_h: float
    c_total_f: float
    f_res_hz: float

    def to_dict(self) -> dict:
        return {
            "L_nH": self.inductance_h * 1e9,
            "C_total_pF": self.c_total_f * 1e12,
            "f_res_GHz": self.f_res_hz / 1e9,
        }


def _batches(profile: LevelProfile, topo: Topology, cap: int):
    """Per-level (cycle batches, active macro-cycles) under the family rule."""
    total_cycles = 0
    active = 0
    for level in range(1, profile.depth + 1):
        counts = profile.level_counts(level)
        per_type = {op: math.ceil(n / cap) for op, n in counts.items() if n}
        active += sum(per_type.values())
        if not per_type:
            continue
        if topo.macro_count == 1:
            total_cycles += sum(per_type.values())
        elif topo.macro_count == 3:
            total_cycles += max(per_type.values())
        else:
            total_cycles += max(
                math.ceil(n / (2 * cap)) for n in counts.values() if n
            )
    return total_cycles, active


def estimate_metrics(
    topo: Topology,
    cal: Calibration,
    profile: LevelProfile | None = None,
    schedule: Schedule | None = None,
    mode: str = "idealized",
    pipelined: bool = True,
    cpb: int | None = None,
    gate_count: int | None = None,
) -> Metrics:
    """Power/latency/energy for a profile (idealized) or schedule (scheduled)."""
    if mode == "idealized":
        if profile is None:
            raise ValueError("idealized mode needs a level profile")
        gates = profile.total_gates if gate_count is None else gate_count
        if topo.total_bits < min_memory_bits(max(1, gates)):
            raise InfeasibleError(
                f"{topo.name} holds {topo.total_bits} bits but "
                f"{min_memory_bits(max(1, gates))} are required",
                required_bits=min_memory_bits(max(1, gates)),
            )
        cap = capacity(topo)
        if cpb is None:
            cpb = 1 if pipelined else 2
        sum_b, active = _batches(profile, topo, cap)
        cycles = cpb * sum_b + (1 if cpb == 1 else 0)
        cycles = max(1, cycles)
        ops = {
            NAND2: profile.total_nand2,
            NOR2: profile.total_nor2,
            NOT: profile.total_inv,
        }
        write_bits = profile.total_gates
    elif mode == "scheduled":
        if schedule is None:
            raise ValueError("scheduled mode needs a schedule")
        cycles = max(1, schedule.num_cycles)
        ops = schedule.op_counts()
        write_bits = schedule.write_bits()
        active = len(schedule.computes)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    energy_j = (
        sum(n * cal.op_energy(op) for op, n in ops.items())
        + write_bits * cal.e_write_bit_j * (1 - cal.recycle_fraction)
        + active * cal.e_macro_overhead_j
        + cycles * cal.e_control_j
    )
    latency_s = cycles / cal.clock_hz
    latency_ns = latency_s * 1e9
    energy_nj = energy_j * 1e9
    power_mw = energy_nj / latency_ns * 1e3 if latency_ns else 0.0
    return Metrics(
        cycles=cycles,
        latency_ns=latency_ns,
        energy_nj=energy_nj,
        power_mw=power_mw,
        area_proxy_kb=topo.total_kb,
    )


# ----------------------------------------------------------------------
# inductor sizing


def size_inductor(topo: Topology, cal: Calibration, f_res_hz: float) -> InductorSpec:
    """Shared resonant inductor: L = 1 / ((2 pi f)^2 C_total)."""
    if f_res_hz <= 0:
        raise DegenerateError("resonant frequency must be positive")
    c_total = cal.c_bitline_per_cell_f * topo.rows * topo.cols
    if c_total <= 0:
        raise DegenerateError("total bitline capacitance is zero")
    omega = 2 * math.pi * f_res_hz
    inductance = 1.0 / (omega * omega * c_total)
    return InductorSpec(inductance_h=inductance, c_total_f=c_total, f_res_hz=f_res_hz)


# ----------------------------------------------------------------------
# reference fixtures (published power/latency/energy rows)


@dataclass(frozen=True)
class FixtureRow:
    benchmark: str
    scenario: str
    macro_kb: float
    macro_count: int
    transforms: str
    levels: int
    nand2: int
    nor2: int
    inv: int
    power_mw: float
    latency_ns: float
    energy_nj: float

    @property
    def total_gates(self) -> int:
        return self.nand2 + self.nor2 + self.inv


def load_fixtures(path=None) -> list[FixtureRow]:
    path = Path(path) if path is not None else FIXTURES_PATH
    rows = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read fixture file: {exc}", path=str(path))
    reader = csv.DictReader(
        line for line in io.StringIO(text) if not line.startswith("#")
    )
    for lineno, rec in enumerate(reader, start=2):
        try:
            rows.append(
                FixtureRow(
                    benchmark=rec["benchmark"],
                    scenario=rec["scenario"],
                    macro_kb=float(rec["macro_kb"]),
                    macro_count=int(rec["macro_count"]),
                    transforms=rec["transforms"],
                    levels=int(rec["levels"]),
                    nand2=int(rec["nand2"]),
                    nor2=int(rec["nor2"]),
                    inv=int(rec["inv"]),
                    power_mw=float(rec["power_mw"]),
                    latency_ns=float(rec["latency_ns"]),
                    energy_nj=float(rec["energy_nj"]),
                )
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(
                f"bad fixture row: {exc}", path=str(path), line=lineno
            ) from None
    return rows


@dataclass
class IdentityReport:
    rows: list  # (benchmark, scenario, relative error)
    flagged: list  # rows with error above the threshold
    threshold: float

    @property
    def passed(self) -> bool:
        return not self.flagged


def check_fixture_identity(rows: list[FixtureRow], threshold: float = 0.02):
    """Power x latency must reproduce energy within the threshold, per row."""
    checked = []
    flagged = []
    for r in rows:
        product_nj = r.power_mw * r.latency_ns * 1e-3  # mW x ns = pJ
        err = abs(product_nj - r.energy_nj) / r.energy_nj
        checked.append((r.benchmark, r.scenario, err))
        if err > threshold:
            flagged.append((r.benchmark, r.scenario, err))
    return IdentityReport(rows=checked, flagged=flagged, threshold=threshold)


# ----------------------------------------------------------------------
# calibration fit


def _uniform_profile(row: FixtureRow) -> LevelProfile:
    """Spread the fixture's totals evenly over its level count."""
    k = max(1, row.levels)
    nand = [0] + [row.nand2 // k] * k
    nor = [0] + [row.nor2 // k] * k
    inv = [0] + [row.inv // k] * k
    nand[k] += row.nand2 - (row.nand2 // k) * k
    nor[k] += row.nor2 - (row.nor2 // k) * k
    inv[k] += row.inv - (row.inv // k) * k
    return LevelProfile(k, nand, nor, inv)


@dataclass
class CalibrationReport:
    calibration: Calibration
    residuals: list  # (benchmark, scenario, target_nj, modeled_nj, residual_nj)
    rms_residual_nj: float


def calibrate(
    rows: list[FixtureRow],
    defaults: Calibration | None = None,
    library=None,
) -> CalibrationReport:
    """Least-squares fit of {e_macro_overhead, e_control, eta} to fixture
    energies, holding the per-op energies at their published values.

    The three parameters are non-negative by construction (an exhaustive
    active-set solve, exact for three variables).  Per-row residuals are
    part of the result and never hidden.
    """
    import numpy as np

    from .topology import default_library

    if defaults is None:
        defaults = Calibration()
    if library is None:
        library = default_library()
    if len(rows) < 4:
        raise CalibrationError(f"need at least 4 fixture rows, got {len(rows)}")

    features = []
    targets = []
    for r in rows:
        matches = [
            t
            for t in library
            if t.macro_count == r.macro_count and abs(t.size_kb - r.macro_kb) < 1e-9
        ]
        if not matches:
            raise CalibrationError(
                f"fixture {r.benchmark}/{r.scenario} references unknown topology "
                f"{r.macro_kb}KB x {r.macro_count}"
            )
        topo = matches[0]
        profile = _uniform_profile(r)
        cap = capacity(topo)
        sum_b, active = _batches(profile, topo, cap)
        cycles = max(1, sum_b + 1)
        ops_energy = (
            r.nand2 * defaults.e_nand_j
            + r.nor2 * defaults.e_nor_j
            + r.inv * defaults.e_not_j
        )
        target = r.energy_nj * 1e-9 - ops_energy
        features.append([float(r.total_gates), float(active), float(cycles)])
        targets.append(target)

    a = np.asarray(features)
    y = np.asarray(targets)
    if np.linalg.matrix_rank(a) < a.shape[1]:
        raise CalibrationError(
            "fixture set is rank-deficient: need rows spanning distinct "
            "gate counts, topologies and level counts"
        )

    best = None
    for mask in range(8):  # exhaustive active sets over 3 variables
        free = [i for i in range(3) if not (mask >> i) & 1]
        x = np.zeros(3)
        if free:
            sol, *_ = np.linalg.lstsq(a[:, free], y, rcond=None)
            x[free] = sol
        if (x < -1e-30).any():
            continue
        x = np.clip(x, 0.0, None)
        rss = float(((a @ x - y) ** 2).sum())
        if best is None or rss < best[0] - 1e-40:
            best = (rss, x)
    _, x = best
    w, e_mo, e_ctl = (float(v) for v in x)
    eta = 1.0 - min(w / defaults.e_write_bit_j, 1.0) if defaults.e_write_bit_j else 0.0
    eta = min(max(eta, 0.0), 0.999999)
    fitted = replace(
        defaults,
        recycle_fraction=eta,
        e_macro_overhead_j=e_mo,
        e_control_j=e_ctl,
    )
    residuals = []
    modeled = a @ x
    for r, t, m in zip(rows, targets, modeled):
        residuals.append(
            (
                r.benchmark,
                r.scenario,
                r.energy_nj,
                (m + (r.energy_nj * 1e-9 - t)) * 1e9,
                (t - m) * 1e9,
            )
        )
    rms = float(math.sqrt(sum(res[4] ** 2 for res in residuals) / len(residuals)))
    return CalibrationReport(calibration=fitted, residuals=residuals, rms_residual_nj=rms)


# ----------------------------------------------------------------------
# calibration file IO (INI-style, SI units)


_FIELDS = {
    "clock_hz": "clock_hz",
    "e_nand_j": "e_nand_j",
    "e_nor_j": "e_nor_j",
    "e_not_j": "e_not_j",
    "e_write_bit_j": "e_write_bit_j",
    "recycle_fraction": "recycle_fraction",
    "e_macro_overhead_j": "e_macro_overhead_j",
    "e_control_j": "e_control_j",
    "c_bitline_per_cell_f": "c_bitline_per_cell_f",
    "pulse_nand_s": "pulse_nand_s",
    "pulse_nor_s": "pulse_nor_s",
}


def load_calibration(path=None) -> Calibration:
    if path is None:
        return Calibration()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read calibration file: {exc}", path=str(path))
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ParseError(
                f"unknown calibration key {key!r}", path=str(path), line=lineno
            )
        try:
            values[_FIELDS[key]] = float(val.strip())
        except ValueError:
            raise ParseError(
                f"bad value for {key}", path=str(path), line=lineno
            ) from None
    return Calibration(**values)


def dump_calibration(cal: Calibration) -> str:
    lines = [
        "# rCiM calibration (SI units: J, s, F, Hz)",
        "[calibration]",
        f"clock_hz = {cal.clock_hz!r}",
        f"e_nand_j = {cal.e_nand_j!r}              # per NAND2 operation",
        f"e_nor_j = {cal.e_nor_j!r}              # per NOR2 operation",
        f"e_not_j = {cal.e_not_j!r}              # NOT = single-operand NAND2",
        f"e_write_bit_j = {cal.e_write_bit_j!r}         # conventional writeback per bit",
        f"recycle_fraction = {cal.recycle_fraction!r}      # resonant energy recovery",
        f"e_macro_overhead_j = {cal.e_macro_overhead_j!r}    # per active macro per cycle",
        f"e_control_j = {cal.e_control_j!r}           # per cycle (default folded into overhead)",
        f"c_bitline_per_cell_f = {cal.c_bitline_per_cell_f!r}  # bitline capacitance per cell",
        f"pulse_nand_s = {cal.pulse_nand_s!r}         # discharge pulse width (doc only)",
        f"pulse_nor_s = {cal.pulse_nor_s!r}          # discharge pulse width (doc only)",
    ]
    return "\n".join(lines) + "\n"
