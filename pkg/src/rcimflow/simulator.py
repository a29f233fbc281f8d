"""Cycle-accurate functional simulator for the rCiM array.

Executes a Schedule against per-macro bit arrays.  Analog behavior is
abstracted to exact boolean semantics: NAND2/NOR2 on the two operand
bits, NOT as a single-operand NAND.  Lane results latch in the compute
cycle and their write group lands one cycle later, so a value is
readable strictly after its writeback cycle.

Simulation is bit-parallel: every cell holds an integer whose bit v is
the cell value under test vector v, so one pass evaluates the whole
vector batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .aig import Aig, exhaustive_masks, random_vectors
from .errors import ScheduleError
from .mapper import Schedule, place_and_schedule, validate_schedule
from .techmap import NAND2, NOR2, map_to_gates
from .topology import Topology


@dataclass
class MemState:
    """Array contents plus the one-cycle output latch per macro."""

    n_macros: int
    rows: int
    cols: int
    width: int  # vectors in flight
    cells: list = field(default_factory=list)
    written: set = field(default_factory=set)
    latches: list = field(default_factory=list)  # per macro: (values, WriteGroup)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if not self.cells:
            self.cells = [
                [[0] * self.cols for _ in range(self.rows)]
                for _ in range(self.n_macros)
            ]
        self.latches = [None] * self.n_macros

    def write(self, macro, row, col, value):
        self.cells[macro][row][col] = value
        self.written.add((macro, row, col))

    def read(self, macro, row, col, cycle):
        if (macro, row, col) not in self.written:
            self.warnings.append(
                f"cycle {cycle}: macro {macro} read never-written cell "
                f"({row}, {col})"
            )
        return self.cells[macro][row][col]


def run_schedule(
    schedule: Schedule,
    topo: Topology,
    input_masks: list[int],
    width: int,
    trace: list | None = None,
    warnings_out: list | None = None,
) -> list[int]:
    """Execute against ``width`` packed vectors; returns output masks.

    The schedule is validated first and rejected if illegal.
    """
    diags = validate_schedule(schedule, topo)
    if diags:
        raise ScheduleError(
            f"schedule has {len(diags)} legality violations", diagnostics=diags
        )
    full = (1 << width) - 1
    mem = MemState(
        n_macros=topo.macro_count,
        rows=topo.rows * topo.banks,
        cols=topo.cols,
        width=width,
    )
    # host preload: inputs and constants land before cycle 0
    for slot, kind, ref in schedule.preload_ops:
        if kind == "input":
            mem.write(slot[0], slot[1], slot[2], input_masks[ref] & full)
        else:
            mem.write(slot[0], slot[1], slot[2], full if ref else 0)

    by_cycle = schedule.by_cycle()
    for cycle in range(schedule.num_cycles):
        # reads and computes of this cycle see pre-cycle memory
        latched = []
        for c in by_cycle.get(cycle, ()):
            values = []
            for lane in c.lanes:
                a = mem.read(c.macro, c.row_a, lane.col_a, cycle)
                b = mem.read(c.macro, c.row_b, lane.col_b, cycle)
                if c.op == NAND2:
                    r = (a & b) ^ full
                elif c.op == NOR2:
                    r = (a | b) ^ full
                else:  # NOT as single-operand NAND
                    r = a ^ full
                values.append(r)
            latched.append((c, values))
            if trace is not None:
                trace.append(
                    f"{cycle} m{c.macro} {c.op} rA={c.row_a} rB={c.row_b} "
                    + " ".join(f"{v & full:x}" for v in values)
                )
        # writes pending from the previous cycle land at the end of this one
        for macro in range(topo.macro_count):
            pend = mem.latches[macro]
            if pend is not None:
                values, wg = pend
                for col, lane_idx in wg.items:
                    mem.write(wg.macro, wg.row, col, values[lane_idx])
                if trace is not None:
                    trace.append(
                        f"{cycle} m{macro} write -> m{wg.macro} r{wg.row} "
                        f"cols {[col for col, _ in wg.items]}"
                    )
            mem.latches[macro] = None
        for c, values in latched:
            if c.write is not None:
                mem.latches[c.macro] = (values, c.write)

    outs = []
    for name, slot, const in schedule.outputs:
        if slot is None:
            outs.append(full if const else 0)
        else:
            outs.append(mem.read(slot.macro, slot.row, slot.col, schedule.num_cycles))
    if warnings_out is not None:
        warnings_out.extend(mem.warnings)
    return outs


@dataclass
class EquivalenceReport:
    n_vectors: int
    exhaustive: bool
    cycles: int
    mismatches: list  # (vector index, expected bits, got bits)
    warnings: list

    @property
    def passed(self) -> bool:
        return not self.mismatches


def check_equivalence(
    g: Aig,
    schedule: Schedule,
    topo: Topology,
    n_vectors: int = 1000,
    seed: int = 2024,
) -> EquivalenceReport:
    """Mapped-schedule output vs the AIG oracle; exhaustive up to 12 inputs."""
    if g.num_inputs <= 12:
        masks = exhaustive_masks(g.num_inputs)
        width = 1 << g.num_inputs
        exhaustive = True
    else:
        masks = random_vectors(g.num_inputs, n_vectors, seed)
        width = n_vectors
        exhaustive = False
    expected = g.simulate(masks, width)
    trace_warnings: list = []
    mem_out = run_schedule(schedule, topo, masks, width, warnings_out=trace_warnings)
    mismatches = []
    for v in range(width):
        exp = [(m >> v) & 1 for m in expected]
        got = [(m >> v) & 1 for m in mem_out]
        if exp != got:
            mismatches.append((v, exp, got))
            if len(mismatches) >= 16:
                break
    return EquivalenceReport(
        n_vectors=width,
        exhaustive=exhaustive,
        cycles=schedule.num_cycles,
        mismatches=mismatches,
        warnings=trace_warnings,
    )


def map_and_check(g: Aig, topo: Topology, pipelined: bool = True, **kw):
    """Convenience: techmap, schedule, verify; returns (net, schedule, report)."""
    net = map_to_gates(g)
    placement, schedule = place_and_schedule(net, topo, pipelined=pipelined)
    report = check_equivalence(g, schedule, topo, **kw)
    return net, placement, schedule, report
