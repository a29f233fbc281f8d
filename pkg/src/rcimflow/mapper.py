"""Place operands and emit a legal cycle-accurate schedule.

Execution model per compute cycle and macro: one operation kind, two
asserted read wordlines (rowA, rowB), and up to cols/2 lanes, one per
column pair; lane p reads its A operand at (rowA, 2p) and its B operand
at (rowB, 2p).  Results latch in the compute cycle and are written in
the next cycle, one target row per target macro per cycle.

Operand staging works by *writing forward*: a producing batch's write
targets the staging rows of the consuming batches directly (the write
bus reaches any macro).  When one batch feeds several destination rows,
the batch's compute cycle is replayed once per destination group with
the staging rows still live, so every copy is produced by the same
operand reads.  This keeps role-locked topologies legal: a macro only
ever executes its own operation kind.

Rows are recycled once a batch's last replay has read them; a reused row
only accepts writes after that cycle, and rows that must be preloaded
with primary inputs are always fresh.  Bank structure is not modeled in
scheduling (one bank is simply a power-accounting division), so row
indices span the whole macro.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CapacityError
from .techmap import NAND2, NOT, GateNetlist
from .topology import Topology, capacity


@dataclass(frozen=True)
class Slot:
    macro: int
    row: int
    col: int


@dataclass
class Lane:
    pair: int
    col_a: int
    col_b: int


@dataclass
class WriteGroup:
    macro: int
    row: int
    items: list[tuple[int, int]]  # (col, lane index)


@dataclass
class ComputeCycle:
    cycle: int
    macro: int
    op: str
    row_a: int
    row_b: int
    lanes: list[Lane]
    write: WriteGroup | None  # executes at cycle + 1


@dataclass
class Placement:
    slots: dict = field(default_factory=dict)  # signal -> list[Slot]
    preloads: list = field(default_factory=list)  # (Slot, kind, ref) kind in {input,const}
    rows_used: dict = field(default_factory=dict)  # macro -> high-water row count

    def add(self, signal: str, slot: Slot):
        self.slots.setdefault(signal, []).append(slot)


@dataclass
class Schedule:
    topology_name: str
    n_macros: int
    pipelined: bool
    computes: list[ComputeCycle] = field(default_factory=list)
    outputs: list = field(default_factory=list)  # (name, Slot | None, const)
    preloaded: set = field(default_factory=set)  # slot keys written before cycle 0
    preload_ops: list = field(default_factory=list)  # (slot key, kind, ref)
    source_depth: int = 0

    @property
    def num_cycles(self) -> int:
        """Total cycles including the final write drain."""
        if not self.computes:
            return 0
        return max(c.cycle for c in self.computes) + 2

    def by_cycle(self) -> dict[int, list[ComputeCycle]]:
        table: dict[int, list[ComputeCycle]] = {}
        for c in self.computes:
            table.setdefault(c.cycle, []).append(c)
        return table

    def op_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for c in self.computes:
            counts[c.op] = counts.get(c.op, 0) + len(c.lanes)
        return counts

    def write_bits(self) -> int:
        return sum(len(c.write.items) for c in self.computes if c.write)

    def dumps(self) -> str:
        """One line per compute: cycle, macro, op, rows, lanes, write target."""
        lines = [
            f"# schedule for {self.topology_name}, "
            f"{self.num_cycles} cycles, pipelined={self.pipelined}"
        ]
        for c in sorted(self.computes, key=lambda c: (c.cycle, c.macro)):
            lanes = ",".join(f"{l.pair}:{l.col_a}:{l.col_b}" for l in c.lanes)
            if c.write:
                wr = (
                    f"w@{c.cycle + 1}->m{c.write.macro}r{c.write.row}"
                    f"[{','.join(f'{col}<{lane}' for col, lane in c.write.items)}]"
                )
            else:
                wr = "w:none"
            lines.append(
                f"{c.cycle} m{c.macro} {c.op} rA={c.row_a} rB={c.row_b} "
                f"lanes={lanes} {wr}"
            )
        return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------


class _RowPool:
    """Per-macro row allocator with recycle-after timestamps."""

    def __init__(self, total_rows: int):
        self.total = total_rows
        self.cursor = 0
        self.freed: list[tuple[int, int]] = []  # (row, available_from)

    def alloc(self, need_preload: bool):
        if self.cursor < self.total:
            row = self.cursor
            self.cursor += 1
            return row, 0
        if not need_preload and self.freed:
            self.freed.sort()
            row, avail = self.freed.pop(0)
            return row, avail
        return None, None

    def release(self, row: int, available_from: int):
        self.freed.append((row, available_from))


@dataclass
class _Batch:
    index: int
    macro: int
    op: str
    level: int
    gates: list  # Gate objects, lane i <-> gates[i]
    vrow_a: int = -1  # virtual staging row ids
    vrow_b: int = -1


def place_and_schedule(
    net: GateNetlist, topo: Topology, pipelined: bool = True
) -> tuple[Placement, Schedule]:
    cap = capacity(topo)
    total_rows = topo.rows * topo.banks
    pools = [_RowPool(total_rows) for _ in range(topo.macro_count)]
    placement = Placement()
    schedule = Schedule(
        topology_name=topo.name,
        n_macros=topo.macro_count,
        pipelined=pipelined,
        source_depth=net.depth(),
    )

    # ----- phase A: batch formation ------------------------------------
    by_level: dict[int, dict[str, list]] = {}
    for gate in net.gates:
        by_level.setdefault(gate.level, {}).setdefault(gate.kind, []).append(gate)

    batches: list[_Batch] = []
    lane_of: dict[str, tuple[int, int]] = {}  # output signal -> (batch idx, lane)
    for level in sorted(by_level):
        for op in (NAND2, "NOR2", NOT):
            gates = by_level[level].get(op)
            if not gates:
                continue
            macros = topo.macros_for(op)
            chunks = [gates[i : i + cap] for i in range(0, len(gates), cap)]
            for i, chunk in enumerate(chunks):
                macro = macros[i % len(macros)]
                b = _Batch(len(batches), macro, op, level, chunk)
                batches.append(b)
                for lane, gate in enumerate(chunk):
                    lane_of[gate.output] = (b.index, lane)

    # virtual staging rows; a vrow needing input/const preload is flagged
    vrow_count = 0
    vrow_preload: list[bool] = []
    vrow_macro: list[int] = []

    def new_vrow(macro: int) -> int:
        nonlocal vrow_count
        vrow_preload.append(False)
        vrow_macro.append(macro)
        vrow_count += 1
        return vrow_count - 1

    input_names = set(net.inputs)
    for b in batches:
        b.vrow_a = new_vrow(b.macro)
        b.vrow_b = b.vrow_a if b.op == NOT else new_vrow(b.macro)
        for gate in b.gates:
            for side, fanin in enumerate(gate.fanins):
                if fanin in input_names:
                    vrow = b.vrow_a if side == 0 else b.vrow_b
                    vrow_preload[vrow] = True

    # destination slots per producing signal: (vrow, col) or output region
    dest_of: dict[str, list[tuple[int, int]]] = {}
    for b in batches:
        for lane, gate in enumerate(b.gates):
            col = 2 * lane
            for side, fanin in enumerate(gate.fanins):
                if b.op == NOT and side == 1:
                    break  # single operand
                vrow = b.vrow_a if side == 0 else b.vrow_b
                dest_of.setdefault(fanin, []).append((vrow, col))

    # output region: dedicated vrows per macro, filled in slot order
    out_region: dict[int, list[int]] = {}
    out_fill: dict[int, int] = {}

    def output_slot_v(macro: int) -> tuple[int, int]:
        fill = out_fill.get(macro, 0)
        rows = out_region.setdefault(macro, [])
        if fill // topo.cols >= len(rows):
            rows.append(new_vrow(macro))
        out_fill[macro] = fill + 1
        return rows[fill // topo.cols], fill % topo.cols

    output_places: list[tuple[str, str | None, int | None, tuple | None]] = []
    for name, signal, const in net.outputs:
        if signal is None:
            output_places.append((name, None, const, None))
        elif signal in lane_of:
            bidx, _ = lane_of[signal]
            vslot = output_slot_v(batches[bidx].macro)
            dest_of.setdefault(signal, []).append(vslot)
            output_places.append((name, signal, None, vslot))
        else:
            # passthrough of an input: preload into an output slot
            vslot = output_slot_v(0)
            vrow_preload[vslot[0]] = True
            output_places.append((name, signal, None, vslot))

    # constants feeding outputs get a preloaded slot too
    # (gates never have constant fanins after AIG construction)

    # ----- phase B: scheduling ------------------------------------------
    vrow_phys: dict[int, int] = {}
    vrow_avail: dict[int, int] = {}
    write_booked: dict[tuple[int, int], int] = {}  # (cycle, macro) -> row
    macro_busy = [0] * topo.macro_count
    macro_compute_booked: set[tuple[int, int]] = set()
    value_write_cycle: dict[tuple[int, int, int], int] = {}  # slot key -> write cycle

    def materialize(vrow: int, level_hint: int) -> int:
        if vrow in vrow_phys:
            return vrow_phys[vrow]
        macro = vrow_macro[vrow]
        row, avail = pools[macro].alloc(vrow_preload[vrow])
        if row is None:
            raise CapacityError(
                f"macro {macro} ran out of rows "
                f"({total_rows} rows, {vrow_count} staging rows needed)",
                level=level_hint,
            )
        vrow_phys[vrow] = row
        vrow_avail[vrow] = avail
        placement.rows_used[macro] = max(placement.rows_used.get(macro, 0), row + 1)
        return row

    # preload inputs and constants into every slot that needs them
    input_index = {name: i for i, name in enumerate(net.inputs)}

    def preload(vrow: int, col: int, signal: str):
        row = materialize(vrow, 0)
        slot = Slot(vrow_macro[vrow], row, col)
        placement.add(signal, slot)
        placement.preloads.append((slot, "input", input_index[signal]))
        key = (slot.macro, slot.row, slot.col)
        schedule.preloaded.add(key)
        schedule.preload_ops.append((key, "input", input_index[signal]))

    for signal in sorted(dest_of):
        if signal in input_names:
            for vrow, col in dest_of[signal]:
                preload(vrow, col, signal)

    for name, signal, const, vslot in output_places:
        if vslot is not None and signal in input_names:
            preload(vslot[0], vslot[1], signal)

    def find_compute_cycle(macro, earliest, wmacro, wrow_avail_from, wmacro_row):
        c = earliest
        while True:
            if (c, macro) in macro_compute_booked:
                c += 1
                continue
            wcycle = c + 1
            booked = write_booked.get((wcycle, wmacro))
            if booked is not None and booked != wmacro_row:
                c += 1
                continue
            if wcycle < wrow_avail_from:
                c = wrow_avail_from - 1
                continue
            return c

    for b in batches:
        row_a = materialize(b.vrow_a, b.level)
        row_b = materialize(b.vrow_b, b.level)
        lanes = [Lane(p, 2 * p, 2 * p) for p in range(len(b.gates))]

        # operand readiness: one cycle after the latest staging write
        ready = 0
        for lane, gate in enumerate(b.gates):
            col = 2 * lane
            for side, fanin in enumerate(gate.fanins):
                if b.op == NOT and side == 1:
                    break
                row = row_a if side == 0 else row_b
                w = value_write_cycle.get((b.macro, row, col))
                if w is not None:
                    ready = max(ready, w + 1)

        # destination groups: (virtual row -> physical), grouped by row
        groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for lane, gate in enumerate(b.gates):
            for vrow, col in dest_of.get(gate.output, ()):
                trow = materialize(vrow, b.level)
                tmacro = vrow_macro[vrow]
                groups.setdefault((tmacro, trow), []).append((col, lane))
                slot = Slot(tmacro, trow, col)
                placement.add(gate.output, slot)

        earliest = max(macro_busy[b.macro], ready)
        group_keys = sorted(groups)
        if not group_keys:
            group_keys = [None]  # dead gates still execute once
        last_cycle = earliest
        for key in group_keys:
            if key is None:
                wg = None
                c = find_compute_cycle(b.macro, earliest, b.macro, 0, -1)
                wcycle = None
            else:
                tmacro, trow = key
                avail = 0
                for vrow, phys in vrow_phys.items():
                    if vrow_macro[vrow] == tmacro and phys == trow:
                        avail = max(avail, vrow_avail[vrow])
                c = find_compute_cycle(b.macro, earliest, tmacro, avail, trow)
                wcycle = c + 1
                wg = WriteGroup(tmacro, trow, sorted(groups[key]))
            schedule.computes.append(
                ComputeCycle(c, b.macro, b.op, row_a, row_b, lanes, wg)
            )
            macro_compute_booked.add((c, b.macro))
            if wg is not None:
                write_booked[(wcycle, wg.macro)] = wg.row
                for col, lane in wg.items:
                    value_write_cycle[(wg.macro, wg.row, col)] = wcycle
            last_cycle = c
            earliest = c + 1 if pipelined else c + 2
        macro_busy[b.macro] = earliest

        # staging rows are free after the last replay has read them
        pools[b.macro].release(row_a, last_cycle + 1)
        vrow_avail[b.vrow_a] = last_cycle + 1
        if row_b != row_a:
            pools[b.macro].release(row_b, last_cycle + 1)
            vrow_avail[b.vrow_b] = last_cycle + 1

    # resolve output slots
    for name, signal, const, vslot in output_places:
        if vslot is None:
            schedule.outputs.append((name, None, const))
        else:
            vrow, col = vslot
            slot = Slot(vrow_macro[vrow], vrow_phys[vrow], col)
            schedule.outputs.append((name, slot, None))

    schedule.computes.sort(key=lambda c: (c.cycle, c.macro))
    return placement, schedule


# ----------------------------------------------------------------------
# legality validation


@dataclass(frozen=True)
class Diagnostic:
    code: str
    cycle: int
    macro: int
    detail: str


def validate_schedule(schedule: Schedule, topo: Topology) -> list[Diagnostic]:
    """Structural legality; empty result means the schedule is clean."""
    diags: list[Diagnostic] = []
    cap = capacity(topo)
    total_rows = topo.rows * topo.banks
    role_locked = topo.macro_count in (3, 6)

    per_cycle_macro: dict[tuple[int, int], ComputeCycle] = {}
    for c in schedule.computes:
        if len(c.lanes) > cap:
            diags.append(
                Diagnostic("CapacityExceeded", c.cycle, c.macro,
                           f"{len(c.lanes)} lanes > capacity {cap}")
            )
        if not 0 <= c.macro < topo.macro_count:
            diags.append(Diagnostic("BadMacro", c.cycle, c.macro, "macro out of range"))
            continue
        if not (0 <= c.row_a < total_rows and 0 <= c.row_b < total_rows):
            diags.append(Diagnostic("BadRow", c.cycle, c.macro, "read row out of range"))
        seen_pairs = set()
        for lane in c.lanes:
            if lane.pair in seen_pairs:
                diags.append(
                    Diagnostic("PairConflict", c.cycle, c.macro,
                               f"pair {lane.pair} used twice")
                )
            seen_pairs.add(lane.pair)
            for col in (lane.col_a, lane.col_b):
                if col // 2 != lane.pair:
                    diags.append(
                        Diagnostic("ColumnOutsidePair", c.cycle, c.macro,
                                   f"col {col} outside pair {lane.pair}")
                    )
                if not 0 <= col < topo.cols:
                    diags.append(
                        Diagnostic("BadColumn", c.cycle, c.macro, f"col {col}")
                    )
        key = (c.cycle, c.macro)
        if key in per_cycle_macro:
            diags.append(
                Diagnostic("DoubleCompute", c.cycle, c.macro,
                           "two compute cycles on one macro in one cycle")
            )
        per_cycle_macro[key] = c
        if role_locked and c.macro not in topo.macros_for(c.op):
            diags.append(
                Diagnostic("RoleViolation", c.cycle, c.macro,
                           f"{c.op} not assigned to macro {c.macro}")
            )

    # write legality: one row per (cycle, target macro)
    writes_at: dict[tuple[int, int], set[int]] = {}
    for c in schedule.computes:
        if c.write is None:
            continue
        writes_at.setdefault((c.cycle + 1, c.write.macro), set()).add(c.write.row)
        for col, lane_idx in c.write.items:
            if lane_idx >= len(c.lanes):
                diags.append(
                    Diagnostic("BadLaneRef", c.cycle, c.macro,
                               f"write references lane {lane_idx}")
                )
    for (cycle, macro), rows in sorted(writes_at.items()):
        if len(rows) > 1:
            diags.append(
                Diagnostic("WriteRowConflict", cycle, macro,
                           f"rows {sorted(rows)} written in one cycle")
            )

    # read-after-write ordering
    write_time: dict[tuple[int, int, int], int] = {}
    for c in schedule.computes:
        if c.write is None:
            continue
        for col, _ in c.write.items:
            key = (c.write.macro, c.write.row, col)
            t = c.cycle + 1
            if key not in write_time or write_time[key] > t:
                write_time[key] = t
    for c in schedule.computes:
        for lane in c.lanes:
            for row, col in ((c.row_a, lane.col_a), (c.row_b, lane.col_b)):
                key = (c.macro, row, col)
                if key in schedule.preloaded:
                    continue
                t = write_time.get(key)
                if t is None:
                    continue  # reading background cells is the simulator's warning
                if t >= c.cycle:
                    diags.append(
                        Diagnostic(
                            "ReadBeforeWrite", c.cycle, c.macro,
                            f"slot m{key[0]} r{key[1]} c{key[2]} first "
                            f"written at cycle {t}",
                        )
                    )
    return diags
