"""Map an optimized AIG onto the in-memory gate set {NAND2, NOR2, NOT}.

Covering rule: an AND node whose fanin edges are both complemented
becomes a NOR2 over the underlying signals (producing the node's value
directly, by De Morgan); every other AND node becomes a NAND2 producing
the complemented value.  A single topological pass then inserts one
shared NOT per signal/polarity actually demanded by consumers.

Levels are as-soon-as-possible: inputs at 0, every gate at
1 + max(fanin levels); NOT gates occupy a level of their own.  The
optional fold_not accounting treats a NOT as a single-operand NAND2
executed inside its consumer's cycle instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .aig import CONST0, Aig, lit_neg, lit_node

NAND2 = "NAND2"
NOR2 = "NOR2"
NOT = "NOT"

GATE_TYPES = (NAND2, NOR2, NOT)


@dataclass
class Gate:
    kind: str
    fanins: tuple[str, ...]
    output: str
    level: int = 0


@dataclass
class GateNetlist:
    inputs: list[str] = field(default_factory=list)
    outputs: list[tuple[str, str | None, int | None]] = field(default_factory=list)
    # outputs: (name, signal or None, const value when signal is None)
    gates: list[Gate] = field(default_factory=list)

    def gate_count(self) -> int:
        return len(self.gates)

    def counts_by_type(self) -> dict[str, int]:
        counts = {t: 0 for t in GATE_TYPES}
        for gate in self.gates:
            counts[gate.kind] += 1
        return counts

    def depth(self) -> int:
        return max((g.level for g in self.gates), default=0)

    def simulate(self, input_masks: list[int], width: int) -> list[int]:
        full = (1 << width) - 1
        vals = {name: m & full for name, m in zip(self.inputs, input_masks)}
        for gate in self.gates:
            ins = [vals[f] for f in gate.fanins]
            if gate.kind == NAND2:
                vals[gate.output] = (ins[0] & ins[1]) ^ full
            elif gate.kind == NOR2:
                vals[gate.output] = (ins[0] | ins[1]) ^ full
            else:
                vals[gate.output] = ins[0] ^ full
        outs = []
        for _, signal, const in self.outputs:
            if signal is None:
                outs.append(full if const else 0)
            else:
                outs.append(vals[signal])
        return outs

    def dumps(self) -> str:
        """Line-oriented text form: type, fanins, output, level."""
        lines = [f"# inputs: {' '.join(self.inputs)}"]
        outs = []
        for name, signal, const in self.outputs:
            outs.append(f"{name}={signal if signal is not None else const}")
        lines.append(f"# outputs: {' '.join(outs)}")
        for g in self.gates:
            lines.append(f"{g.kind} {' '.join(g.fanins)} {g.output} {g.level}")
        return "\n".join(lines) + "\n"


@dataclass
class LevelProfile:
    depth: int
    nand2: list[int]  # per-level counts, index 0 unused (inputs)
    nor2: list[int]
    inv: list[int]

    @property
    def total_nand2(self) -> int:
        return sum(self.nand2)

    @property
    def total_nor2(self) -> int:
        return sum(self.nor2)

    @property
    def total_inv(self) -> int:
        return sum(self.inv)

    @property
    def total_gates(self) -> int:
        return self.total_nand2 + self.total_nor2 + self.total_inv

    def level_counts(self, level: int) -> dict[str, int]:
        return {
            NAND2: self.nand2[level],
            NOR2: self.nor2[level],
            NOT: self.inv[level],
        }

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "nand2": self.nand2,
            "nor2": self.nor2,
            "not": self.inv,
            "totals": {
                "nand2": self.total_nand2,
                "nor2": self.total_nor2,
                "not": self.total_inv,
                "gates": self.total_gates,
            },
        }


def map_to_gates(g: Aig) -> GateNetlist:
    g = g.compact()
    net = GateNetlist(inputs=list(g.input_names))
    # producer signal and polarity per node: (signal name, inverted?)
    produced: dict[int, tuple[str, bool]] = {}
    for idx in range(1, g.num_inputs + 1):
        produced[idx] = (g.input_names[idx - 1], False)

    not_cache: dict[str, str] = {}

    def signal_for(node: int, want_complement: bool) -> str:
        base, inverted = produced[node]
        if inverted == want_complement:
            return base
        if base not in not_cache:
            inv_name = f"{base}_n"
            net.gates.append(Gate(NOT, (base,), inv_name))
            not_cache[base] = inv_name
        return not_cache[base]

    for n in g.topo_order():
        f0, f1 = g.fanin0[n], g.fanin1[n]
        name = f"g{n}"
        if lit_neg(f0) and lit_neg(f1):
            # NOR2 over the raw signals yields the AND of their complements
            a = signal_for(lit_node(f0), False)
            b = signal_for(lit_node(f1), False)
            net.gates.append(Gate(NOR2, (a, b), name))
            produced[n] = (name, False)
        else:
            a = signal_for(lit_node(f0), lit_neg(f0))
            b = signal_for(lit_node(f1), lit_neg(f1))
            net.gates.append(Gate(NAND2, (a, b), name))
            produced[n] = (name, True)

    for o, oname in zip(g.outputs, g.output_names):
        node = lit_node(o)
        if node == CONST0:
            net.outputs.append((oname, None, lit_neg(o)))
        else:
            net.outputs.append((oname, signal_for(node, bool(lit_neg(o))), None))

    _assign_levels(net)
    return net


def _assign_levels(net: GateNetlist) -> None:
    level = {name: 0 for name in net.inputs}
    for gate in net.gates:
        gate.level = 1 + max(level[f] for f in gate.fanins)
        level[gate.output] = gate.level


def characterize(net: GateNetlist, fold_not: bool = False) -> LevelProfile:
    """Per-level operation histograms.

    With fold_not, NOT gates are transparent for levelization and their
    count is booked as NAND2 work in the cycle of their consumer level.
    """
    if not net.gates:
        return LevelProfile(0, [0], [0], [0])
    if not fold_not:
        depth = net.depth()
        nand = [0] * (depth + 1)
        nor = [0] * (depth + 1)
        inv = [0] * (depth + 1)
        for g in net.gates:
            if g.kind == NAND2:
                nand[g.level] += 1
            elif g.kind == NOR2:
                nor[g.level] += 1
            else:
                inv[g.level] += 1
        return LevelProfile(depth, nand, nor, inv)

    # folded accounting: NOT executes as a single-operand NAND2 inside the
    # cycle after its source, transparent for the level structure
    flevel: dict[str, int] = {name: 0 for name in net.inputs}
    for g in net.gates:
        src = max(flevel[f] for f in g.fanins)
        flevel[g.output] = src if g.kind == NOT else src + 1
    depth = max(
        (flevel[g.output] for g in net.gates if g.kind != NOT), default=0
    )
    not_depth = max(
        (flevel[g.output] + 1 for g in net.gates if g.kind == NOT), default=0
    )
    depth = max(depth, min(not_depth, depth + 1)) if net.gates else 0
    nand = [0] * (depth + 1)
    nor = [0] * (depth + 1)
    inv = [0] * (depth + 1)
    for g in net.gates:
        if g.kind == NAND2:
            nand[flevel[g.output]] += 1
        elif g.kind == NOR2:
            nor[flevel[g.output]] += 1
        else:
            slot = min(flevel[g.output] + 1, depth)
            nand[slot] += 1
    return LevelProfile(depth, nand, nor, inv)
