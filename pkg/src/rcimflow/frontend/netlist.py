"""Gate-level intermediate form shared by the Verilog and BLIF readers.

A RawNetlist is a flat, single-bit, combinational netlist.  Gate fanins
must reference inputs or earlier gate outputs, so the gate list is a
topological order by construction; :func:`RawNetlist.validate` enforces
this along with name uniqueness and driven outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..aig import CONST0, CONST1, Aig, lit, lit_not
from ..errors import ParseError

GATE_OPS = {
    "AND",
    "OR",
    "NOT",
    "XOR",
    "NAND",
    "NOR",
    "BUF",
    "CONST0",
    "CONST1",
}

_ARITY = {
    "AND": 2,
    "OR": 2,
    "XOR": 2,
    "NAND": 2,
    "NOR": 2,
    "NOT": 1,
    "BUF": 1,
    "CONST0": 0,
    "CONST1": 0,
}


@dataclass
class RawGate:
    op: str
    fanins: tuple[str, ...]
    output: str


@dataclass
class RawNetlist:
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    gates: list[RawGate] = field(default_factory=list)

    def validate(self) -> None:
        if len(set(self.inputs)) != len(self.inputs):
            raise ParseError("duplicate input names")
        defined = set(self.inputs)
        for gate in self.gates:
            if gate.op not in GATE_OPS:
                raise ParseError(f"unknown gate op {gate.op!r}")
            if len(gate.fanins) != _ARITY[gate.op]:
                raise ParseError(
                    f"gate {gate.output!r}: {gate.op} expects "
                    f"{_ARITY[gate.op]} fanins, got {len(gate.fanins)}"
                )
            for f in gate.fanins:
                if f not in defined:
                    raise ParseError(
                        f"gate {gate.output!r} reads undefined net {f!r}"
                    )
            if gate.output in defined:
                raise ParseError(f"net {gate.output!r} driven twice")
            defined.add(gate.output)
        for out in self.outputs:
            if out not in defined:
                raise ParseError(f"output {out!r} is not driven")

    def to_aig(self) -> Aig:
        """Lower to an AIG; XOR uses the standard 3-AND decomposition."""
        self.validate()
        g = Aig()
        nets: dict[str, int] = {}
        for name in self.inputs:
            nets[name] = lit(g.add_input(name))
        for gate in self.gates:
            ins = [nets[f] for f in gate.fanins]
            if gate.op == "AND":
                v = g.and_lit(*ins)
            elif gate.op == "OR":
                v = g.or_lit(*ins)
            elif gate.op == "XOR":
                v = g.xor_lit(*ins)
            elif gate.op == "NAND":
                v = lit_not(g.and_lit(*ins))
            elif gate.op == "NOR":
                v = lit_not(g.or_lit(*ins))
            elif gate.op == "NOT":
                v = lit_not(ins[0])
            elif gate.op == "BUF":
                v = ins[0]
            elif gate.op == "CONST0":
                v = CONST0
            else:  # CONST1
                v = CONST1
            nets[gate.output] = v
        for name in self.outputs:
            g.add_output(nets[name], name)
        return g

    def simulate(self, patterns: list[list[int]]) -> list[list[int]]:
        """Direct gate-level evaluation, independent of the AIG path."""
        results = []
        for pat in patterns:
            if len(pat) != len(self.inputs):
                raise ParseError("pattern width mismatch")
            nets = dict(zip(self.inputs, pat))
            for gate in self.gates:
                vals = [nets[f] for f in gate.fanins]
                nets[gate.output] = _eval_gate(gate.op, vals)
            results.append([nets[o] for o in self.outputs])
        return results


def _eval_gate(op: str, vals: list[int]) -> int:
    if op == "AND":
        return vals[0] & vals[1]
    if op == "OR":
        return vals[0] | vals[1]
    if op == "XOR":
        return vals[0] ^ vals[1]
    if op == "NAND":
        return 1 - (vals[0] & vals[1])
    if op == "NOR":
        return 1 - (vals[0] | vals[1])
    if op == "NOT":
        return 1 - vals[0]
    if op == "BUF":
        return vals[0]
    if op == "CONST0":
        return 0
    return 1
