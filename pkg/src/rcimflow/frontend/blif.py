"""BLIF reader feeding the RawNetlist path.

Handles ``.model``/``.inputs``/``.outputs``/``.names`` with on-set or
off-set single-output covers; ``.latch`` (or any sequential directive)
is rejected.  Each cover is expanded into AND/OR/NOT gates.
"""

from __future__ import annotations

from ..errors import ParseError, UnsupportedSequential
from .netlist import RawGate, RawNetlist


def parse_blif(text: str) -> RawNetlist:
    lines: list[tuple[int, str]] = []
    pending = ""
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if "#" in raw:
            raw = raw[: raw.index("#")]
        raw = raw.rstrip()
        if raw.endswith("\\"):
            if not pending:
                pending_line = lineno
            pending += raw[:-1] + " "
            continue
        full = pending + raw
        if pending:
            lines.append((pending_line, full))
            pending = ""
        elif full.strip():
            lines.append((lineno, full))
    if pending:
        lines.append((pending_line, pending))

    net = RawNetlist()
    covers: list[tuple[int, list[str], str, list[tuple[str, str]]]] = []
    idx = 0
    seen_model = False
    while idx < len(lines):
        lineno, line = lines[idx]
        tokens = line.split()
        idx += 1
        if not tokens:
            continue
        cmd = tokens[0]
        if cmd == ".model":
            seen_model = True
        elif cmd == ".inputs":
            net.inputs.extend(tokens[1:])
        elif cmd == ".outputs":
            net.outputs.extend(tokens[1:])
        elif cmd in (".latch", ".clock"):
            raise UnsupportedSequential(
                f"sequential directive {cmd} is not supported", line=lineno
            )
        elif cmd == ".names":
            if len(tokens) < 2:
                raise ParseError(".names needs at least an output", line=lineno)
            fanins = tokens[1:-1]
            output = tokens[-1]
            cubes = []
            while idx < len(lines):
                nlineno, nline = lines[idx]
                if nline.lstrip().startswith("."):
                    break
                parts = nline.split()
                if len(fanins) == 0:
                    if len(parts) != 1 or parts[0] not in ("0", "1"):
                        raise ParseError("bad constant cover", line=nlineno)
                    cubes.append(("", parts[0]))
                else:
                    if len(parts) != 2:
                        raise ParseError("bad cover line", line=nlineno)
                    mask, value = parts
                    if len(mask) != len(fanins) or any(c not in "01-" for c in mask):
                        raise ParseError("bad cube mask", line=nlineno)
                    if value not in ("0", "1"):
                        raise ParseError("bad cover value", line=nlineno)
                    cubes.append((mask, value))
                idx += 1
            covers.append((lineno, fanins, output, cubes))
        elif cmd == ".end":
            break
        else:
            raise ParseError(f"unsupported BLIF directive {cmd}", line=lineno)
    if not seen_model:
        raise ParseError("missing .model")

    tmp = [0]

    def fresh():
        tmp[0] += 1
        return f"_b{tmp[0]}"

    for lineno, fanins, output, cubes in covers:
        values = {v for _, v in cubes}
        if len(values) > 1:
            raise ParseError(
                f"cover of {output!r} mixes on-set and off-set", line=lineno
            )
        if not cubes:
            net.gates.append(RawGate("CONST0", (), output))
            continue
        polarity = cubes[0][1]
        if not fanins:
            net.gates.append(
                RawGate("CONST1" if polarity == "1" else "CONST0", (), output)
            )
            continue
        cube_nets = []
        for mask, _ in cubes:
            literals = []
            for c, fanin in zip(mask, fanins):
                if c == "-":
                    continue
                if c == "1":
                    literals.append(fanin)
                else:
                    inv = fresh()
                    net.gates.append(RawGate("NOT", (fanin,), inv))
                    literals.append(inv)
            if not literals:
                cube_nets.append(None)  # tautology cube
                continue
            acc = literals[0]
            for other in literals[1:]:
                nxt = fresh()
                net.gates.append(RawGate("AND", (acc, other), nxt))
                acc = nxt
            cube_nets.append(acc)
        if any(c is None for c in cube_nets):
            sop = None
        else:
            acc = cube_nets[0]
            for other in cube_nets[1:]:
                nxt = fresh()
                net.gates.append(RawGate("OR", (acc, other), nxt))
                acc = nxt
            sop = acc
        if sop is None:
            net.gates.append(
                RawGate("CONST1" if polarity == "1" else "CONST0", (), output)
            )
        elif polarity == "1":
            net.gates.append(RawGate("BUF", (sop,), output))
        else:
            net.gates.append(RawGate("NOT", (sop,), output))
    net.validate()
    return net
