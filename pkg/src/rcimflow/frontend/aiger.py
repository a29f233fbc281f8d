"""AIGER reader and writer (ASCII ``aag`` and binary ``aig`` variants).

Only combinational files are accepted (L = 0).  Structural hashing is
applied while reading, so the node count of the parsed graph may be
smaller than the header's A field; literal polarity is preserved.
"""

from __future__ import annotations

from ..aig import CONST0, CONST1, Aig, lit, lit_neg, lit_node
from ..errors import ParseError, UnsupportedSequential


def parse_aiger(data: bytes) -> Aig:
    if not isinstance(data, (bytes, bytearray)):
        data = str(data).encode("ascii")
    newline = data.find(b"\n")
    if newline < 0:
        raise ParseError("missing AIGER header line", offset=0)
    header = data[:newline].split()
    if len(header) != 6 or header[0] not in (b"aag", b"aig"):
        raise ParseError("malformed AIGER header", offset=0)
    try:
        m, i, l, o, a = (int(x) for x in header[1:])
    except ValueError:
        raise ParseError("non-numeric AIGER header field", offset=0) from None
    if l > 0:
        raise UnsupportedSequential(f"AIGER file declares {l} latches")
    body = data[newline + 1 :]
    offset0 = newline + 1
    if header[0] == b"aag":
        return _parse_ascii(body, offset0, m, i, o, a)
    return _parse_binary(body, offset0, m, i, o, a)


def _parse_ascii(body, offset0, m, i, o, a):
    lines = body.split(b"\n")
    pos = 0
    offsets = []
    for ln in lines:
        offsets.append(offset0 + pos)
        pos += len(ln) + 1

    def ints(idx, count, what):
        if idx >= len(lines):
            raise ParseError(f"truncated {what} section", offset=offset0 + len(body))
        parts = lines[idx].split()
        if len(parts) != count:
            raise ParseError(
                f"expected {count} literal(s) in {what} line", offset=offsets[idx]
            )
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise ParseError(f"bad literal in {what} line", offset=offsets[idx]) from None

    input_lits = []
    for idx in range(i):
        (v,) = ints(idx, 1, "input")
        if v != 2 * (idx + 1):
            raise ParseError(f"input literal {v} out of order", offset=offsets[idx])
        input_lits.append(v)
    out_lits = []
    for idx in range(i, i + o):
        (v,) = ints(idx, 1, "output")
        if v > 2 * m + 1:
            raise ParseError(f"output literal {v} exceeds maxvar", offset=offsets[idx])
        out_lits.append(v)
    ands = []
    for idx in range(i + o, i + o + a):
        lhs, rhs0, rhs1 = ints(idx, 3, "and")
        if lhs & 1 or lhs <= 2 * i or lhs > 2 * m:
            raise ParseError(f"bad AND lhs {lhs}", offset=offsets[idx])
        ands.append((lhs, rhs0, rhs1))
    ands.sort(key=lambda t: t[0])
    for lhs, rhs0, rhs1 in ands:
        if rhs0 >= lhs or rhs1 >= lhs:
            raise ParseError(f"AND {lhs} references a later literal")
    return _build(i, out_lits, ands)


def _parse_binary(body, offset0, m, i, o, a):
    # outputs come as ASCII lines, then delta-encoded AND gates
    pos = 0
    out_lits = []
    for k in range(o):
        nl = body.find(b"\n", pos)
        if nl < 0:
            raise ParseError("truncated output section", offset=offset0 + pos)
        try:
            v = int(body[pos:nl])
        except ValueError:
            raise ParseError("bad output literal", offset=offset0 + pos) from None
        out_lits.append(v)
        pos = nl + 1

    def decode(pos):
        x = 0
        shift = 0
        while True:
            if pos >= len(body):
                raise ParseError("truncated delta code", offset=offset0 + pos)
            byte = body[pos]
            pos += 1
            x |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return x, pos
            shift += 7

    ands = []
    for k in range(a):
        lhs = 2 * (i + k + 1)
        delta0, pos = decode(pos)
        delta1, pos = decode(pos)
        rhs0 = lhs - delta0
        rhs1 = rhs0 - delta1
        if rhs0 < 0 or rhs1 < 0:
            raise ParseError(f"negative literal in AND {lhs}", offset=offset0 + pos)
        ands.append((lhs, rhs0, rhs1))
    return _build(i, out_lits, ands)


def _build(num_inputs, out_lits, ands):
    g = Aig(num_inputs)
    mapping = {0: CONST0, 1: CONST1}
    for idx in range(1, num_inputs + 1):
        mapping[2 * idx] = lit(idx)
        mapping[2 * idx + 1] = lit(idx, 1)

    def resolve(aiger_lit):
        v = mapping.get(aiger_lit)
        if v is None:
            raise ParseError(f"undefined literal {aiger_lit}")
        return v

    for lhs, rhs0, rhs1 in ands:
        v = g.strash_and(resolve(rhs0), resolve(rhs1))
        mapping[lhs] = v
        mapping[lhs + 1] = v ^ 1
    for ol in out_lits:
        g.add_output(resolve(ol))
    return g


def write_aiger(g: Aig, binary: bool = False) -> bytes:
    """Serialize; the graph is compacted first so ids are dense."""
    g = g.compact()
    order = g.topo_order()
    aiger_var = {CONST0: 0}
    for idx in range(1, g.num_inputs + 1):
        aiger_var[idx] = idx
    for k, n in enumerate(order):
        aiger_var[n] = g.num_inputs + k + 1

    def alit(l: int) -> int:
        return 2 * aiger_var[lit_node(l)] + lit_neg(l)

    m = g.num_inputs + len(order)
    header = f"{'aig' if binary else 'aag'} {m} {g.num_inputs} 0 {len(g.outputs)} {len(order)}\n"
    chunks = [header.encode("ascii")]
    if not binary:
        for idx in range(1, g.num_inputs + 1):
            chunks.append(f"{2 * idx}\n".encode("ascii"))
    for o in g.outputs:
        chunks.append(f"{alit(o)}\n".encode("ascii"))
    if binary:
        enc = bytearray()
        for n in order:
            lhs = 2 * aiger_var[n]
            rhs0, rhs1 = alit(g.fanin0[n]), alit(g.fanin1[n])
            if rhs0 < rhs1:
                rhs0, rhs1 = rhs1, rhs0
            for delta in (lhs - rhs0, rhs0 - rhs1):
                while True:
                    byte = delta & 0x7F
                    delta >>= 7
                    if delta:
                        enc.append(byte | 0x80)
                    else:
                        enc.append(byte)
                        break
        chunks.append(bytes(enc))
    else:
        for n in order:
            lhs = 2 * aiger_var[n]
            chunks.append(
                f"{lhs} {alit(g.fanin0[n])} {alit(g.fanin1[n])}\n".encode("ascii")
            )
    return b"".join(chunks)
