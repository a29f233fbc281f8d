"""Structural Verilog subset reader.

Supported: a single module with single-bit ``input``/``output``/``wire``
declarations and continuous ``assign`` statements over ``~ & ^ |``,
parentheses and the constants ``1'b0``/``1'b1``.  Operator precedence is
``~`` over ``&`` over ``^`` over ``|``.  Anything outside the subset is a
hard error, never silently ignored.
"""

from __future__ import annotations

import re

from ..errors import ParseError, UnsupportedConstruct
from .netlist import RawGate, RawNetlist

_UNSUPPORTED = {
    "always",
    "reg",
    "initial",
    "posedge",
    "negedge",
    "case",
    "if",
    "else",
    "for",
    "function",
    "task",
    "generate",
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<comment>//[^\n]*|/\*.*?\*/)"
    r"|(?P<const>1'b[01])"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_$]*|\\[^\s]+)"
    r"|(?P<num>[0-9]+)"
    r"|(?P<sym>[~&^|()=;,\[\]@#:<>{}.?*+\'\"-]))",
    re.DOTALL,
)


class _Tokens:
    def __init__(self, text: str):
        self.toks: list[tuple[str, str, int]] = []  # (kind, value, line)
        pos = 0
        line = 1
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                rest = text[pos:].lstrip()
                if not rest:
                    break
                raise ParseError(f"unexpected character {rest[0]!r}", line=line)
            line += text[pos : m.end()].count("\n")
            pos = m.end()
            if m.lastgroup == "comment":
                continue
            self.toks.append((m.lastgroup, m.group(m.lastgroup), line))
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None, -1)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, value):
        kind, val, line = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val!r}", line=line)
        return val


def parse_verilog_subset(text: str) -> RawNetlist:
    toks = _Tokens(text)
    kind, val, line = toks.next()
    if val != "module":
        raise ParseError("file must start with a module", line=max(line, 1))
    _, _modname, _ = toks.next()
    # optional port list
    kind, val, line = toks.peek()
    if val == "(":
        depth = 0
        while True:
            kind, val, line = toks.next()
            if val == "(":
                depth += 1
            elif val == ")":
                depth -= 1
                if depth == 0:
                    break
            elif val is None:
                raise ParseError("unterminated port list", line=line)
    toks.expect(";")

    net = RawNetlist()
    declared: set[str] = set()
    assigns: list[tuple[str, object, int]] = []

    while True:
        kind, val, line = toks.next()
        if val is None:
            raise ParseError("missing endmodule", line=line)
        if val == "endmodule":
            break
        if val in _UNSUPPORTED:
            raise UnsupportedConstruct(
                f"construct {val!r} is outside the supported subset", line=line
            )
        if val in ("input", "output", "wire"):
            names = _parse_decl(toks, line)
            for name in names:
                if name in declared and val != "output":
                    raise ParseError(f"net {name!r} declared twice", line=line)
                declared.add(name)
                if val == "input":
                    net.inputs.append(name)
                elif val == "output":
                    net.outputs.append(name)
        elif val == "assign":
            kind, target, tline = toks.next()
            if kind != "id":
                raise ParseError("assign target must be a net", line=tline)
            toks.expect("=")
            expr = _parse_expr(toks)
            toks.expect(";")
            assigns.append((target, expr, tline))
        else:
            raise UnsupportedConstruct(
                f"unsupported statement starting with {val!r}", line=line
            )

    known = set(net.inputs)
    for target, expr, line in assigns:
        if target not in declared:
            raise ParseError(f"assign to undeclared net {target!r}", line=line)
        for name in _expr_nets(expr):
            if name not in declared:
                raise ParseError(f"undeclared net {name!r}", line=line)

    # order assigns topologically (an assign may reference a later one)
    by_target = {t: (t, e, l) for t, e, l in assigns}
    if len(by_target) != len(assigns):
        raise ParseError("net assigned twice")
    emitted: set[str] = set(net.inputs)
    tmp_counter = [0]
    visiting: set[str] = set()

    def emit(target: str):
        if target in emitted:
            return
        if target in visiting:
            raise ParseError(f"combinational cycle through {target!r}")
        if target not in by_target:
            raise ParseError(f"net {target!r} is never assigned")
        visiting.add(target)
        _, expr, line = by_target[target]
        for name in _expr_nets(expr):
            emit(name)
        _lower_expr(expr, target, net, tmp_counter)
        visiting.discard(target)
        emitted.add(target)

    for target in by_target:
        emit(target)
    for out in net.outputs:
        if out not in emitted:
            raise ParseError(f"output {out!r} is not driven")
    net.validate()
    return net


def _parse_decl(toks, line):
    names = []
    while True:
        kind, val, dline = toks.next()
        if val == "[":
            raise UnsupportedConstruct(
                "vector nets are outside the supported subset", line=dline
            )
        if kind != "id":
            raise ParseError(f"expected net name, found {val!r}", line=dline)
        names.append(val)
        kind, val, dline = toks.next()
        if val == ";":
            return names
        if val != ",":
            raise ParseError(f"expected ',' or ';', found {val!r}", line=dline)


# expression AST: ("var", name) | ("const", 0/1) | ("not", e) | (op, a, b)


def _parse_expr(toks):
    return _parse_or(toks)


def _parse_or(toks):
    node = _parse_xor(toks)
    while toks.peek()[1] == "|":
        toks.next()
        node = ("or", node, _parse_xor(toks))
    return node


def _parse_xor(toks):
    node = _parse_and(toks)
    while toks.peek()[1] == "^":
        toks.next()
        node = ("xor", node, _parse_and(toks))
    return node


def _parse_and(toks):
    node = _parse_unary(toks)
    while toks.peek()[1] == "&":
        toks.next()
        node = ("and", node, _parse_unary(toks))
    return node


def _parse_unary(toks):
    kind, val, line = toks.next()
    if val == "~":
        return ("not", _parse_unary(toks))
    if val == "(":
        node = _parse_expr(toks)
        toks.expect(")")
        return node
    if kind == "const":
        return ("const", int(val[-1]))
    if kind == "id":
        return ("var", val)
    raise ParseError(f"unexpected token {val!r} in expression", line=line)


def _expr_nets(expr):
    tag = expr[0]
    if tag == "var":
        yield expr[1]
    elif tag == "not":
        yield from _expr_nets(expr[1])
    elif tag in ("and", "or", "xor"):
        yield from _expr_nets(expr[1])
        yield from _expr_nets(expr[2])


def _lower_expr(expr, target, net, tmp_counter):
    def fresh():
        tmp_counter[0] += 1
        return f"_t{tmp_counter[0]}"

    def lower(e, out=None):
        tag = e[0]
        if tag == "var":
            if out is None:
                return e[1]
            net.gates.append(RawGate("BUF", (e[1],), out))
            return out
        name = out if out is not None else fresh()
        if tag == "const":
            net.gates.append(RawGate("CONST1" if e[1] else "CONST0", (), name))
        elif tag == "not":
            net.gates.append(RawGate("NOT", (lower(e[1]),), name))
        else:
            a = lower(e[1])
            b = lower(e[2])
            net.gates.append(RawGate(tag.upper(), (a, b), name))
        return name

    lower(expr, target)
