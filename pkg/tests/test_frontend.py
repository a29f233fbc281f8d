"""Parsers and writers: AIGER round trips, Verilog subset, BLIF."""

import pytest

from conftest import VERILOG_ADDER2, adder_oracle_outputs, fixture_circuits
from rcimflow.aig import equivalent, exhaustive_masks
from rcimflow.errors import ParseError, UnsupportedConstruct, UnsupportedSequential
from rcimflow.frontend import (
    parse_aiger,
    parse_blif,
    parse_verilog_subset,
    write_aiger,
)
from rcimflow.frontend.netlist import RawGate, RawNetlist


# ----------------------------------------------------------------------
# AIGER


def test_parse_buffer():
    g = parse_aiger(b"aag 1 1 0 1 0\n2\n2\n")
    assert g.num_inputs == 1 and len(g.outputs) == 1 and g.num_nodes() == 0


def test_parse_single_and():
    g = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n")
    assert g.num_inputs == 2 and g.num_nodes() == 1
    assert g.simulate(exhaustive_masks(2), 4) == [0b1000]


def test_parse_rejects_latches():
    with pytest.raises(UnsupportedSequential):
        parse_aiger(b"aag 3 1 1 1 0\n2\n4 2\n4\n")


def test_parse_error_carries_offset():
    with pytest.raises(ParseError) as err:
        parse_aiger(b"aag x 1 0 1 0\n2\n2\n")
    assert "byte 0" in str(err.value)

    with pytest.raises(ParseError) as err:
        parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\nnope\n")
    assert "byte" in str(err.value)


def test_structural_hash_dedupes_on_parse():
    # two textually distinct ANDs with identical fanins collapse
    data = b"aag 4 2 0 1 2\n2\n4\n8\n6 2 4\n8 2 4\n"
    g = parse_aiger(data)
    assert g.num_nodes() == 1


def test_roundtrip_ascii_and_binary(fixtures):
    for name, g in fixtures:
        for binary in (False, True):
            data = write_aiger(g, binary=binary)
            g2 = parse_aiger(data)
            assert equivalent(g, g2), (name, binary)


def test_write_buffer_body():
    from conftest import buffer_circuit

    data = write_aiger(buffer_circuit())
    assert data.startswith(b"aag 1 1 0 1 0\n")


def test_parse_deterministic():
    data = write_aiger(fixture_circuits()[5][1])
    g1, g2 = parse_aiger(data), parse_aiger(data)
    assert g1.fanin0 == g2.fanin0 and g1.fanin1 == g2.fanin1
    assert g1.outputs == g2.outputs


# ----------------------------------------------------------------------
# Verilog subset


def test_single_inverter():
    net = parse_verilog_subset(
        "module t(a, y); input a; output y; assign y = ~a; endmodule"
    )
    assert [g.op for g in net.gates] == ["NOT"]


def test_precedence_and_over_or():
    net = parse_verilog_subset(
        "module t(a, b, c, y); input a, b, c; output y;\n"
        "assign y = a & b | c; endmodule"
    )
    ops = [(g.op, g.fanins) for g in net.gates]
    assert ops[0] == ("AND", ("a", "b"))
    assert ops[1][0] == "OR" and ops[1][1][1] == "c"


def test_precedence_not_and_xor():
    net = parse_verilog_subset(
        "module t(a, b, c, y); input a, b, c; output y;\n"
        "assign y = ~a & b ^ c; endmodule"
    )
    g = net.to_aig()
    pats = [[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    got = [row[0] for row in g.simulate_patterns(pats)]
    assert got == [((1 - a) & b) ^ c for a, b, c in pats]


def test_adder2_matches_arithmetic():
    net = parse_verilog_subset(VERILOG_ADDER2)
    pats = []
    expect = []
    for av in range(4):
        for bv in range(4):
            pats.append([av & 1, (av >> 1) & 1, bv & 1, (bv >> 1) & 1])
            expect.append(adder_oracle_outputs(2, av, bv))
    assert net.simulate(pats) == expect
    assert net.to_aig().simulate_patterns(pats) == expect


def test_rejects_always_block():
    with pytest.raises(UnsupportedConstruct) as err:
        parse_verilog_subset(
            "module t(a, y); input a; output y;\n"
            "always @(posedge a) y = a; endmodule"
        )
    assert "line 2" in str(err.value)


def test_rejects_vectors():
    with pytest.raises(UnsupportedConstruct):
        parse_verilog_subset(
            "module t(a, y); input [3:0] a; output y; assign y = a; endmodule"
        )


def test_undeclared_net():
    with pytest.raises(ParseError):
        parse_verilog_subset(
            "module t(a, y); input a; output y; assign y = a & zz; endmodule"
        )


def test_out_of_order_assigns():
    net = parse_verilog_subset(
        "module t(a, b, y); input a, b; output y; wire u;\n"
        "assign y = u | b;\n"
        "assign u = a & b; endmodule"
    )
    net.validate()  # topological re-ordering must have succeeded
    g = net.to_aig()
    pats = [[a, b] for a in (0, 1) for b in (0, 1)]
    got = [r[0] for r in g.simulate_patterns(pats)]
    assert got == [(a & b) | b for a, b in pats]


def test_combinational_cycle_rejected():
    with pytest.raises(ParseError):
        parse_verilog_subset(
            "module t(a, y); input a; output y; wire u;\n"
            "assign u = y & a; assign y = u | a; endmodule"
        )


def test_constants():
    net = parse_verilog_subset(
        "module t(a, y, z); input a; output y, z;\n"
        "assign y = a & 1'b1; assign z = 1'b0; endmodule"
    )
    g = net.to_aig()
    rows = g.simulate_patterns([[0], [1]])
    assert rows == [[0, 0], [1, 0]]


# ----------------------------------------------------------------------
# BLIF


BLIF_XOR = """
.model xo
.inputs a b
.outputs y
.names a b y
10 1
01 1
.end
"""


def test_blif_xor():
    g = parse_blif(BLIF_XOR).to_aig()
    assert [r[0] for r in g.simulate_patterns([[0, 0], [0, 1], [1, 0], [1, 1]])] == [
        0, 1, 1, 0,
    ]


def test_blif_offset_cover():
    text = """
.model inv
.inputs a b
.outputs y
.names a b y
11 0
.end
"""
    g = parse_blif(text).to_aig()
    got = [r[0] for r in g.simulate_patterns([[0, 0], [0, 1], [1, 0], [1, 1]])]
    assert got == [1, 1, 1, 0]


def test_blif_constant_and_latch():
    g = parse_blif(".model c\n.inputs a\n.outputs y\n.names y\n1\n.end\n").to_aig()
    assert g.simulate_patterns([[0], [1]]) == [[1], [1]]
    with pytest.raises(UnsupportedSequential):
        parse_blif(".model l\n.inputs a\n.outputs y\n.latch a y re clk 0\n.end\n")


# ----------------------------------------------------------------------
# RawNetlist -> AIG: every supported op, exhaustively


@pytest.mark.parametrize(
    "op,arity",
    [("AND", 2), ("OR", 2), ("XOR", 2), ("NAND", 2), ("NOR", 2),
     ("NOT", 1), ("BUF", 1), ("CONST0", 0), ("CONST1", 0)],
)
def test_rawnetlist_ops_exhaustive(op, arity):
    names = ["a", "b"][:arity]
    net = RawNetlist(inputs=["a", "b"], outputs=["y"],
                     gates=[RawGate(op, tuple(names), "y")])
    g = net.to_aig()
    pats = [[a, b] for a in (0, 1) for b in (0, 1)]
    assert net.simulate(pats) == g.simulate_patterns(pats)


def test_rawnetlist_rejects_double_drive():
    net = RawNetlist(
        inputs=["a"], outputs=["y"],
        gates=[RawGate("BUF", ("a",), "y"), RawGate("NOT", ("a",), "y")],
    )
    with pytest.raises(ParseError):
        net.validate()


def test_rawnetlist_rejects_undriven_output():
    net = RawNetlist(inputs=["a"], outputs=["y"], gates=[])
    with pytest.raises(ParseError):
        net.validate()
