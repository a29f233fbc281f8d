"""Shared fixture circuits and oracles.

Fixture set: buffers, ripple adders (with an arithmetic oracle),
majority/mux trees, a parity tree, and seeded random graphs, both
shallow and chain-heavy.  Everything is deterministic.
"""

import random

import pytest

from rcimflow.aig import Aig, lit, lit_not

VERILOG_ADDER2 = """
module add2(a0, a1, b0, b1, s0, s1, c);
  input a0, a1, b0, b1;
  output s0, s1, c;
  wire c0;
  assign s0 = a0 ^ b0;
  assign c0 = a0 & b0;
  assign s1 = a1 ^ b1 ^ c0;
  assign c = (a1 & b1) | (c0 & (a1 ^ b1));
endmodule
"""


def ripple_adder(bits: int) -> Aig:
    """n-bit ripple-carry adder: inputs a0..a(n-1), b0..b(n-1), outputs sum+carry."""
    g = Aig()
    a = [g.add_input(f"a{i}") for i in range(bits)]
    b = [g.add_input(f"b{i}") for i in range(bits)]
    carry = 0  # const0 literal
    for i in range(bits):
        ai, bi = lit(a[i]), lit(b[i])
        s = g.xor_lit(g.xor_lit(ai, bi), carry)
        carry = g.or_lit(
            g.strash_and(ai, bi), g.strash_and(carry, g.xor_lit(ai, bi))
        )
        g.add_output(s, f"s{i}")
    g.add_output(carry, "cout")
    return g


def adder_oracle_outputs(bits: int, av: int, bv: int) -> list:
    total = av + bv
    return [(total >> i) & 1 for i in range(bits + 1)]


def maj3(g, x, y, z):
    return g.or_lit(g.strash_and(x, y), g.or_lit(g.strash_and(x, z), g.strash_and(y, z)))


def maj_tree() -> Aig:
    """MAJ3 of three MAJ3s over 9 inputs."""
    g = Aig(9)
    ins = [lit(i) for i in range(1, 10)]
    level1 = [maj3(g, *ins[k : k + 3]) for k in (0, 3, 6)]
    g.add_output(maj3(g, *level1), "maj")
    return g


def mux_tree() -> Aig:
    """8:1 mux: 8 data + 3 select inputs."""
    g = Aig(11)
    data = [lit(i) for i in range(1, 9)]
    sel = [lit(i) for i in range(9, 12)]
    layer = data
    for s in sel:
        layer = [g.mux_lit(s, layer[i + 1], layer[i]) for i in range(0, len(layer), 2)]
    g.add_output(layer[0], "y")
    return g


def parity_tree(bits: int) -> Aig:
    g = Aig(bits)
    layer = [lit(i) for i in range(1, bits + 1)]
    while len(layer) > 1:
        nxt = [g.xor_lit(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    g.add_output(layer[0], "p")
    return g


def random_aig(n_inputs, n_nodes, seed, n_outputs=6, chainy=0.0) -> Aig:
    rng = random.Random(seed)
    g = Aig(n_inputs)
    lits = [lit(i) for i in range(1, n_inputs + 1)]
    for _ in range(n_nodes):
        pool = lits[-15:] if chainy and len(lits) > 15 and rng.random() < chainy else lits
        v = g.strash_and(
            rng.choice(pool) ^ rng.getrandbits(1),
            rng.choice(lits) ^ rng.getrandbits(1),
        )
        lits.append(v)
    rng.shuffle(lits)
    for o in lits[:n_outputs]:
        g.add_output(o)
    return g


def layered_aig(n_inputs, n_nodes, seed, layer_width=220, n_outputs=32) -> Aig:
    """Wide, layered random circuit; used for the large-scale fixtures."""
    rng = random.Random(seed)
    g = Aig(n_inputs)
    prev = [lit(i) for i in range(1, n_inputs + 1)]
    made = 0
    while made < n_nodes:
        width = min(layer_width, n_nodes - made)
        layer = []
        for _ in range(width):
            a = rng.choice(prev) ^ rng.getrandbits(1)
            b = rng.choice(prev) ^ rng.getrandbits(1)
            v = g.strash_and(a, b)
            layer.append(v)
        made += width
        prev = layer + prev[: max(0, 40 - width)]
    outs = sorted(set(prev[:n_outputs]))
    for o in outs:
        g.add_output(o)
    return g


def buffer_circuit() -> Aig:
    g = Aig(1)
    g.add_output(lit(1), "y")
    return g


def single_and() -> Aig:
    g = Aig(2)
    g.add_output(g.strash_and(lit(1), lit(2)), "y")
    return g


def inverter_circuit() -> Aig:
    g = Aig(1)
    g.add_output(lit_not(lit(1)), "y")
    return g


def fixture_circuits() -> list:
    """The benchmark set used by the acceptance criteria."""
    from rcimflow.frontend import parse_verilog_subset

    return [
        ("buffer", buffer_circuit()),
        ("inverter", inverter_circuit()),
        ("single_and", single_and()),
        ("adder2", parse_verilog_subset(VERILOG_ADDER2).to_aig()),
        ("adder4", ripple_adder(4)),
        ("adder8", ripple_adder(8)),
        ("maj_tree", maj_tree()),
        ("mux_tree", mux_tree()),
        ("parity16", parity_tree(16)),
        ("random200_a", random_aig(13, 200, seed=11)),
        ("random200_b", random_aig(13, 200, seed=23, chainy=0.7)),
    ]


@pytest.fixture(scope="session")
def fixtures():
    return fixture_circuits()


@pytest.fixture(scope="session")
def topo_library():
    from rcimflow.topology import default_library

    return default_library()
