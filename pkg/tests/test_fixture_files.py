"""On-disk circuit fixtures load through every format path."""

from pathlib import Path

import pytest

from conftest import adder_oracle_outputs
from rcimflow.frontend import load_circuit

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@pytest.mark.parametrize("name", ["adder2.aag", "adder2.aig", "adder2.v", "adder2.blif"])
def test_adder_fixture_matches_arithmetic(name):
    g = load_circuit(FIXTURE_DIR / name)
    assert g.num_inputs == 4 and len(g.outputs) == 3
    pats = []
    expect = []
    for av in range(4):
        for bv in range(4):
            pats.append([av & 1, (av >> 1) & 1, bv & 1, (bv >> 1) & 1])
            expect.append(adder_oracle_outputs(2, av, bv))
    assert g.simulate_patterns(pats) == expect


def test_formats_are_mutually_equivalent():
    from rcimflow.aig import equivalent

    graphs = [
        load_circuit(FIXTURE_DIR / name)
        for name in ("adder2.aag", "adder2.aig", "adder2.v", "adder2.blif")
    ]
    for other in graphs[1:]:
        assert equivalent(graphs[0], other)
