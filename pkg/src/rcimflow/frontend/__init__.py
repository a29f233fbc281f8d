"""Circuit readers and writers: AIGER, a structural Verilog subset, BLIF."""

from __future__ import annotations

from pathlib import Path

from ..aig import Aig
from ..errors import ParseError
from .aiger import parse_aiger, write_aiger
from .blif import parse_blif
from .netlist import RawGate, RawNetlist
from .verilog import parse_verilog_subset

__all__ = [
    "Aig",
    "RawGate",
    "RawNetlist",
    "load_circuit",
    "parse_aiger",
    "parse_blif",
    "parse_verilog_subset",
    "write_aiger",
]


def load_circuit(path) -> Aig:
    """Read a circuit by file extension (.aag/.aig/.v/.blif) into an AIG."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".aag", ".aig"):
        return parse_aiger(path.read_bytes())
    if suffix == ".v":
        return parse_verilog_subset(path.read_text()).to_aig()
    if suffix == ".blif":
        return parse_blif(path.read_text()).to_aig()
    raise ParseError(f"unknown circuit format {suffix!r}", path=str(path))
