"""rcimflow: map combinational logic onto resonant compute-in-memory SRAM.

Pipeline stages: parse (frontend) -> optimize (transforms) -> map to
NAND2/NOR2/NOT gates (techmap) -> schedule onto an SRAM topology (mapper)
-> verify cycle-accurately (simulator) -> estimate power/latency/energy
(costmodel) -> explore the recipe x topology space (explorer).
"""

__version__ = "0.1.0"
