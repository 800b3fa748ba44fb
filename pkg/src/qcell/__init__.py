"""qcell: programmable quantum-cell compiler and simulator."""

__version__ = "0.1.0"
