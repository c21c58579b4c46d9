"""Multi-timescale power system operations simulator with water and CO2 accounting."""

__version__ = "0.1.0"
