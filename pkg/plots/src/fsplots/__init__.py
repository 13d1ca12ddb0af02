"""SVG figure rendering for benchmark CSVs and detector-slice JSON files."""

__version__ = "0.1.0"
