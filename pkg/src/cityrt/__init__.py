"""cityrt: city-scale digital-twin mesh ingest, RF ray tracing, coverage maps."""

__version__ = "0.1.0"
