"""Model-serving sidecar for the mesh evaluation wire protocol."""

__version__ = "0.1.0"
