"""Multi-view quality and alignment metrics for textured 3D meshes."""

__version__ = "0.1.0"
