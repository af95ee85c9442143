"""Building thermal telemetry simulation with X3D thermal map output.

Three simulated tiers (sensor endpoints, room concentrators, a building
supervisor) feed a frame store; scenes are generated per-frame as X3D
documents with view-dependent level of detail, and reconstructions are
validated against the synthetic ground truth via cross-section rasters.
"""

__version__ = "0.1.0"
