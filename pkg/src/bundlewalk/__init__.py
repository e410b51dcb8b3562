"""Random contours on bundles of intersecting complex planes.

Core pieces: an embedded plane bundle (geometry), contours and arc lengths
(contour), transport between contours on intersecting planes (transport),
the two-step-randomness walk (walk), interval-based removal dynamics
(removal), hole/island detection (topology), and a deterministic simulation
CLI (cli) with re-verifiable artifacts (verify).
"""

from .geometry import Bundle, BundlePoint, Disc, IntersectionLine, Plane
from .contour import Contour, ParametricArc, RegionPartition
from .walk import EventLog, NestedProfile, RadiusDistribution, StepEvent, WalkerConfig, WalkerState
from .removal import RemovalConfig, RemovalLedger
from .config import RunConfig

__version__ = "0.1.0"

__all__ = [
    "Bundle",
    "BundlePoint",
    "Contour",
    "Disc",
    "EventLog",
    "IntersectionLine",
    "NestedProfile",
    "ParametricArc",
    "Plane",
    "RadiusDistribution",
    "RegionPartition",
    "RemovalConfig",
    "RemovalLedger",
    "RunConfig",
    "StepEvent",
    "WalkerConfig",
    "WalkerState",
    "__version__",
]
