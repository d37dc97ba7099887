from .counting import (
    VERIFY_MODES,
    exact_counting,
    greedy_count,
    greedy_counting,
    resolve_verify_mode,
)
from .detector import (
    Detector,
    DodParams,
    DodResult,
    NestedLoopDetector,
    VpTreeDetector,
)
from .graph import GraphDetector, detect, detect_partitioned

__all__ = [
    "Detector",
    "DodParams",
    "DodResult",
    "GraphDetector",
    "NestedLoopDetector",
    "VERIFY_MODES",
    "VpTreeDetector",
    "detect",
    "detect_partitioned",
    "exact_counting",
    "greedy_count",
    "greedy_counting",
    "resolve_verify_mode",
]
