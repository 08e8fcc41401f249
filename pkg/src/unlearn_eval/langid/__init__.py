"""Deterministic language identification over short fragments."""

from ..scripts import script_of
from .detector import (
    Detector,
    DetectorConfig,
    FrequencyProfile,
    detect,
    latin_scores,
    load_bundled_profile,
)

__all__ = [
    "Detector",
    "DetectorConfig",
    "FrequencyProfile",
    "detect",
    "latin_scores",
    "load_bundled_profile",
    "script_of",
]
