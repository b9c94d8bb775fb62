"""Paths to the bundled fixture data.

The ratings fixture is a synthetic export shaped to reproduce the reference
aggregate statistics the acceptance suite asserts (overall means/SDs, clip
winner tallies, and the per-class winner table). Regenerate with
scripts/generate_ratings_fixture.py.
"""

from __future__ import annotations

from pathlib import Path

_DATA_DIR = Path(__file__).parent / "data"


def ratings_fixture_path() -> Path:
    return _DATA_DIR / "ratings_fixture.csv"


def manifest_fixture_path() -> Path:
    return _DATA_DIR / "clips_manifest.csv"
