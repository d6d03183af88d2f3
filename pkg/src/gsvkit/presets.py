"""Bundled example sources.

The corpus used throughout the docs and tests: the lone fair coin, the
classic two-coin SV family, the hidden-SV pair, and the two four-face
examples separating the structural conditions (E1 fails hereditarily, E2
is hereditary but has no positive-variance witness).

E1's original prose calls it "four-diced, three-faced" while displaying
three four-entry dice; the displayed vectors are what is encoded here
(3 dice over 4 faces).
"""

from __future__ import annotations

from .model import SourceSpec, rat

__all__ = ["PRESETS", "e1", "e2", "fair_coin", "hidden_sv", "load_source", "sv_pair"]


def fair_coin() -> SourceSpec:
    return SourceSpec(("H", "T"), [("1/2", "1/2")])


def sv_pair(delta) -> SourceSpec:
    """The two-coin SV source: one coin biased each way by delta."""
    d = rat(delta)
    if not 0 <= d <= rat("1/2"):
        raise ValueError("delta must lie in [0, 1/2]")
    half = rat("1/2")
    return SourceSpec(("H", "T"), [(half + d, half - d), (half - d, half + d)])


def hidden_sv() -> SourceSpec:
    """Two dice over three faces; the kernel witness never varies under
    the point-mass die, so the source is stuck."""
    return SourceSpec(("a", "b", "c"), [("0", "0", "1"), ("1/2", "1/2", "0")])


def e1() -> SourceSpec:
    """Nonzero kernel, but dropping the first die strands faces c, d."""
    return SourceSpec(
        ("a", "b", "c", "d"),
        [
            ("1/2", "1/2", "0", "0"),
            ("0", "0", "1/3", "2/3"),
            ("0", "0", "2/3", "1/3"),
        ],
    )


def e2() -> SourceSpec:
    """Hereditary nonzero kernel without a positive-variance witness."""
    return SourceSpec(
        ("a", "b", "c", "d"),
        [
            ("1/2", "1/2", "0", "0"),
            ("1/4", "1/12", "1/3", "1/3"),
            ("1/12", "1/4", "1/3", "1/3"),
        ],
    )


PRESETS = {
    "fair-coin": fair_coin,
    "hidden-sv": hidden_sv,
    "e1": e1,
    "e2": e2,
}


def load_source(name_or_path: str) -> SourceSpec:
    """Resolve a preset name ("e1", "sv:1/4", ...) or a JSON file path."""
    key = name_or_path.lower()
    if key in PRESETS:
        return PRESETS[key]()
    if key.startswith("sv:"):
        return sv_pair(key[3:])
    with open(name_or_path, encoding="utf-8") as fh:
        return SourceSpec.from_json(fh.read())
