"""Live MIDI pitch transformation.

A conductor surface broadcasts global scale transforms (affine or periodic
note maps plus a running key offset) to any number of instrument-side
stream transformers, which rewrite note events on the fly while keeping
every emitted note properly terminated.  An offline renderer applies the
same engine to standard MIDI files.
"""

from .pitch import (
    AffineTransform,
    PeriodicMap,
    RangeBounds,
    ScaleTransform,
    Temperament,
    degree_transform,
    freq_to_pitch,
    multiply_mode,
    parse_periodic_map,
    pitch_class_image_set,
    restrict_interval,
    shift_transposition,
    toggle_quality,
    transform_midi_note,
)

__all__ = [
    "AffineTransform",
    "PeriodicMap",
    "RangeBounds",
    "ScaleTransform",
    "Temperament",
    "degree_transform",
    "freq_to_pitch",
    "multiply_mode",
    "parse_periodic_map",
    "pitch_class_image_set",
    "restrict_interval",
    "shift_transposition",
    "toggle_quality",
    "transform_midi_note",
]

__version__ = "0.1.0"
