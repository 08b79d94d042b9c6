"""Pitch-space arithmetic for live scale transformation.

Everything in this module is pure and operates on an anchored integer pitch
space: a reference MIDI note is pitch 0 and each unit step is one division
of the octave.  Two families of note maps are provided, affine maps
(transposition, inversion, interval dilation) and interval-periodic maps
(arbitrary per-step images such as scale quantizers), together with the
range restriction that folds transformed notes back near their source and
the degree algebra used by the control surface.

Conventions:
  * ``mu`` is the interval coefficient of an affine map, ``tau`` its offset.
  * ``base`` is the number of divisions per octave (12 for ordinary MIDI).
  * All maps commute with octave shifts, so pitch classes transform
    independently of register before range restriction is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

__all__ = [
    "AffineTransform",
    "DEGREE_TRANSFORMS",
    "PeriodicMap",
    "PeriodicMapParseError",
    "RangeBounds",
    "ScaleTransform",
    "Temperament",
    "UnmappableNoteError",
    "affine_apply",
    "degree_transform",
    "format_periodic_map",
    "freq_to_pitch",
    "multiply_mode",
    "parse_periodic_map",
    "periodic_apply",
    "pitch_class_image_set",
    "restrict_interval",
    "scale_apply",
    "shift_transposition",
    "toggle_quality",
    "transform_midi_note",
]

# Guard against log2 landing a hair under an exact step boundary.
_FLOOR_EPSILON = 1e-9


class PeriodicMapParseError(ValueError):
    """A periodic-map document is malformed; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnmappableNoteError(ValueError):
    """A transformed note has no octave representative inside MIDI range."""


@dataclass(frozen=True)
class Temperament:
    """An equal division of the octave anchored at a MIDI note.

    ``anchor_midi`` is the MIDI note assigned pitch 0.  ``anchor_freq`` is
    that note's frequency in Hz and is only required for frequency
    conversion; purely symbolic work can leave it unset.
    """

    anchor_midi: int
    base: int = 12
    anchor_freq: float | None = None

    def __post_init__(self) -> None:
        if self.base < 1:
            raise ValueError(f"base must be a positive integer, got {self.base}")
        if self.anchor_freq is not None and not self.anchor_freq > 0:
            raise ValueError(f"anchor_freq must be positive, got {self.anchor_freq}")


#: Frequency of MIDI note 0 (approx. 8.1758 Hz) when A4 = 440 Hz.
MIDI_ANCHOR_HZ = 440.0 * 2.0 ** (-69 / 12)

#: MIDI-compatible numbering: note 0 at ~8.1758 Hz, twelve steps per octave.
MIDI_TEMPERAMENT = Temperament(anchor_midi=0, base=12, anchor_freq=MIDI_ANCHOR_HZ)


def freq_to_pitch(freq: float, temperament: Temperament) -> int:
    """Quantize a frequency to a pitch number in the given temperament.

    Computes floor(base * log2(freq / anchor_freq)); frequencies sitting
    exactly on a step (up to 1e-9 steps below it) land on that step.

    >>> freq_to_pitch(440.0, MIDI_TEMPERAMENT)
    69
    """
    if temperament.anchor_freq is None:
        raise ValueError("temperament has no anchor_freq; cannot convert frequencies")
    if not freq > 0:
        raise ValueError(f"frequency must be positive, got {freq}")
    steps = temperament.base * math.log2(freq / temperament.anchor_freq)
    return math.floor(steps + _FLOOR_EPSILON)


@dataclass(frozen=True)
class AffineTransform:
    """The note map n -> mu * n + tau.

    ``mu`` scales intervals around the anchor (1 identity, -1 inversion,
    2 whole-tone dilation, 0 collapse onto one note) and ``tau`` transposes.
    """

    mu: int
    tau: int


#: Identity affine map.
IDENTITY = AffineTransform(1, 0)


def affine_apply(a: AffineTransform, n: int) -> int:
    return a.mu * n + a.tau


@dataclass(frozen=True)
class PeriodicMap:
    """A note map given by per-step images over one period.

    The map sends n = q * interval + k (0 <= k < interval) to
    q * interval + image[k], i.e. it repeats every ``interval`` steps up to
    octave-like shifts.  Images may leave [0, interval): a quantizer that
    pushes the top step of one period into the next is legal.
    """

    interval: int
    image: tuple[int, ...]

    def __init__(self, interval: int, image: Sequence[int]):
        if interval < 1:
            raise ValueError(f"interval must be >= 1, got {interval}")
        image = tuple(image)
        if len(image) != interval:
            raise ValueError(
                f"image must list exactly {interval} values, got {len(image)}"
            )
        object.__setattr__(self, "interval", interval)
        object.__setattr__(self, "image", image)


def periodic_apply(m: PeriodicMap, n: int) -> int:
    q, k = divmod(n, m.interval)
    return q * m.interval + m.image[k]


@dataclass(frozen=True)
class RangeBounds:
    """How far below/above its source a transformed note may land."""

    delta_minus: int
    delta_plus: int

    def __post_init__(self) -> None:
        if self.delta_minus < 0 or self.delta_plus < 0:
            raise ValueError(
                f"bounds must be non-negative, got "
                f"({self.delta_minus}, {self.delta_plus})"
            )


@dataclass(frozen=True)
class ScaleTransform:
    """A note map (affine or periodic) plus the current key offset.

    ``key_offset`` is added after the map; it carries the running modulation
    applied by the conductor and is shared by every instrument.
    """

    kind: Union[AffineTransform, PeriodicMap]
    key_offset: int = 0

    @classmethod
    def identity(cls) -> "ScaleTransform":
        return cls(IDENTITY, 0)


def scale_apply(s: ScaleTransform, n: int) -> int:
    if isinstance(s.kind, AffineTransform):
        return affine_apply(s.kind, n) + s.key_offset
    return periodic_apply(s.kind, n) + s.key_offset


def restrict_interval(n_orig: int, n_raw: int, bounds: RangeBounds, base: int) -> int:
    """Fold a raw transformed pitch to the octave-congruent representative
    nearest to it inside [n_orig - delta_minus, n_orig + delta_plus].

    Requires the window to span at least one full period
    (delta_minus + delta_plus + 1 >= base) so a representative always
    exists.  When the window spans exactly one period the representative is
    unique.  A raw value already inside the window is returned unchanged.
    """
    if base < 1:
        raise ValueError(f"base must be >= 1, got {base}")
    if bounds.delta_minus + bounds.delta_plus + 1 < base:
        raise ValueError(
            f"restriction window ({bounds.delta_minus}+{bounds.delta_plus}+1) "
            f"is narrower than one period of {base}; no representative is "
            f"guaranteed to exist"
        )
    lo = n_orig - bounds.delta_minus
    hi = n_orig + bounds.delta_plus
    # Representatives are n_raw + k*base; pick k nearest 0 inside the window.
    k_lo = -((n_raw - lo) // base)
    k_hi = (hi - n_raw) // base
    if k_lo <= 0 <= k_hi:
        return n_raw
    k = k_hi if k_hi < 0 else k_lo
    return n_raw + k * base


def transform_midi_note(
    midi_note: int,
    transform: ScaleTransform,
    temperament: Temperament,
    bounds: RangeBounds,
) -> int:
    """Map one MIDI note through a transform, restricted and in [0, 127].

    The note is expressed relative to the anchor, mapped, shifted by the
    key offset, folded back near the source by ``restrict_interval``, and
    finally folded by whole periods into MIDI range.  Raises
    ``UnmappableNoteError`` if no congruent note fits in [0, 127], which
    can only happen for base > 128.
    """
    n = midi_note - temperament.anchor_midi
    raw = scale_apply(transform, n)
    out = temperament.anchor_midi + restrict_interval(n, raw, bounds, temperament.base)
    base = temperament.base
    if out < 0:
        out += -(out // base) * base  # smallest lift into non-negative range
    elif out > 127:
        out -= -((127 - out) // base) * base  # smallest drop to <= 127
    if not 0 <= out <= 127:
        raise UnmappableNoteError(
            f"note {midi_note} maps to {out} with no representative in 0..127"
        )
    return out


# Diatonic degree pads: the affine map sending the tonic triad to that
# degree's triad (mu -1 rows are the minor-flavored inversions).
DEGREE_TRANSFORMS: dict[str, AffineTransform] = {
    "I": AffineTransform(1, 0),
    "ii": AffineTransform(-1, -3),
    "iii": AffineTransform(-1, -1),
    "IV": AffineTransform(1, 5),
    "V": AffineTransform(1, 7),
    "vi": AffineTransform(-1, 4),
    "vii": AffineTransform(-1, 6),
}


def degree_transform(degree: str) -> AffineTransform:
    """Look up the affine map for a diatonic degree name ("I", "ii", ...)."""
    try:
        return DEGREE_TRANSFORMS[degree]
    except KeyError:
        raise ValueError(f"unknown degree {degree!r}") from None


def toggle_quality(a: AffineTransform) -> AffineTransform:
    """Swap major and minor flavor: negate mu, then offset tau by 5*mu'.

    Involutive: applying it twice returns the original map.
    """
    mu = -a.mu
    return AffineTransform(mu, a.tau + 5 * mu)


def shift_transposition(a: AffineTransform, k: int) -> AffineTransform:
    return AffineTransform(a.mu, a.tau + k)


def multiply_mode(a: AffineTransform, k: int) -> AffineTransform:
    """Dilate intervals by k (2, 3 or 4: whole-tone, minor-third, third)."""
    if k not in (2, 3, 4):
        raise ValueError(f"mode multiplier must be 2, 3 or 4, got {k}")
    return AffineTransform(k * a.mu, a.tau)


def pitch_class_image_set(a: AffineTransform, base: int) -> frozenset[int]:
    """Set of pitch classes an affine map can produce.

    Has exactly base / gcd(mu, base) elements (gcd(0, base) = base).
    """
    if base < 1:
        raise ValueError(f"base must be >= 1, got {base}")
    return frozenset((a.mu * n + a.tau) % base for n in range(base))


def parse_periodic_map(text: str) -> PeriodicMap:
    """Parse the periodic-map text format.

    The format is line oriented: ``#`` starts a comment, blank lines are
    skipped, the first payload line is ``interval <i>`` and exactly i lines
    ``<k> <image>`` with k = 0 .. i-1 in ascending order follow.  Images
    are decimal integers and may fall outside [0, i).  Errors carry the
    1-based line number.
    """
    interval: int | None = None
    images: list[int] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if interval is None:
            if len(fields) != 2 or fields[0] != "interval":
                raise PeriodicMapParseError(
                    line_no, f"expected 'interval <i>', got {line!r}"
                )
            interval = _parse_int(fields[1], line_no)
            if interval < 1:
                raise PeriodicMapParseError(
                    line_no, f"interval must be >= 1, got {interval}"
                )
            continue
        if len(images) >= interval:
            raise PeriodicMapParseError(
                line_no, f"more than {interval} image entries"
            )
        if len(fields) != 2:
            raise PeriodicMapParseError(
                line_no, f"expected '<step> <image>', got {line!r}"
            )
        step = _parse_int(fields[0], line_no)
        if step != len(images):
            raise PeriodicMapParseError(
                line_no, f"expected step {len(images)}, got {step}"
            )
        images.append(_parse_int(fields[1], line_no))
    if interval is None:
        raise PeriodicMapParseError(1, "missing 'interval <i>' header")
    if len(images) != interval:
        raise PeriodicMapParseError(
            len(text.splitlines()) + 1,
            f"expected {interval} image entries, got {len(images)}",
        )
    return PeriodicMap(interval, images)


def format_periodic_map(m: PeriodicMap) -> str:
    """Render a periodic map in the text format ``parse_periodic_map`` reads."""
    lines = [f"interval {m.interval}"]
    lines += [f"{k} {image}" for k, image in enumerate(m.image)]
    return "\n".join(lines) + "\n"


def _parse_int(token: str, line_no: int) -> int:
    try:
        return int(token, 10)
    except ValueError:
        raise PeriodicMapParseError(
            line_no, f"expected a decimal integer, got {token!r}"
        ) from None
