"""Canonical pitch/velocity grid for sample-based instruments.

An instrument is addressed over an 88-key pitch range (MIDI 21-108) and five
velocity layers (MIDI 25, 50, 75, 100, 127), giving 440 grid cells.  Cells are
ordered primarily by pitch and secondarily by velocity; that ordering is used
everywhere (affinity matrices, mean-embedding grids, serialized manifests).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError

PITCH_MIN = 21
PITCH_MAX = 108
N_PITCHES = PITCH_MAX - PITCH_MIN + 1

VELOCITIES = (25, 50, 75, 100, 127)
N_VELOCITIES = len(VELOCITIES)

GRID_CELLS = N_PITCHES * N_VELOCITIES

_VELOCITY_RANK = {v: r for r, v in enumerate(VELOCITIES)}


def velocity_rank(velocity: int) -> int:
    try:
        return _VELOCITY_RANK[velocity]
    except KeyError:
        raise ValidationError(
            f"velocity {velocity} not in {VELOCITIES}"
        ) from None


def grid_index(pitch: int, velocity: int) -> int:
    """Map (pitch, velocity) to its cell index in [0, 439], pitch-major."""
    if not PITCH_MIN <= pitch <= PITCH_MAX:
        raise ValidationError(
            f"pitch {pitch} outside the 88-key range [{PITCH_MIN}, {PITCH_MAX}]"
        )
    return (pitch - PITCH_MIN) * N_VELOCITIES + velocity_rank(velocity)


def key_at(index: int) -> tuple[int, int]:
    """Inverse of grid_index: cell index -> (pitch, velocity)."""
    if not 0 <= index < GRID_CELLS:
        raise ValidationError(f"grid index {index} outside [0, {GRID_CELLS - 1}]")
    pitch, rank = divmod(index, N_VELOCITIES)
    return PITCH_MIN + pitch, VELOCITIES[rank]


@dataclass(frozen=True, order=True)
class SampleKey:
    """Address of one single-shot sample: (instrument id, pitch, velocity)."""

    instrument_id: str
    pitch: int
    velocity: int

    def __post_init__(self):
        grid_index(self.pitch, self.velocity)

    @property
    def cell(self) -> int:
        return grid_index(self.pitch, self.velocity)
