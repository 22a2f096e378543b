"""Training-time conditioning-example pairing, simulated deterministically.

For each target sample of an instrument, a condition sample from the same
instrument is chosen by one of three schemes: baseline (condition = target),
random (uniform pitch/velocity draw resolved to the nearest available
sample), or fixed (one family-dependent pitch at velocity 100 per
instrument).  Family and source tags are then independently dropped with a
configurable probability.

Pair generation is reproducible: each instrument gets its own derived RNG
stream, so output is identical however the work is scheduled, and a fixed
seed yields byte-identical pair files.
"""

from __future__ import annotations

import dataclasses
import json
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import ValidationError
from .grid import N_PITCHES, PITCH_MIN, VELOCITIES, SampleKey, key_at
from .rng import SplitMix64, derive_stream
from .store import DatasetIndex, InstrumentIndex

SCHEMES = ("baseline", "random", "fixed")
DEFAULT_DROP = 0.3

FAMILIES = (
    "bass", "brass", "flute", "guitar", "keyboard", "mallet",
    "organ", "reed", "string", "synth_lead", "vocal",
)

# note names resolved with the middle-C = C4 = 60 convention
_FIXED_PITCHES = {
    "bass": 36,        # C2
    "brass": 48,       # C3
    "flute": 72,       # C5
    "guitar": 60,      # C4
    "keyboard": 60,    # C4
    "mallet": 72,      # C5
    "organ": 60,       # C4
    "reed": 60,        # C4
    "string": 48,      # C3
    "synth_lead": 48,  # C3
    "vocal": 60,       # C4
}


@dataclass(frozen=True)
class ConditioningExample:
    target: SampleKey
    condition: SampleKey
    family_kept: bool = True
    source_kept: bool = True

    def __post_init__(self):
        if self.target.instrument_id != self.condition.instrument_id:
            raise ValidationError(
                "condition must come from the target's instrument "
                f"({self.target.instrument_id!r} vs {self.condition.instrument_id!r})"
            )


@dataclass(frozen=True)
class FixedPitchTable:
    """Per-family condition pitch plus the common condition velocity."""

    pitches: dict
    velocity: int = 100

    def __post_init__(self):
        missing = [f for f in FAMILIES if f not in self.pitches]
        if missing:
            raise ValidationError(f"fixed-pitch table missing families: {', '.join(missing)}")
        if self.velocity not in VELOCITIES:
            raise ValidationError(f"fixed velocity {self.velocity} not in {VELOCITIES}")

    def pitch_for(self, family: str) -> int:
        return self.pitches[normalize_family(family)]


def default_fixed_table() -> FixedPitchTable:
    return FixedPitchTable(dict(_FIXED_PITCHES))


def normalize_family(name, aliases: dict | None = None) -> str:
    """Map a family label to canonical snake_case (e.g. "Synth lead" ->
    "synth_lead"); extra aliases extend the default normalization."""
    if not isinstance(name, str) or not name:
        raise ValidationError(f"family must be a non-empty string, got {name!r}")
    if aliases and name in aliases:
        name = aliases[name]
    canon = name.strip().lower().replace(" ", "_").replace("-", "_")
    if canon not in FAMILIES:
        raise ValidationError(f"unknown family {name!r}")
    return canon


@lru_cache(maxsize=1024)
def _pitch_map(cells: tuple) -> tuple[list, dict]:
    """Sorted available pitches and pitch -> sorted velocities for a cell set."""
    by_pitch: dict = {}
    for c in cells:
        p, v = key_at(c)
        by_pitch.setdefault(p, []).append(v)
    pitches = sorted(by_pitch)
    return pitches, {p: sorted(vs) for p, vs in by_pitch.items()}


def nearest_key(instrument: InstrumentIndex, pitch: int, velocity: int) -> SampleKey:
    """Closest available sample: nearest pitch first, then nearest velocity
    at that pitch.  Distance ties go to the lower pitch / lower velocity."""
    if not instrument.cells:
        raise ValidationError(f"instrument {instrument.info.instrument_id!r} has no samples")
    pitches, by_pitch = _pitch_map(instrument.cells)
    pos = bisect_right(pitches, pitch)
    # candidates straddle the requested pitch; the lower one wins ties
    if pos == 0:
        best_pitch = pitches[0]
    elif pos == len(pitches):
        best_pitch = pitches[-1]
    else:
        lo, hi = pitches[pos - 1], pitches[pos]
        best_pitch = lo if pitch - lo <= hi - pitch else hi
    best_velocity = min(by_pitch[best_pitch], key=lambda v: (abs(v - velocity), v))
    return SampleKey(instrument.info.instrument_id, best_pitch, best_velocity)


def _instrument_for(target: SampleKey, index: DatasetIndex) -> InstrumentIndex:
    instrument = index.instrument(target.instrument_id)
    if target.cell not in instrument.cells:
        raise ValidationError(
            f"target ({target.instrument_id!r}, {target.pitch}, {target.velocity}) "
            "is not in the dataset index"
        )
    return instrument


def pair_baseline(target: SampleKey, index: DatasetIndex) -> ConditioningExample:
    """Condition equals target."""
    _instrument_for(target, index)
    return ConditioningExample(target, target)


def pair_random(target: SampleKey, index: DatasetIndex, rng: SplitMix64) -> ConditioningExample:
    """Uniform (pitch, velocity) draw over the full grid, resolved to the
    nearest available sample of the target's instrument."""
    instrument = _instrument_for(target, index)
    pitch = PITCH_MIN + rng.randbelow(N_PITCHES)
    velocity = VELOCITIES[rng.randbelow(len(VELOCITIES))]
    return ConditioningExample(target, nearest_key(instrument, pitch, velocity))


def pair_fixed(
    target: SampleKey,
    index: DatasetIndex,
    table: FixedPitchTable | None = None,
    family: str | None = None,
) -> ConditioningExample:
    """Family-dependent fixed condition; same condition for every target of
    an instrument."""
    instrument = _instrument_for(target, index)
    table = table or default_fixed_table()
    family = family if family is not None else instrument.info.family
    if family is None:
        raise ValidationError(
            f"instrument {target.instrument_id!r} has no family metadata; "
            "the fixed scheme needs one"
        )
    pitch = table.pitch_for(family)
    return ConditioningExample(target, nearest_key(instrument, pitch, table.velocity))


def apply_metadata_dropout(
    example: ConditioningExample, rng: SplitMix64, p_drop: float
) -> ConditioningExample:
    """Independently drop the family and source tags (family drawn first)."""
    if not 0.0 <= p_drop <= 1.0:
        raise ValidationError(f"drop probability {p_drop} outside [0, 1]")
    family_kept = not rng.next_float() < p_drop
    source_kept = not rng.next_float() < p_drop
    return dataclasses.replace(example, family_kept=family_kept, source_kept=source_kept)


def emit_pairs(
    index: DatasetIndex,
    scheme: str,
    seed: int,
    p_drop: float = DEFAULT_DROP,
    table: FixedPitchTable | None = None,
) -> Iterator[ConditioningExample]:
    """One ConditioningExample per target sample.

    Targets stream in dataset order (instruments as listed, cells
    ascending).  Instrument i draws from its own stream derived from (seed,
    i); per target, the scheme draws come first, then the two dropout draws.
    """
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    if not 0.0 <= p_drop <= 1.0:
        raise ValidationError(f"drop probability {p_drop} outside [0, 1]")
    for i, instrument in enumerate(index.instruments):
        rng = SplitMix64(derive_stream(seed, i))
        iid = instrument.info.instrument_id
        for cell in instrument.cells:
            target = SampleKey(iid, *key_at(cell))
            if scheme == "baseline":
                example = pair_baseline(target, index)
            elif scheme == "random":
                example = pair_random(target, index, rng)
            else:
                example = pair_fixed(target, index, table)
            yield apply_metadata_dropout(example, rng, p_drop)


def write_pairs(
    examples: Iterable[ConditioningExample], fh, scheme: str, seed: int
) -> int:
    """Serialize examples one JSON record per line; returns the count."""
    count = 0
    for ex in examples:
        record = {
            "target": {
                "instrument": ex.target.instrument_id,
                "pitch": ex.target.pitch,
                "velocity": ex.target.velocity,
            },
            "condition": {
                "instrument": ex.condition.instrument_id,
                "pitch": ex.condition.pitch,
                "velocity": ex.condition.velocity,
            },
            "family_kept": ex.family_kept,
            "source_kept": ex.source_kept,
            "scheme": scheme,
            "seed": seed,
        }
        fh.write(json.dumps(record, separators=(", ", ": ")) + "\n")
        count += 1
    return count
