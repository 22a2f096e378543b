/*
 * Canonical pitch/velocity grid shared with the evaluation toolkit:
 * an 88-key pitch range (MIDI 21-108) crossed with five velocity layers
 * (25, 50, 75, 100, 127), ordered pitch-major.  Every sample an extractor
 * emits must land on one of these 440 cells.
 */

export const PITCH_MIN = 21;
export const PITCH_MAX = 108;
export const VELOCITIES = [25, 50, 75, 100, 127] as const;
export const GRID_CELLS = (PITCH_MAX - PITCH_MIN + 1) * VELOCITIES.length;

export function gridIndex(pitch: number, velocity: number): number {
  if (!Number.isInteger(pitch) || pitch < PITCH_MIN || pitch > PITCH_MAX) {
    throw new Error(`pitch ${pitch} outside the 88-key range [${PITCH_MIN}, ${PITCH_MAX}]`);
  }
  const rank = (VELOCITIES as readonly number[]).indexOf(velocity);
  if (rank < 0) {
    throw new Error(`velocity ${velocity} not in ${VELOCITIES.join(', ')}`);
  }
  return (pitch - PITCH_MIN) * VELOCITIES.length + rank;
}
