// ---------------------------------------------------------------------------
// selfprop-lab — Seeded pseudo-random numbers
//
// Everything random in this package (parameter init, negative sampling,
// coordinate sampling in tests) flows through one mulberry32 stream per
// run, so a fixed seed reproduces a run bit for bit.
// ---------------------------------------------------------------------------

import type { PRNG } from './types.js';

// ---------------------------------------------------------------------------
// createRng — mulberry32 generator
// ---------------------------------------------------------------------------

/**
 * Create a mulberry32 generator: a 32-bit state PRNG with good statistical
 * behavior at this package's scale and a one-line state transition.
 *
 * @param seed - Any integer; only its low 32 bits matter.
 * @returns A function producing uniforms in [0, 1).
 */
export function createRng(seed: number): PRNG {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

// ---------------------------------------------------------------------------
// nextGaussian — standard normal draw
// ---------------------------------------------------------------------------

/**
 * One standard-normal draw via the Box-Muller transform.
 *
 * Always consumes exactly two uniforms, so the stream position after a
 * sequence of draws is independent of the values drawn.
 *
 * @param rng - Uniform generator.
 * @returns A sample from N(0, 1).
 */
export function nextGaussian(rng: PRNG): number {
  // Shift the first uniform away from zero so the log is finite.
  const u = 1 - rng();
  const v = rng();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
}

// ---------------------------------------------------------------------------
// randBelow — uniform integer in [0, n)
// ---------------------------------------------------------------------------

/**
 * Uniform integer in [0, n).
 *
 * @param rng - Uniform generator.
 * @param n   - Exclusive upper bound; must be a positive integer.
 * @returns An integer in [0, n).
 * @throws Error if n is not a positive integer.
 */
export function randBelow(rng: PRNG, n: number): number {
  if (!Number.isInteger(n) || n <= 0) {
    throw new Error(`randBelow: upper bound must be a positive integer, got ${n}`);
  }
  return Math.floor(rng() * n);
}
