/**
 * Deterministic random streams built on splitmix64.
 *
 * Every random decision in the exporter draws from a stream derived from
 * (run seed, record id), so an export is a pure function of its arguments:
 * re-running the same command is byte-identical, and no stream depends on
 * iteration order or wall-clock state.
 */

const MASK64 = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;
const MIX_A = 0xbf58476d1ce4e5b9n;
const MIX_B = 0x94d049bb133111ebn;

function splitmix64(state: bigint): bigint {
  let z = (state + GOLDEN) & MASK64;
  z ^= z >> 30n;
  z = (z * MIX_A) & MASK64;
  z ^= z >> 27n;
  z = (z * MIX_B) & MASK64;
  z ^= z >> 31n;
  return z;
}

/** Mix a base seed with a sequence index into an independent 64-bit seed. */
export function mixSeed(seed: number | bigint, index: number | bigint): bigint {
  const base = (BigInt(seed) + (BigInt(index) + 1n) * GOLDEN) & MASK64;
  let z = base;
  z ^= z >> 30n;
  z = (z * MIX_A) & MASK64;
  z ^= z >> 27n;
  z = (z * MIX_B) & MASK64;
  z ^= z >> 31n;
  return z;
}

/** Counter-based splitmix64 generator: state advances by the golden ratio. */
export class Rng {
  private state: bigint;

  constructor(seed: number | bigint) {
    this.state = BigInt(seed) & MASK64;
  }

  /** Next raw 64-bit value. */
  nextU64(): bigint {
    this.state = (this.state + GOLDEN) & MASK64;
    return splitmix64(this.state);
  }

  /** Uniform float in [0, 1) with 53 bits of precision. */
  uniform(): number {
    return Number(this.nextU64() >> 11n) / 9007199254740992;
  }

  /** Uniform float in [lo, hi). */
  range(lo: number, hi: number): number {
    return lo + (hi - lo) * this.uniform();
  }

  /** Uniform integer in [0, n). */
  below(n: number): number {
    return Math.floor(this.uniform() * n);
  }

  /** Bernoulli draw. */
  chance(p: number): boolean {
    return this.uniform() < p;
  }
}
