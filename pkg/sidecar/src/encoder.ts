/** Multimodal embedding model: hash-projected bag of features.
 *
 * Text tokens and frame byte-statistics tokens share one projection: each
 * token seeds a PRNG (sha256 -> mulberry32) that draws a fixed
 * pseudo-random direction, and an input embeds as the L2-normalized sum of
 * its token directions.  Both modalities therefore land in the same
 * d_v-dimensional space and the dim never varies for a given model id.
 */
import { createHash } from "node:crypto";

import { Frame, frameBytes } from "./wire.js";

export const ENCODER_MODEL_PATTERN = /^hash-projection-(\d+)$/;
const MAX_DIM = 4096;

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function textTokens(text: string): string[] {
  return text.toLowerCase().match(/[a-z0-9]+/g) ?? [];
}

function frameTokens(frame: Frame): string[] {
  const data = frameBytes(frame);
  const bins = new Array<number>(8).fill(0);
  let total = 0;
  for (const b of data) {
    bins[b >> 5] += 1;
    total += b;
  }
  const peak = bins.indexOf(Math.max(...bins));
  const luma = Math.min(7, Math.floor(total / data.length / 32));
  return [
    `media:${frame.media_type}`,
    `luma:${luma}`,
    `size:${Math.floor(Math.log2(data.length))}`,
    `peak:${peak}`,
  ];
}

export class HashProjectionEncoder {
  constructor(
    readonly modelId: string,
    readonly dim: number,
  ) {}

  private accumulate(tokens: string[]): number[] {
    const out = new Array<number>(this.dim).fill(0);
    for (const token of tokens) {
      const digest = createHash("sha256").update(`proj\0${token}`).digest();
      const draw = mulberry32(digest.readUInt32LE(0));
      for (let j = 0; j < this.dim; j++) {
        out[j] += 2 * draw() - 1;
      }
    }
    const norm = Math.sqrt(out.reduce((a, x) => a + x * x, 0));
    if (norm === 0) {
      out[0] = 1; // empty input: a fixed basis direction beats a zero vector
      return out;
    }
    return out.map((x) => x / norm);
  }

  embedText(text: string): number[] {
    return this.accumulate(textTokens(text));
  }

  embedFrames(frames: Frame[]): number[] {
    return this.accumulate(frames.flatMap(frameTokens));
  }
}

export function createEncoder(modelId: string): HashProjectionEncoder {
  const match = ENCODER_MODEL_PATTERN.exec(modelId);
  if (!match) {
    throw new Error(
      `unknown embedding model ${JSON.stringify(modelId)} (expected hash-projection-<dim>)`,
    );
  }
  const dim = Number(match[1]);
  if (dim < 1 || dim > MAX_DIM) {
    throw new Error(`embedding dim must be in 1..${MAX_DIM}, got ${dim}`);
  }
  return new HashProjectionEncoder(modelId, dim);
}
