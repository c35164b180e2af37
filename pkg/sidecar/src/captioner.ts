/** Caption model: describes frames from their byte statistics.
 *
 * Not a vision model — it reports what can be read deterministically off
 * the payload (frame count, media types, time span, brightness proxy) so
 * the engine always receives a non-empty, stable caption.
 */
import { ModelInputError } from "./errors.js";
import { Frame, frameBytes } from "./wire.js";

export const CAPTION_MODEL_IDS = ["byte-stats-v1"] as const;

function meanByte(data: Buffer): number {
  let total = 0;
  for (const b of data) total += b;
  return total / data.length;
}

function toneWord(mean: number): string {
  if (mean < 64) return "dark";
  if (mean < 128) return "dim";
  if (mean < 192) return "mid-tone";
  return "bright";
}

export class ByteStatsCaptioner {
  constructor(readonly modelId: string) {}

  caption(frames: Frame[], transcript: string, instruction: string): string {
    if (frames.length === 0) {
      throw new ModelInputError("at least one frame is required");
    }
    const means = frames.map((f) => meanByte(frameBytes(f)));
    const overall = means.reduce((a, b) => a + b, 0) / means.length;
    const kinds = [...new Set(frames.map((f) => f.media_type))].sort().join("/");
    const stamps = frames.map((f) => f.timestamp_s);
    const first = Math.min(...stamps).toFixed(2);
    const last = Math.max(...stamps).toFixed(2);
    const plural = frames.length === 1 ? "" : "s";
    let caption =
      `${frames.length} ${kinds} frame${plural} spanning ${first}s-${last}s; ` +
      `mean byte value ${overall.toFixed(1)} (${toneWord(overall)})`;
    const words = transcript.split(/\s+/).filter(Boolean).length;
    if (words > 0) {
      caption += `; audio context: ${words} word${words === 1 ? "" : "s"}`;
    }
    const focus = instruction.match(/related to:\s*([^.]+)/i);
    if (focus) {
      caption += `; focus: ${focus[1].trim()}`;
    }
    return caption;
  }
}

export function createCaptioner(modelId: string): ByteStatsCaptioner {
  if (!CAPTION_MODEL_IDS.includes(modelId as (typeof CAPTION_MODEL_IDS)[number])) {
    throw new Error(
      `unknown caption model ${JSON.stringify(modelId)} (available: ${CAPTION_MODEL_IDS.join(", ")})`,
    );
  }
  return new ByteStatsCaptioner(modelId);
}
