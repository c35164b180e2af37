/** Speech recognition model: tone-alphabet decoding over raw PCM or WAV. */
import { ModelInputError } from "./errors.js";
import { decodeTones, MIN_SAMPLE_RATE_HZ } from "./tones.js";
import { decodeWav, isRiffWave } from "./wav.js";

export const TRANSCRIBE_MODEL_IDS = ["tone-dsp-v1"] as const;

export class ToneTranscriber {
  constructor(readonly modelId: string) {}

  /** Accepts raw 16-bit mono PCM at the stated rate, or a whole RIFF/WAVE
   * container (whose embedded rate then wins). */
  transcribe(audio: Buffer, sampleRateHz: number): string {
    let samples: Int16Array;
    let rateHz = sampleRateHz;
    if (isRiffWave(audio)) {
      ({ samples, rateHz } = decodeWav(audio));
    } else {
      if (audio.length % 2 !== 0) {
        throw new ModelInputError("raw audio must be 16-bit PCM (even byte count)");
      }
      samples = new Int16Array(audio.length / 2);
      for (let i = 0; i < samples.length; i++) samples[i] = audio.readInt16LE(i * 2);
    }
    if (rateHz < MIN_SAMPLE_RATE_HZ) {
      throw new ModelInputError(
        `sample rate ${rateHz} Hz is below the ${MIN_SAMPLE_RATE_HZ} Hz minimum`,
      );
    }
    return decodeTones(samples, rateHz);
  }
}

export function createTranscriber(modelId: string): ToneTranscriber {
  if (!TRANSCRIBE_MODEL_IDS.includes(modelId as (typeof TRANSCRIBE_MODEL_IDS)[number])) {
    throw new Error(
      `unknown transcribe model ${JSON.stringify(modelId)} (available: ${TRANSCRIBE_MODEL_IDS.join(", ")})`,
    );
  }
  return new ToneTranscriber(modelId);
}
