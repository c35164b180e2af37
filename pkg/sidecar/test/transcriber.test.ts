import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { createTranscriber } from "../src/transcriber.js";
import { DEFAULT_SAMPLE_RATE_HZ, synthesize } from "../src/tones.js";
import { decodeWav, encodeWavPcm16 } from "../src/wav.js";

const FIXTURE = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures", "speech_sample.wav");

function pcmBytes(samples: Int16Array): Buffer {
  const buf = Buffer.alloc(samples.length * 2);
  samples.forEach((s, i) => buf.writeInt16LE(s, i * 2));
  return buf;
}

describe("tone transcriber", () => {
  const model = createTranscriber("tone-dsp-v1");

  it("transcribes raw PCM", () => {
    const audio = pcmBytes(synthesize("signal"));
    expect(model.transcribe(audio, DEFAULT_SAMPLE_RATE_HZ)).toBe("signal");
  });

  it("transcribes a RIFF/WAVE container, trusting its embedded rate", () => {
    const wav = encodeWavPcm16(synthesize("signal", 8000), 8000);
    // deliberately wrong request-level rate: the container's 8000 Hz wins
    expect(model.transcribe(wav, 16000)).toBe("signal");
  });

  it("returns an empty transcript for silence", () => {
    const audio = pcmBytes(new Int16Array(DEFAULT_SAMPLE_RATE_HZ));
    expect(model.transcribe(audio, DEFAULT_SAMPLE_RATE_HZ)).toBe("");
  });

  it("rejects odd-length raw audio", () => {
    expect(() => model.transcribe(Buffer.from([1, 2, 3]), 16000)).toThrow(/16-bit PCM/);
  });

  it("rejects rates that are too low to carry the tone band", () => {
    expect(() => model.transcribe(Buffer.alloc(64), 2000)).toThrow(/below the 4000 Hz minimum/);
  });

  it("refuses unknown model ids", () => {
    expect(() => createTranscriber("cloud-asr-xl")).toThrow(/unknown transcribe model/);
  });
});

describe("bundled speech fixture", () => {
  it("is a two-second clip whose transcript contains the spoken word", () => {
    const bytes = readFileSync(FIXTURE);
    const { samples, rateHz } = decodeWav(bytes);
    expect(Math.abs(samples.length / rateHz - 2.0)).toBeLessThan(0.01);
    const model = createTranscriber("tone-dsp-v1");
    expect(model.transcribe(bytes, rateHz)).toContain("scene");
  });
});
