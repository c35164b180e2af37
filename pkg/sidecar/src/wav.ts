/** Minimal RIFF/WAVE codec for 16-bit PCM audio. */
import { ModelInputError } from "./errors.js";

export interface WavData {
  samples: Int16Array;
  rateHz: number;
}

export function isRiffWave(data: Buffer): boolean {
  return (
    data.length >= 12 &&
    data.toString("ascii", 0, 4) === "RIFF" &&
    data.toString("ascii", 8, 12) === "WAVE"
  );
}

export function encodeWavPcm16(samples: Int16Array, rateHz: number): Buffer {
  const dataBytes = samples.length * 2;
  const buf = Buffer.alloc(44 + dataBytes);
  buf.write("RIFF", 0, "ascii");
  buf.writeUInt32LE(36 + dataBytes, 4);
  buf.write("WAVE", 8, "ascii");
  buf.write("fmt ", 12, "ascii");
  buf.writeUInt32LE(16, 16); // fmt chunk size
  buf.writeUInt16LE(1, 20); // PCM
  buf.writeUInt16LE(1, 22); // mono
  buf.writeUInt32LE(rateHz, 24);
  buf.writeUInt32LE(rateHz * 2, 28); // byte rate
  buf.writeUInt16LE(2, 32); // block align
  buf.writeUInt16LE(16, 34); // bits per sample
  buf.write("data", 36, "ascii");
  buf.writeUInt32LE(dataBytes, 40);
  for (let i = 0; i < samples.length; i++) {
    buf.writeInt16LE(samples[i], 44 + i * 2);
  }
  return buf;
}

/** Parse a RIFF/WAVE container holding 16-bit PCM; multi-channel input is
 * averaged down to mono. */
export function decodeWav(data: Buffer): WavData {
  if (!isRiffWave(data)) {
    throw new ModelInputError("not a RIFF/WAVE file");
  }
  let rateHz = 0;
  let channels = 0;
  let pcm: Buffer | null = null;
  let offset = 12;
  while (offset + 8 <= data.length) {
    const chunkId = data.toString("ascii", offset, offset + 4);
    const chunkSize = data.readUInt32LE(offset + 4);
    const body = data.subarray(offset + 8, offset + 8 + chunkSize);
    if (chunkId === "fmt ") {
      if (body.length < 16) {
        throw new ModelInputError("wav fmt chunk is truncated");
      }
      const format = body.readUInt16LE(0);
      channels = body.readUInt16LE(2);
      rateHz = body.readUInt32LE(4);
      const bits = body.readUInt16LE(14);
      if (format !== 1 || bits !== 16) {
        throw new ModelInputError("unsupported wav encoding: expected 16-bit PCM");
      }
    } else if (chunkId === "data") {
      pcm = body;
    }
    offset += 8 + chunkSize + (chunkSize % 2); // chunks are word-aligned
  }
  if (rateHz <= 0 || channels <= 0 || pcm === null) {
    throw new ModelInputError("wav file has no fmt/data chunks");
  }
  const frameCount = Math.floor(pcm.length / (2 * channels));
  const samples = new Int16Array(frameCount);
  for (let i = 0; i < frameCount; i++) {
    let acc = 0;
    for (let c = 0; c < channels; c++) {
      acc += pcm.readInt16LE((i * channels + c) * 2);
    }
    samples[i] = Math.round(acc / channels);
  }
  return { samples, rateHz };
}
