/** Regenerates the bundled speech fixture (fixtures/speech_sample.wav):
 * tone-alphabet audio for a known word, centered in a fixed-length clip.
 *
 *   node dist/tools/make_fixture.js [out.wav] [word] [seconds]
 */
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { DEFAULT_SAMPLE_RATE_HZ, synthesize } from "../tones.js";
import { encodeWavPcm16 } from "../wav.js";

const out = process.argv[2] ?? "fixtures/speech_sample.wav";
const word = process.argv[3] ?? "scene";
const seconds = Number(process.argv[4] ?? "2.0");

const voiced = synthesize(word, DEFAULT_SAMPLE_RATE_HZ);
const total = Math.max(voiced.length, Math.round(seconds * DEFAULT_SAMPLE_RATE_HZ));
const padded = new Int16Array(total);
padded.set(voiced, Math.floor((total - voiced.length) / 2));
mkdirSync(dirname(out), { recursive: true });
writeFileSync(out, encodeWavPcm16(padded, DEFAULT_SAMPLE_RATE_HZ));
console.log(`${out}: ${(total / DEFAULT_SAMPLE_RATE_HZ).toFixed(2)} s of "${word}"`);
