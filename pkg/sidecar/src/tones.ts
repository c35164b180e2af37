/** Tone-alphabet audio codec.
 *
 * Speech is encoded one letter at a time as a fixed-duration pure tone at
 * BASE_HZ + index * STEP_HZ (a=400 Hz ... z=1900 Hz), letters separated by
 * short silences and words by longer ones.  Decoding segments the signal
 * with a short-window energy gate and identifies each segment by running a
 * Goertzel filter bank over the 26 candidate frequencies, picking the one
 * with the most power.  Everything stays below the Nyquist limit for
 * sample rates of 4 kHz and up.
 */

export const DEFAULT_SAMPLE_RATE_HZ = 16000;
export const TONE_S = 0.22;
export const LETTER_GAP_S = 0.08;
export const WORD_GAP_S = 0.35;
export const MIN_SAMPLE_RATE_HZ = 4000;

const BASE_HZ = 400;
const STEP_HZ = 60;
const EDGE_SILENCE_S = 0.1;
const RAMP_S = 0.008; // raised-cosine attack/release, avoids spectral splatter
const AMPLITUDE = 0.6;
const WINDOW_S = 0.01; // energy-gate window
const VOICED_RMS = 0.05; // tone RMS is ~0.42, silence is 0
const MIN_SEGMENT_S = 0.05;
const WORD_BREAK_S = (LETTER_GAP_S + WORD_GAP_S) / 2;

const ALPHABET = "abcdefghijklmnopqrstuvwxyz";

export function letterFrequencyHz(letter: string): number {
  const index = ALPHABET.indexOf(letter);
  if (index < 0) {
    throw new Error(`tone alphabet covers a-z only, got ${JSON.stringify(letter)}`);
  }
  return BASE_HZ + index * STEP_HZ;
}

/** Render lowercase words ("scene", "chase scene") as 16-bit PCM. */
export function synthesize(text: string, rateHz = DEFAULT_SAMPLE_RATE_HZ): Int16Array {
  const words = text.toLowerCase().split(/\s+/).filter(Boolean);
  const chunks: number[] = [];
  const silence = (seconds: number) => {
    for (let i = Math.round(seconds * rateHz); i > 0; i--) chunks.push(0);
  };
  silence(EDGE_SILENCE_S);
  words.forEach((word, w) => {
    if (w > 0) silence(WORD_GAP_S);
    [...word].forEach((letter, i) => {
      if (i > 0) silence(LETTER_GAP_S);
      const freq = letterFrequencyHz(letter);
      const n = Math.round(TONE_S * rateHz);
      const ramp = Math.round(RAMP_S * rateHz);
      for (let s = 0; s < n; s++) {
        let envelope = 1;
        if (s < ramp) envelope = 0.5 - 0.5 * Math.cos((Math.PI * s) / ramp);
        else if (s >= n - ramp) envelope = 0.5 - 0.5 * Math.cos((Math.PI * (n - 1 - s)) / ramp);
        chunks.push(AMPLITUDE * envelope * Math.sin((2 * Math.PI * freq * s) / rateHz));
      }
    });
  });
  silence(EDGE_SILENCE_S);
  const out = new Int16Array(chunks.length);
  for (let i = 0; i < chunks.length; i++) {
    out[i] = Math.round(chunks[i] * 32767);
  }
  return out;
}

/** Power of `freq` in samples[start:end) via the Goertzel recurrence. */
export function goertzelPower(
  samples: Float64Array,
  start: number,
  end: number,
  freqHz: number,
  rateHz: number,
): number {
  const coeff = 2 * Math.cos((2 * Math.PI * freqHz) / rateHz);
  let s1 = 0;
  let s2 = 0;
  for (let i = start; i < end; i++) {
    const s0 = samples[i] + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  return s1 * s1 + s2 * s2 - coeff * s1 * s2;
}

interface Segment {
  start: number;
  end: number;
}

function voicedSegments(samples: Float64Array, rateHz: number): Segment[] {
  const window = Math.max(1, Math.round(WINDOW_S * rateHz));
  const minLen = Math.round(MIN_SEGMENT_S * rateHz);
  const segments: Segment[] = [];
  let current: Segment | null = null;
  for (let start = 0; start < samples.length; start += window) {
    const end = Math.min(start + window, samples.length);
    let energy = 0;
    for (let i = start; i < end; i++) energy += samples[i] * samples[i];
    const voiced = Math.sqrt(energy / (end - start)) >= VOICED_RMS;
    if (voiced) {
      if (current === null) current = { start, end };
      else current.end = end;
    } else if (current !== null) {
      segments.push(current);
      current = null;
    }
  }
  if (current !== null) segments.push(current);
  return segments.filter((s) => s.end - s.start >= minLen);
}

/** Decode tone-alphabet PCM back into its words, space-separated. */
export function decodeTones(pcm: Int16Array, rateHz: number): string {
  if (rateHz < MIN_SAMPLE_RATE_HZ) {
    throw new Error(`sample rate ${rateHz} Hz is below the ${MIN_SAMPLE_RATE_HZ} Hz minimum`);
  }
  const samples = new Float64Array(pcm.length);
  for (let i = 0; i < pcm.length; i++) samples[i] = pcm[i] / 32768;
  const segments = voicedSegments(samples, rateHz);
  let text = "";
  let prevEnd = -1;
  for (const segment of segments) {
    if (prevEnd >= 0) {
      const gapS = (segment.start - prevEnd) / rateHz;
      if (gapS > WORD_BREAK_S) text += " ";
    }
    const trim = Math.floor((segment.end - segment.start) * 0.1);
    let best = 0;
    let bestPower = -1;
    for (let i = 0; i < ALPHABET.length; i++) {
      const power = goertzelPower(
        samples,
        segment.start + trim,
        segment.end - trim,
        BASE_HZ + i * STEP_HZ,
        rateHz,
      );
      if (power > bestPower) {
        bestPower = power;
        best = i;
      }
    }
    text += ALPHABET[best];
    prevEnd = segment.end;
  }
  return text;
}
