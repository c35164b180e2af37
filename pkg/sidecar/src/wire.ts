/** Wire schemas for the provider HTTP protocol.
 *
 * All floats travel as plain decimal JSON numbers; binary payloads are
 * base64 strings.
 *
 *   POST /v1/chat         {model, messages:[{role, content}], max_tokens} -> {content}
 *   POST /v1/caption      {model, frames:[{media_type, data_b64, timestamp_s}],
 *                          transcript, instruction} -> {caption}
 *   POST /v1/transcribe   {model, audio_b64, sample_rate_hz} -> {transcript}
 *   POST /v1/embed_text   {model, texts:[...]} -> {vectors:[[...], ...], dim}
 *   POST /v1/embed_mm     {model, frames:[...] | text} -> {vector:[...], dim}
 *   GET  /v1/capabilities -> {chat, caption, transcribe, d_t, d_v}
 */
import { z } from "zod";

export const CHAT_PATH = "/v1/chat";
export const CAPTION_PATH = "/v1/caption";
export const TRANSCRIBE_PATH = "/v1/transcribe";
export const EMBED_TEXT_PATH = "/v1/embed_text";
export const EMBED_MM_PATH = "/v1/embed_mm";
export const CAPABILITIES_PATH = "/v1/capabilities";

export const CHAT_ROLES = ["system", "user", "assistant"] as const;
export const FRAME_MEDIA_TYPES = ["jpeg", "png"] as const;

const base64 = z.string().regex(/^(?:[A-Za-z0-9+/]{4})*(?:[A-Za-z0-9+/]{2}==|[A-Za-z0-9+/]{3}=)?$/, {
  message: "must be base64",
});

export const FrameSchema = z.object({
  media_type: z.enum(FRAME_MEDIA_TYPES),
  data_b64: base64.min(1, { message: "frame bytes must be non-empty" }),
  timestamp_s: z.number().finite().nonnegative(),
});

export const ChatMessageSchema = z
  .object({
    role: z.enum(CHAT_ROLES),
    content: z.string(),
  })
  .refine((m) => m.role !== "user" || m.content.length > 0, {
    message: "user turns must have non-empty text",
  });

export const ChatRequestSchema = z.object({
  model: z.string(),
  messages: z.array(ChatMessageSchema),
  max_tokens: z.number().int(),
});

export const ChatResponseSchema = z.object({ content: z.string() });

export const CaptionRequestSchema = z.object({
  model: z.string(),
  frames: z.array(FrameSchema).min(1, { message: "frames must be a non-empty list" }),
  transcript: z.string(),
  instruction: z.string(),
});

export const CaptionResponseSchema = z.object({ caption: z.string() });

export const TranscribeRequestSchema = z.object({
  model: z.string(),
  audio_b64: base64,
  sample_rate_hz: z.number().int(),
});

export const TranscribeResponseSchema = z.object({ transcript: z.string() });

export const EmbedTextRequestSchema = z.object({
  model: z.string(),
  texts: z.array(z.string()),
});

export const EmbedTextResponseSchema = z
  .object({
    vectors: z.array(z.array(z.number().finite())),
    dim: z.number().int().positive(),
  })
  .refine((r) => r.vectors.every((v) => v.length === r.dim), {
    message: "every vector must have length dim",
  });

export const EmbedMmRequestSchema = z
  .object({
    model: z.string(),
    frames: z.array(FrameSchema).min(1, { message: "frames must be a non-empty list" }).optional(),
    text: z.string().optional(),
  })
  .refine((r) => (r.frames === undefined) !== (r.text === undefined), {
    message: "embed_mm requires exactly one of frames or text",
  });

export const EmbedMmResponseSchema = z
  .object({
    vector: z.array(z.number().finite()),
    dim: z.number().int().positive(),
  })
  .refine((r) => r.vector.length === r.dim, {
    message: "vector must have length dim",
  });

export const CapabilitiesSchema = z.object({
  chat: z.boolean(),
  caption: z.boolean(),
  transcribe: z.boolean(),
  d_t: z.number().int(),
  d_v: z.number().int(),
});

export const ErrorResponseSchema = z.object({ error: z.string() });

export type Frame = z.infer<typeof FrameSchema>;
export type ChatMessage = z.infer<typeof ChatMessageSchema>;
export type Capabilities = z.infer<typeof CapabilitiesSchema>;

export function frameBytes(frame: Frame): Buffer {
  return Buffer.from(frame.data_b64, "base64");
}
