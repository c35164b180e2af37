/** Instantiates the configured models, turning any load failure into a
 * ConfigError so startup can refuse with a diagnostic. */
import { ByteStatsCaptioner, createCaptioner } from "./captioner.js";
import { createChatModel, ParrotChat } from "./chat.js";
import { ConfigError, SidecarConfig } from "./config.js";
import { createEncoder, HashProjectionEncoder } from "./encoder.js";
import { createTranscriber, ToneTranscriber } from "./transcriber.js";
import { Capabilities } from "./wire.js";

export interface Models {
  captioner: ByteStatsCaptioner | null;
  transcriber: ToneTranscriber | null;
  encoder: HashProjectionEncoder | null;
  chat: ParrotChat | null;
}

function load<T>(kind: string, modelId: string | null, create: (id: string) => T): T | null {
  if (modelId === null) return null;
  try {
    return create(modelId);
  } catch (err) {
    throw new ConfigError(`cannot load ${kind} model: ${(err as Error).message}`);
  }
}

export function loadModels(config: SidecarConfig): Models {
  return {
    captioner: load("caption", config.captionModel, createCaptioner),
    transcriber: load("transcribe", config.transcribeModel, createTranscriber),
    encoder: load("mm", config.mmModel, createEncoder),
    chat: load("chat", config.chatModel, createChatModel),
  };
}

export function capabilities(models: Models): Capabilities {
  return {
    chat: models.chat !== null,
    caption: models.captioner !== null,
    transcribe: models.transcriber !== null,
    d_t: 0,
    d_v: models.encoder === null ? 0 : models.encoder.dim,
  };
}
