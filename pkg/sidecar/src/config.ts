/** Startup configuration: one flag per capability's model id, plus device,
 * bind address, and batch limit.  Model id "none" disables a capability;
 * at least one must stay enabled. */
import { parseArgs } from "node:util";

export class ConfigError extends Error {}

export interface SidecarConfig {
  host: string;
  port: number;
  device: string;
  maxBatch: number;
  captionModel: string | null;
  transcribeModel: string | null;
  mmModel: string | null;
  chatModel: string | null;
  help: boolean;
}

export const DEFAULT_BIND = "127.0.0.1:8094";
export const DEFAULT_CAPTION_MODEL = "byte-stats-v1";
export const DEFAULT_TRANSCRIBE_MODEL = "tone-dsp-v1";
export const DEFAULT_MM_MODEL = "hash-projection-64";
const SUPPORTED_DEVICES = ["cpu"];

export function usage(): string {
  return [
    "usage: vrag-sidecar [options]",
    "",
    "  --bind HOST:PORT        listen address (default 127.0.0.1:8094)",
    "  --device NAME           compute device; this build supports: cpu",
    "  --max-batch N           max frames accepted per request (default 64)",
    `  --caption-model ID      caption model or "none" (default ${DEFAULT_CAPTION_MODEL})`,
    `  --transcribe-model ID   speech model or "none" (default ${DEFAULT_TRANSCRIBE_MODEL})`,
    `  --mm-model ID           embedding model or "none" (default ${DEFAULT_MM_MODEL})`,
    '  --chat-model ID         chat model or "none" (default none)',
    "  --help                  show this message",
  ].join("\n");
}

function modelOrNull(value: string): string | null {
  return value === "none" ? null : value;
}

export function parseConfig(argv: string[]): SidecarConfig {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        bind: { type: "string", default: DEFAULT_BIND },
        device: { type: "string", default: "cpu" },
        "max-batch": { type: "string", default: "64" },
        "caption-model": { type: "string", default: DEFAULT_CAPTION_MODEL },
        "transcribe-model": { type: "string", default: DEFAULT_TRANSCRIBE_MODEL },
        "mm-model": { type: "string", default: DEFAULT_MM_MODEL },
        "chat-model": { type: "string", default: "none" },
        help: { type: "boolean", default: false },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    throw new ConfigError((err as Error).message);
  }

  const bind = values.bind as string;
  const colon = bind.lastIndexOf(":");
  const host = colon > 0 ? bind.slice(0, colon) : "";
  const portText = colon > 0 ? bind.slice(colon + 1) : "";
  const port = /^\d+$/.test(portText) ? Number(portText) : NaN;
  if (!host || !Number.isInteger(port) || port > 65535) {
    throw new ConfigError(`--bind must be HOST:PORT, got ${JSON.stringify(bind)}`);
  }

  const device = values.device as string;
  if (!SUPPORTED_DEVICES.includes(device)) {
    throw new ConfigError(
      `device ${JSON.stringify(device)} is unavailable: this build supports ${SUPPORTED_DEVICES.join(", ")}`,
    );
  }

  const maxBatchText = values["max-batch"] as string;
  if (!/^\d+$/.test(maxBatchText) || Number(maxBatchText) < 1) {
    throw new ConfigError(`--max-batch must be a positive integer, got ${JSON.stringify(maxBatchText)}`);
  }

  const config: SidecarConfig = {
    host,
    port,
    device,
    maxBatch: Number(maxBatchText),
    captionModel: modelOrNull(values["caption-model"] as string),
    transcribeModel: modelOrNull(values["transcribe-model"] as string),
    mmModel: modelOrNull(values["mm-model"] as string),
    chatModel: modelOrNull(values["chat-model"] as string),
    help: values.help as boolean,
  };
  if (
    config.captionModel === null &&
    config.transcribeModel === null &&
    config.mmModel === null &&
    config.chatModel === null
  ) {
    throw new ConfigError(
      "at least one capability must be enabled (caption, transcribe, mm, or chat model)",
    );
  }
  return config;
}
