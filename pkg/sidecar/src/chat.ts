/** Optional chat model: echoes the latest user turn, capped at max_tokens
 * whitespace words.  Useful for wiring checks against a live sidecar; the
 * engine's real reasoning needs an actual LLM endpoint. */
import { ModelInputError } from "./errors.js";
import { ChatMessage } from "./wire.js";

export const CHAT_MODEL_IDS = ["parrot-v1"] as const;

export class ParrotChat {
  constructor(readonly modelId: string) {}

  reply(messages: ChatMessage[], maxTokens: number): string {
    const users = messages.filter((m) => m.role === "user");
    if (users.length === 0) {
      throw new ModelInputError("chat requires at least one user turn");
    }
    const words = users[users.length - 1].content.split(/\s+/).filter(Boolean);
    return words.slice(0, Math.max(1, maxTokens)).join(" ");
  }
}

export function createChatModel(modelId: string): ParrotChat {
  if (!CHAT_MODEL_IDS.includes(modelId as (typeof CHAT_MODEL_IDS)[number])) {
    throw new Error(
      `unknown chat model ${JSON.stringify(modelId)} (available: ${CHAT_MODEL_IDS.join(", ")})`,
    );
  }
  return new ParrotChat(modelId);
}
