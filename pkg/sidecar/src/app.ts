/** HTTP surface: one route per enabled capability, JSON in and out. */
import express, { Express, NextFunction, Request, Response } from "express";
import { z } from "zod";

import { SidecarConfig } from "./config.js";
import { ModelInputError } from "./errors.js";
import { capabilities, Models } from "./models.js";
import * as wire from "./wire.js";

const BODY_LIMIT = "64mb";

function firstIssue(error: z.ZodError): string {
  const issue = error.issues[0];
  const where = issue.path.length > 0 ? issue.path.map(String).join(".") : "request";
  return `${where}: ${issue.message}`;
}

function route<S extends z.ZodType>(schema: S, handle: (body: z.infer<S>) => object) {
  return (req: Request, res: Response) => {
    const parsed = schema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: firstIssue(parsed.error) });
      return;
    }
    try {
      res.json(handle(parsed.data));
    } catch (err) {
      if (err instanceof ModelInputError) {
        res.status(400).json({ error: err.message });
        return;
      }
      res.status(500).json({ error: String((err as Error).message ?? err) });
    }
  };
}

export function createApp(models: Models, config: SidecarConfig): Express {
  const app = express();
  app.use(express.json({ limit: BODY_LIMIT }));

  const checkBatch = (frameCount: number) => {
    if (frameCount > config.maxBatch) {
      throw new ModelInputError(
        `batch of ${frameCount} frames exceeds --max-batch ${config.maxBatch}`,
      );
    }
  };

  app.get(wire.CAPABILITIES_PATH, (req: Request, res: Response) => {
    res.json(capabilities(models));
  });

  if (models.captioner !== null) {
    const captioner = models.captioner;
    app.post(
      wire.CAPTION_PATH,
      route(wire.CaptionRequestSchema, (body) => {
        checkBatch(body.frames.length);
        return { caption: captioner.caption(body.frames, body.transcript, body.instruction) };
      }),
    );
  }

  if (models.transcriber !== null) {
    const transcriber = models.transcriber;
    app.post(
      wire.TRANSCRIBE_PATH,
      route(wire.TranscribeRequestSchema, (body) => {
        const audio = Buffer.from(body.audio_b64, "base64");
        return { transcript: transcriber.transcribe(audio, body.sample_rate_hz) };
      }),
    );
  }

  if (models.encoder !== null) {
    const encoder = models.encoder;
    app.post(
      wire.EMBED_MM_PATH,
      route(wire.EmbedMmRequestSchema, (body) => {
        let vector: number[];
        if (body.text !== undefined) {
          vector = encoder.embedText(body.text);
        } else {
          checkBatch(body.frames!.length);
          vector = encoder.embedFrames(body.frames!);
        }
        return { vector, dim: encoder.dim };
      }),
    );
  }

  if (models.chat !== null) {
    const chat = models.chat;
    app.post(
      wire.CHAT_PATH,
      route(wire.ChatRequestSchema, (body) => ({
        content: chat.reply(body.messages, body.max_tokens),
      })),
    );
  }

  app.use((req: Request, res: Response) => {
    res.status(404).json({ error: `no such endpoint: ${req.method} ${req.path}` });
  });
  // body-parser rejections (bad JSON, oversized body) land here
  app.use((err: unknown, req: Request, res: Response, next: NextFunction) => {
    void next;
    const status =
      typeof (err as { status?: unknown }).status === "number"
        ? ((err as { status: number }).status as number)
        : 500;
    res.status(status).json({ error: String((err as Error).message ?? err) });
  });
  return app;
}
