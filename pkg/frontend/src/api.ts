/** Thin fetch client for the review API; all responses pass the sanitizer. */

import { sanitizeNext } from "./sanitize.js";
import type { AnswerAck, AnswerBody, NextPayload, SubmitResult } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  imageUrl(path: string): string {
    return this.baseUrl + path;
  }

  async next(): Promise<NextPayload> {
    const resp = await this.fetchFn(`${this.baseUrl}/session/${this.token}/next`);
    if (!resp.ok) {
      throw new Error(`next failed with status ${resp.status}`);
    }
    return sanitizeNext(await resp.json());
  }

  async submit(body: AnswerBody): Promise<SubmitResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/session/${this.token}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (resp.ok) {
      const ack = (await resp.json()) as AnswerAck;
      return { kind: "ok", ack };
    }
    if (resp.status === 409) {
      return { kind: "already_answered" };
    }
    let detail = "";
    try {
      const payload = (await resp.json()) as { detail?: string };
      detail = payload.detail ?? "";
    } catch {
      // non-JSON error body; status is enough
    }
    return { kind: "error", status: resp.status, detail };
  }
}
