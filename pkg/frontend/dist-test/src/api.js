/** Thin fetch client for the review API; all responses pass the sanitizer. */
import { sanitizeNext } from "./sanitize.js";
export class ReviewClient {
    baseUrl;
    token;
    fetchFn;
    constructor(baseUrl, token, fetchFn = (input, init) => fetch(input, init)) {
        this.baseUrl = baseUrl;
        this.token = token;
        this.fetchFn = fetchFn;
    }
    imageUrl(path) {
        return this.baseUrl + path;
    }
    async next() {
        const resp = await this.fetchFn(`${this.baseUrl}/session/${this.token}/next`);
        if (!resp.ok) {
            throw new Error(`next failed with status ${resp.status}`);
        }
        return sanitizeNext(await resp.json());
    }
    async submit(body) {
        const resp = await this.fetchFn(`${this.baseUrl}/session/${this.token}/answer`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        if (resp.ok) {
            const ack = (await resp.json());
            return { kind: "ok", ack };
        }
        if (resp.status === 409) {
            return { kind: "already_answered" };
        }
        let detail = "";
        try {
            const payload = (await resp.json());
            detail = payload.detail ?? "";
        }
        catch {
            // non-JSON error body; status is enough
        }
        return { kind: "error", status: resp.status, detail };
    }
}
