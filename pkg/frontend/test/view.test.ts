import assert from "node:assert/strict";
import { readFileSync, readdirSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import { sanitizeNext } from "../src/sanitize.js";
import { ackSubmit, beginSubmit, initialState, loadNext, setAnswer } from "../src/state.js";
import { render } from "../src/view.js";
import type { ViewDom } from "../src/view.js";

class RecordingDom implements ViewDom {
  log: string[] = [];
  submitEnabled = false;

  setImages(left: string | null, right: string | null): void {
    this.log.push(`images:${left}|${right}`);
  }
  setProgress(text: string): void {
    this.log.push(`progress:${text}`);
  }
  setAnswer(question: string, value: string | null): void {
    this.log.push(`answer:${question}=${value}`);
  }
  setSubmitEnabled(enabled: boolean): void {
    this.submitEnabled = enabled;
    this.log.push(`submit:${enabled}`);
  }
  setNotice(text: string | null): void {
    this.log.push(`notice:${text}`);
  }
  showDone(summary: string): void {
    this.log.push(`done:${summary}`);
  }
}

const HOSTILE_PAYLOAD = {
  item_id: "it42",
  left_url: "/images/0123456789abcdef01234567",
  right_url: "/images/fedcba987654321076543210",
  index: 0,
  total: 10,
  truth: "left",
  her2_score: "2+",
  duplicate_of: "it41",
};

test("nothing truth-revealing ever reaches the DOM", () => {
  const dom = new RecordingDom();
  let state = loadNext(initialState(), sanitizeNext(HOSTILE_PAYLOAD));
  state = setAnswer(state, "q1", "yes");
  render(state, dom);
  const rendered = dom.log.join("\n").toLowerCase();
  for (const leak of ["truth", "her2", "duplicate", "real", "generated"]) {
    assert.ok(!rendered.includes(leak), `DOM output leaks ${leak}: ${rendered}`);
  }
});

test("submit control follows the three-question gate", () => {
  const dom = new RecordingDom();
  let state = loadNext(initialState(), sanitizeNext(HOSTILE_PAYLOAD));
  render(state, dom);
  assert.equal(dom.submitEnabled, false);
  state = setAnswer(state, "q1", "yes");
  state = setAnswer(state, "q2", "left");
  render(state, dom);
  assert.equal(dom.submitEnabled, false);
  state = setAnswer(state, "q3", "right");
  render(state, dom);
  assert.equal(dom.submitEnabled, true);
});

test("completion screen reports the submitted count", () => {
  const dom = new RecordingDom();
  let state = loadNext(initialState(), sanitizeNext(HOSTILE_PAYLOAD));
  state = setAnswer(state, "q1", "yes");
  state = setAnswer(state, "q2", "left");
  state = setAnswer(state, "q3", "right");
  state = ackSubmit(beginSubmit(state));
  state = loadNext(state, { done: true, index: 10, total: 10 });
  render(state, dom);
  assert.ok(dom.log.some((line) => line.startsWith("done:") && line.includes("1 of 10")));
});

test("client code never touches persistent browser storage", () => {
  // Compiled test lives at dist-test/test/, so the TS sources sit two up.
  const here = dirname(fileURLToPath(import.meta.url));
  const srcDir = join(here, "..", "..", "src");
  for (const name of readdirSync(srcDir)) {
    if (!name.endsWith(".ts")) {
      continue;
    }
    const source = readFileSync(join(srcDir, name), "utf-8");
    for (const api of ["localStorage", "sessionStorage", "document.cookie", "indexedDB"]) {
      assert.ok(!source.includes(api), `${name} uses ${api}`);
    }
  }
});
