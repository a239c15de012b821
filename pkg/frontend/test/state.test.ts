import assert from "node:assert/strict";
import { test } from "node:test";

import { sanitizeNext } from "../src/sanitize.js";
import {
  ackSubmit,
  beginSubmit,
  canSubmit,
  initialState,
  loadNext,
  retry,
  setAnswer,
  skipAlreadyAnswered,
  submitFailed,
} from "../src/state.js";
import type { ItemPayload } from "../src/types.js";

const ITEM: ItemPayload = {
  item_id: "it01",
  left_url: "/images/aaaaaaaaaaaaaaaaaaaaaaaa",
  right_url: "/images/bbbbbbbbbbbbbbbbbbbbbbbb",
  index: 2,
  total: 11,
};

test("initial state is loading and cannot submit", () => {
  const state = initialState();
  assert.equal(state.status, "loading");
  assert.equal(canSubmit(state), false);
});

test("submit stays disabled until all three questions are answered", () => {
  let state = loadNext(initialState(), ITEM);
  assert.equal(canSubmit(state), false);
  state = setAnswer(state, "q1", "yes");
  assert.equal(canSubmit(state), false);
  state = setAnswer(state, "q2", "left");
  assert.equal(canSubmit(state), false);
  state = setAnswer(state, "q3", "right");
  assert.equal(canSubmit(state), true);
});

test("beginSubmit is a no-op on partial answers", () => {
  let state = loadNext(initialState(), ITEM);
  state = setAnswer(state, "q1", "yes");
  assert.equal(beginSubmit(state).status, "answering");
});

test("answers are immutable after acknowledgment", () => {
  let state = loadNext(initialState(), ITEM);
  state = setAnswer(state, "q1", "yes");
  state = setAnswer(state, "q2", "left");
  state = setAnswer(state, "q3", "right");
  state = ackSubmit(beginSubmit(state));
  assert.ok(state.acked.includes(ITEM.item_id));
  const frozen = setAnswer(state, "q1", "no");
  assert.equal(frozen, state);
  // Re-presenting the same item keeps it locked.
  const represented = loadNext(state, ITEM);
  assert.equal(setAnswer(represented, "q1", "no"), represented);
});

test("loading the next item resets the answers", () => {
  let state = loadNext(initialState(), ITEM);
  state = setAnswer(state, "q1", "no");
  state = loadNext(state, { ...ITEM, item_id: "it02", index: 3 });
  assert.deepEqual(state.answers, { q1: null, q2: null, q3: null });
  assert.equal(state.index, 3);
});

test("failed submission keeps the answers and enables retry", () => {
  let state = loadNext(initialState(), ITEM);
  state = setAnswer(state, "q1", "yes");
  state = setAnswer(state, "q2", "left");
  state = setAnswer(state, "q3", "right");
  state = submitFailed(beginSubmit(state), "network down");
  assert.equal(state.status, "error");
  assert.equal(state.answers.q1, "yes");
  state = retry(state);
  assert.equal(state.status, "answering");
  assert.equal(canSubmit(state), true);
});

test("server-side already-answered responses skip forward with a notice", () => {
  let state = loadNext(initialState(), ITEM);
  state = skipAlreadyAnswered(state);
  assert.equal(state.status, "loading");
  assert.ok(state.acked.includes(ITEM.item_id));
  assert.match(state.notice ?? "", /skipping/i);
});

test("done payload reaches the completion screen with a count", () => {
  let state = loadNext(initialState(), ITEM);
  state = setAnswer(state, "q1", "yes");
  state = setAnswer(state, "q2", "left");
  state = setAnswer(state, "q3", "right");
  state = ackSubmit(beginSubmit(state));
  state = loadNext(state, { done: true, index: 11, total: 11 });
  assert.equal(state.status, "done");
  assert.equal(state.answeredCount, 1);
  assert.equal(state.total, 11);
});

test("client state never contains truth-revealing fields, even from a hostile server", () => {
  const malicious = {
    ...ITEM,
    truth: "left",
    her2_score: "3+",
    duplicate_of: "it00",
  };
  let state = loadNext(initialState(), sanitizeNext(malicious));
  state = setAnswer(state, "q1", "yes");
  const serialized = JSON.stringify(state).toLowerCase();
  for (const leak of ["truth", "her2", "duplicate"]) {
    assert.ok(!serialized.includes(leak), `client state leaks ${leak}`);
  }
});
