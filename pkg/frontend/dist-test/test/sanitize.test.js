import assert from "node:assert/strict";
import { test } from "node:test";
import { sanitizeNext } from "../src/sanitize.js";
const GOOD_ITEM = {
    item_id: "it0011aabbcc",
    left_url: "/images/aabbccddeeff001122334455",
    right_url: "/images/554433221100ffeeddccbbaa",
    index: 0,
    total: 11,
};
test("passes a well-formed item payload through unchanged", () => {
    const item = sanitizeNext(GOOD_ITEM);
    assert.deepEqual(item, GOOD_ITEM);
});
test("passes a done payload through", () => {
    const done = sanitizeNext({ done: true, index: 11, total: 11 });
    assert.deepEqual(done, { done: true, index: 11, total: 11 });
});
test("drops every non-whitelisted field, including truth-revealing ones", () => {
    const malicious = {
        ...GOOD_ITEM,
        truth: "left",
        her2_score: "3+",
        duplicate_of: "it0001",
        source_id: "tile_3p_001",
        anything_else: { nested: "secret" },
    };
    const item = sanitizeNext(malicious);
    assert.deepEqual(Object.keys(item).sort(), ["index", "item_id", "left_url", "right_url", "total"]);
    const serialized = JSON.stringify(item);
    for (const leak of ["truth", "her2", "duplicate", "source_id", "secret"]) {
        assert.ok(!serialized.includes(leak), `sanitized payload leaks ${leak}`);
    }
});
test("rejects image URLs that are not opaque /images/ references", () => {
    assert.throws(() => sanitizeNext({ ...GOOD_ITEM, left_url: "http://evil/img.png" }));
    assert.throws(() => sanitizeNext({ ...GOOD_ITEM, right_url: "/images/../session.json" }));
    assert.throws(() => sanitizeNext({ ...GOOD_ITEM, left_url: "/tiles/real_001.png" }));
});
test("rejects malformed payloads", () => {
    assert.throws(() => sanitizeNext(null));
    assert.throws(() => sanitizeNext("nope"));
    assert.throws(() => sanitizeNext({ item_id: 7 }));
    assert.throws(() => sanitizeNext({ ...GOOD_ITEM, total: -1 }));
});
