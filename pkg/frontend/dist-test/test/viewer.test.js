import assert from "node:assert/strict";
import { test } from "node:test";
import { MAX_SCALE, MIN_SCALE, SyncedViewer, identity, pan, toCss, zoomAt } from "../src/viewer.js";
function worldPoint(t, cx, cy) {
    return [(cx - t.x) / t.scale, (cy - t.y) / t.scale];
}
test("zoomAt keeps the point under the cursor fixed", () => {
    let t = identity();
    t = pan(t, 30, -12);
    const before = worldPoint(t, 200, 150);
    const zoomed = zoomAt(t, 1.8, 200, 150);
    const after = worldPoint(zoomed, 200, 150);
    assert.ok(Math.abs(before[0] - after[0]) < 1e-9);
    assert.ok(Math.abs(before[1] - after[1]) < 1e-9);
});
test("scale clamps to the configured range", () => {
    let t = identity();
    for (let i = 0; i < 40; i++) {
        t = zoomAt(t, 2.0, 0, 0);
    }
    assert.equal(t.scale, MAX_SCALE);
    for (let i = 0; i < 80; i++) {
        t = zoomAt(t, 0.5, 0, 0);
    }
    assert.equal(t.scale, MIN_SCALE);
});
test("pan accumulates offsets", () => {
    let t = identity();
    t = pan(t, 5, 7);
    t = pan(t, -2, 3);
    assert.deepEqual([t.x, t.y], [3, 10]);
});
class RecordingPane {
    history = [];
    setTransform(css) {
        this.history.push(css);
    }
}
test("both panes always receive identical transforms", () => {
    const left = new RecordingPane();
    const right = new RecordingPane();
    const viewer = new SyncedViewer([left, right]);
    viewer.zoom(2.0, 100, 100);
    viewer.panBy(15, -4);
    viewer.zoom(0.5, 10, 20);
    viewer.reset();
    assert.deepEqual(left.history, right.history);
    assert.equal(left.history.length, 5); // initial apply + 4 operations
    assert.equal(left.history[0], toCss(identity()));
});
