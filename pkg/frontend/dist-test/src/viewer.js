/**
 * Synchronized zoom/pan for the two image panes.
 *
 * One shared transform drives both panes, so whatever the rater does to
 * one side happens to the other at the same instant; the panes can never
 * drift apart.
 */
export const MIN_SCALE = 1;
export const MAX_SCALE = 16;
export function identity() {
    return { scale: 1, x: 0, y: 0 };
}
/** Zoom by `factor` keeping the point (cx, cy) fixed under the cursor. */
export function zoomAt(t, factor, cx, cy) {
    const scale = Math.min(Math.max(t.scale * factor, MIN_SCALE), MAX_SCALE);
    const applied = scale / t.scale;
    return {
        scale,
        x: cx - (cx - t.x) * applied,
        y: cy - (cy - t.y) * applied,
    };
}
export function pan(t, dx, dy) {
    return { ...t, x: t.x + dx, y: t.y + dy };
}
export function toCss(t) {
    return `translate(${t.x}px, ${t.y}px) scale(${t.scale})`;
}
export class SyncedViewer {
    panes;
    transform = identity();
    constructor(panes) {
        this.panes = panes;
        this.apply();
    }
    current() {
        return { ...this.transform };
    }
    zoom(factor, cx, cy) {
        this.transform = zoomAt(this.transform, factor, cx, cy);
        this.apply();
    }
    panBy(dx, dy) {
        this.transform = pan(this.transform, dx, dy);
        this.apply();
    }
    reset() {
        this.transform = identity();
        this.apply();
    }
    apply() {
        const css = toCss(this.transform);
        for (const pane of this.panes) {
            pane.setTransform(css);
        }
    }
}
