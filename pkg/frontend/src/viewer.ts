/**
 * Synchronized zoom/pan for the two image panes.
 *
 * One shared transform drives both panes, so whatever the rater does to
 * one side happens to the other at the same instant; the panes can never
 * drift apart.
 */

export interface Transform {
  scale: number;
  x: number;
  y: number;
}

export const MIN_SCALE = 1;
export const MAX_SCALE = 16;

export function identity(): Transform {
  return { scale: 1, x: 0, y: 0 };
}

/** Zoom by `factor` keeping the point (cx, cy) fixed under the cursor. */
export function zoomAt(t: Transform, factor: number, cx: number, cy: number): Transform {
  const scale = Math.min(Math.max(t.scale * factor, MIN_SCALE), MAX_SCALE);
  const applied = scale / t.scale;
  return {
    scale,
    x: cx - (cx - t.x) * applied,
    y: cy - (cy - t.y) * applied,
  };
}

export function pan(t: Transform, dx: number, dy: number): Transform {
  return { ...t, x: t.x + dx, y: t.y + dy };
}

export function toCss(t: Transform): string {
  return `translate(${t.x}px, ${t.y}px) scale(${t.scale})`;
}

export interface Pane {
  setTransform(css: string): void;
}

export class SyncedViewer {
  private transform: Transform = identity();

  constructor(private readonly panes: Pane[]) {
    this.apply();
  }

  current(): Transform {
    return { ...this.transform };
  }

  zoom(factor: number, cx: number, cy: number): void {
    this.transform = zoomAt(this.transform, factor, cx, cy);
    this.apply();
  }

  panBy(dx: number, dy: number): void {
    this.transform = pan(this.transform, dx, dy);
    this.apply();
  }

  reset(): void {
    this.transform = identity();
    this.apply();
  }

  private apply(): void {
    const css = toCss(this.transform);
    for (const pane of this.panes) {
      pane.setTransform(css);
    }
  }
}
