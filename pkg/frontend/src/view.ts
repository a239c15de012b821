/**
 * Rendering boundary: the only code that moves state into the DOM.
 *
 * `render` talks to an abstract `ViewDom`, which makes both headless
 * testing and the blinding guarantee simple: the recorded output is
 * exactly what can ever reach the page.
 */

import { canSubmit } from "./state.js";
import type { ViewState } from "./state.js";

export interface ViewDom {
  setImages(leftUrl: string | null, rightUrl: string | null): void;
  setProgress(text: string): void;
  setAnswer(question: "q1" | "q2" | "q3", value: string | null): void;
  setSubmitEnabled(enabled: boolean): void;
  setNotice(text: string | null): void;
  showDone(summary: string): void;
}

export function render(state: ViewState, dom: ViewDom): void {
  if (state.status === "done") {
    dom.setImages(null, null);
    dom.setSubmitEnabled(false);
    dom.setNotice(null);
    dom.showDone(`Review complete: ${state.answeredCount} of ${state.total} items submitted.`);
    return;
  }
  if (state.item !== null) {
    dom.setImages(state.item.left_url, state.item.right_url);
    dom.setProgress(`Item ${state.index + 1} of ${state.total}`);
  } else {
    dom.setImages(null, null);
    dom.setProgress(state.total > 0 ? `Item ${state.index + 1} of ${state.total}` : "Loading…");
  }
  dom.setAnswer("q1", state.answers.q1);
  dom.setAnswer("q2", state.answers.q2);
  dom.setAnswer("q3", state.answers.q3);
  dom.setSubmitEnabled(canSubmit(state));
  dom.setNotice(state.notice);
}
