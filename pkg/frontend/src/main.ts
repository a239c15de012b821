/**
 * Browser bootstrap: wires the state machine, API client and synced
 * viewer onto the static page. The session token comes from the URL
 * (?token=...); nothing is ever written to local or session storage.
 */

import { ReviewClient } from "./api.js";
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
} from "./state.js";
import type { ViewState } from "./state.js";
import { isDone } from "./types.js";
import type { NextPayload, Side, YesNo } from "./types.js";
import { render } from "./view.js";
import type { ViewDom } from "./view.js";
import { SyncedViewer } from "./viewer.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function domAdapter(): ViewDom {
  const leftImg = el<HTMLImageElement>("left-image");
  const rightImg = el<HTMLImageElement>("right-image");
  const progress = el<HTMLElement>("progress");
  const notice = el<HTMLElement>("notice");
  const submit = el<HTMLButtonElement>("submit");
  const doneScreen = el<HTMLElement>("done");
  const viewerWrap = el<HTMLElement>("viewer");
  return {
    setImages(leftUrl, rightUrl) {
      viewerWrap.style.display = leftUrl === null ? "none" : "";
      leftImg.src = leftUrl ?? "";
      rightImg.src = rightUrl ?? "";
    },
    setProgress(text) {
      progress.textContent = text;
    },
    setAnswer(question, value) {
      for (const input of document.querySelectorAll<HTMLInputElement>(`input[name=${question}]`)) {
        input.checked = input.value === value;
      }
    },
    setSubmitEnabled(enabled) {
      submit.disabled = !enabled;
    },
    setNotice(text) {
      notice.textContent = text ?? "";
      notice.style.display = text === null ? "none" : "";
    },
    showDone(summary) {
      doneScreen.textContent = summary;
      doneScreen.style.display = "";
    },
  };
}

function preloadImages(client: ReviewClient, payload: NextPayload): Promise<boolean> {
  if (isDone(payload)) {
    return Promise.resolve(true);
  }
  const load = (url: string) =>
    new Promise<boolean>((resolve) => {
      const image = new Image();
      image.onload = () => resolve(true);
      image.onerror = () => resolve(false);
      image.src = client.imageUrl(url);
    });
  return Promise.all([load(payload.left_url), load(payload.right_url)]).then(
    (flags) => flags[0] && flags[1],
  );
}

export function start(): void {
  const token = new URLSearchParams(window.location.search).get("token");
  if (token === null || token === "") {
    el<HTMLElement>("notice").textContent = "No session token in the URL (expected ?token=...).";
    return;
  }
  const client = new ReviewClient("", token);
  const dom = domAdapter();
  const viewer = new SyncedViewer([
    { setTransform: (css) => (el<HTMLElement>("left-image").style.transform = css) },
    { setTransform: (css) => (el<HTMLElement>("right-image").style.transform = css) },
  ]);
  let state: ViewState = initialState();

  const update = (next: ViewState): void => {
    state = next;
    render(state, dom);
  };

  const advance = async (): Promise<void> => {
    try {
      const payload = await client.next();
      const imagesOk = await preloadImages(client, payload);
      viewer.reset();
      let next = loadNext(state, payload);
      if (!imagesOk) {
        // Inline error; the rater's answers-in-progress stay untouched.
        next = { ...next, notice: "An image failed to load; use Retry to refetch it." };
      }
      update(next);
      if (!isDone(payload)) {
        el<HTMLImageElement>("left-image").src = client.imageUrl(payload.left_url);
        el<HTMLImageElement>("right-image").src = client.imageUrl(payload.right_url);
      }
    } catch (err) {
      update(submitFailed(state, `Could not load the next item: ${String(err)}. Retry?`));
    }
  };

  const submitAnswers = async (): Promise<void> => {
    if (!canSubmit(state) || state.item === null) {
      return;
    }
    update(beginSubmit(state));
    const body = {
      item_id: state.item.item_id,
      q1_similar_pattern: state.answers.q1 as YesNo,
      q2_better_quality: state.answers.q2 as Side,
      q3_which_real: state.answers.q3 as Side,
    };
    const result = await client.submit(body).catch(() => ({ kind: "error", status: 0, detail: "network" }) as const);
    if (result.kind === "ok") {
      update(ackSubmit(state));
      await advance();
    } else if (result.kind === "already_answered") {
      update(skipAlreadyAnswered(state));
      await advance();
    } else {
      update(submitFailed(state, `Submission failed (${result.status || "network"}); your answers are kept. Retry?`));
    }
  };

  for (const question of ["q1", "q2", "q3"] as const) {
    for (const input of document.querySelectorAll<HTMLInputElement>(`input[name=${question}]`)) {
      input.addEventListener("change", () => {
        update(setAnswer(state, question, input.value as YesNo | Side));
      });
    }
  }
  el<HTMLButtonElement>("submit").addEventListener("click", () => void submitAnswers());
  el<HTMLButtonElement>("retry").addEventListener("click", () => {
    if (state.status === "error") {
      update(retry(state));
      if (state.item === null) {
        void advance();
      }
      return;
    }
    if (state.item !== null) {
      // Refetch the current images past any cached failure; answers stay put.
      const bust = `?retry=${Date.now()}`;
      el<HTMLImageElement>("left-image").src = client.imageUrl(state.item.left_url) + bust;
      el<HTMLImageElement>("right-image").src = client.imageUrl(state.item.right_url) + bust;
      update({ ...state, notice: null });
    }
  });

  const viewerWrap = el<HTMLElement>("viewer");
  viewerWrap.addEventListener("wheel", (event) => {
    event.preventDefault();
    const rect = viewerWrap.getBoundingClientRect();
    const factor = event.deltaY < 0 ? 1.2 : 1 / 1.2;
    viewer.zoom(factor, event.clientX - rect.left, event.clientY - rect.top);
  });
  let dragging = false;
  let last = { x: 0, y: 0 };
  viewerWrap.addEventListener("pointerdown", (event) => {
    dragging = true;
    last = { x: event.clientX, y: event.clientY };
    viewerWrap.setPointerCapture(event.pointerId);
  });
  viewerWrap.addEventListener("pointermove", (event) => {
    if (!dragging) {
      return;
    }
    viewer.panBy(event.clientX - last.x, event.clientY - last.y);
    last = { x: event.clientX, y: event.clientY };
  });
  viewerWrap.addEventListener("pointerup", () => {
    dragging = false;
  });

  // Throughput shortcuts: 1/2 answer q1, arrows q2, shift+arrows q3, Enter submits.
  window.addEventListener("keydown", (event) => {
    if (event.key === "1" || event.key === "2") {
      update(setAnswer(state, "q1", event.key === "1" ? "yes" : "no"));
    } else if (event.key === "ArrowLeft" || event.key === "ArrowRight") {
      const side: Side = event.key === "ArrowLeft" ? "left" : "right";
      update(setAnswer(state, event.shiftKey ? "q3" : "q2", side));
      event.preventDefault();
    } else if (event.key === "Enter") {
      void submitAnswers();
    } else if (event.key === "0") {
      viewer.reset();
    }
  });

  render(state, dom);
  void advance();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  start();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", () => start());
}
