/**
 * Pure view-state machine for the review flow.
 *
 * State transitions never mutate; each function returns a fresh state.
 * Answers for an item become immutable once the server acknowledges the
 * submission, and the submit action is only available when all three
 * questions are answered.
 */

import { isDone } from "./types.js";
import type { ItemPayload, NextPayload, Side, YesNo } from "./types.js";

export type Status = "loading" | "answering" | "submitting" | "error" | "done";

export interface Answers {
  q1: YesNo | null;
  q2: Side | null;
  q3: Side | null;
}

export interface ViewState {
  status: Status;
  item: ItemPayload | null;
  answers: Answers;
  index: number;
  total: number;
  answeredCount: number;
  notice: string | null;
  /** Item ids whose answers were acknowledged; locked forever. */
  acked: readonly string[];
}

const EMPTY_ANSWERS: Answers = { q1: null, q2: null, q3: null };

export function initialState(): ViewState {
  return {
    status: "loading",
    item: null,
    answers: EMPTY_ANSWERS,
    index: 0,
    total: 0,
    answeredCount: 0,
    notice: null,
    acked: [],
  };
}

export function loadNext(state: ViewState, payload: NextPayload): ViewState {
  if (isDone(payload)) {
    return {
      ...state,
      status: "done",
      item: null,
      answers: EMPTY_ANSWERS,
      index: payload.index,
      total: payload.total,
      notice: null,
    };
  }
  return {
    ...state,
    status: "answering",
    item: payload,
    answers: EMPTY_ANSWERS,
    index: payload.index,
    total: payload.total,
    notice: null,
  };
}

export function setAnswer(
  state: ViewState,
  question: keyof Answers,
  value: YesNo | Side,
): ViewState {
  if (state.status !== "answering" || state.item === null) {
    return state;
  }
  if (state.acked.includes(state.item.item_id)) {
    return state; // acknowledged answers are immutable
  }
  return { ...state, answers: { ...state.answers, [question]: value } };
}

export function canSubmit(state: ViewState): boolean {
  return (
    state.status === "answering" &&
    state.item !== null &&
    state.answers.q1 !== null &&
    state.answers.q2 !== null &&
    state.answers.q3 !== null
  );
}

export function beginSubmit(state: ViewState): ViewState {
  if (!canSubmit(state)) {
    return state;
  }
  return { ...state, status: "submitting", notice: null };
}

export function ackSubmit(state: ViewState): ViewState {
  if (state.item === null) {
    return state;
  }
  return {
    ...state,
    status: "loading",
    acked: [...state.acked, state.item.item_id],
    answeredCount: state.answeredCount + 1,
    notice: null,
  };
}

/** Server said this item was answered before: lock it and move on. */
export function skipAlreadyAnswered(state: ViewState): ViewState {
  if (state.item === null) {
    return state;
  }
  return {
    ...state,
    status: "loading",
    acked: [...state.acked, state.item.item_id],
    notice: "Item was already answered; skipping forward.",
  };
}

/** Network or server failure: keep the answers, surface a retry notice. */
export function submitFailed(state: ViewState, notice: string): ViewState {
  return { ...state, status: "error", notice };
}

export function retry(state: ViewState): ViewState {
  if (state.status !== "error") {
    return state;
  }
  return { ...state, status: "answering", notice: null };
}
