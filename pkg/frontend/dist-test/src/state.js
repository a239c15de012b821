/**
 * Pure view-state machine for the review flow.
 *
 * State transitions never mutate; each function returns a fresh state.
 * Answers for an item become immutable once the server acknowledges the
 * submission, and the submit action is only available when all three
 * questions are answered.
 */
import { isDone } from "./types.js";
const EMPTY_ANSWERS = { q1: null, q2: null, q3: null };
export function initialState() {
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
export function loadNext(state, payload) {
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
export function setAnswer(state, question, value) {
    if (state.status !== "answering" || state.item === null) {
        return state;
    }
    if (state.acked.includes(state.item.item_id)) {
        return state; // acknowledged answers are immutable
    }
    return { ...state, answers: { ...state.answers, [question]: value } };
}
export function canSubmit(state) {
    return (state.status === "answering" &&
        state.item !== null &&
        state.answers.q1 !== null &&
        state.answers.q2 !== null &&
        state.answers.q3 !== null);
}
export function beginSubmit(state) {
    if (!canSubmit(state)) {
        return state;
    }
    return { ...state, status: "submitting", notice: null };
}
export function ackSubmit(state) {
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
export function skipAlreadyAnswered(state) {
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
export function submitFailed(state, notice) {
    return { ...state, status: "error", notice };
}
export function retry(state) {
    if (state.status !== "error") {
        return state;
    }
    return { ...state, status: "answering", notice: null };
}
