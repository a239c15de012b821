/** Wire types of the review API, as seen by the rater. */
export function isDone(payload) {
    return payload.done === true;
}
