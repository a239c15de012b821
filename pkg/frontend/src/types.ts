/** Wire types of the review API, as seen by the rater. */

export type YesNo = "yes" | "no";
export type Side = "left" | "right";

/** One blinded item: opaque id, two opaque image URLs, progress counters. */
export interface ItemPayload {
  item_id: string;
  left_url: string;
  right_url: string;
  index: number;
  total: number;
}

export interface DonePayload {
  done: true;
  index: number;
  total: number;
}

export type NextPayload = ItemPayload | DonePayload;

export function isDone(payload: NextPayload): payload is DonePayload {
  return (payload as DonePayload).done === true;
}

export interface AnswerBody {
  item_id: string;
  q1_similar_pattern: YesNo;
  q2_better_quality: Side;
  q3_which_real: Side;
}

export interface AnswerAck {
  ok: true;
  item_id: string;
  answered: number;
}

export type SubmitResult =
  | { kind: "ok"; ack: AnswerAck }
  | { kind: "already_answered" }
  | { kind: "error"; status: number; detail: string };
