"""Blinded review sessions: item construction, consensus and self-consistency.

A session presents each tile as an anonymous side-by-side pair (real IHC
on one seeded-random side, generated on the other) and re-presents a small
fraction of tiles as duplicates to measure rater self-consistency. Nothing
a rater receives reveals which side is real, the HER2 score, or which
items are duplicates: image references are fresh opaque tokens per item.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import Her2Score
from ..dataset import DatasetManifest, stratified_sample
from ..errors import DataError, InsufficientRaters, NoDuplicates

QUESTIONS = ("q1_similar_pattern", "q2_better_quality", "q3_which_real")
SIDES = ("left", "right")
Q1_VALUES = ("yes", "no")


@dataclass(frozen=True)
class ReviewItem:
    """One blinded side-by-side presentation.

    ``truth`` names the side holding the real IHC and never leaves the
    server. ``duplicate_of`` links a re-presented item to its original,
    which always appears earlier in the session order.
    """

    item_id: str
    left_image_ref: str
    right_image_ref: str
    truth: str
    her2_score: Her2Score
    duplicate_of: str | None = None
    source_id: str = ""

    def generated_side(self) -> str:
        return "right" if self.truth == "left" else "left"


@dataclass(frozen=True)
class RaterAnswer:
    item_id: str
    rater_id: str
    q1_similar_pattern: str
    q2_better_quality: str
    q3_which_real: str
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        if self.q1_similar_pattern not in Q1_VALUES:
            raise DataError(f"q1_similar_pattern must be yes/no, got {self.q1_similar_pattern!r}")
        for name in ("q2_better_quality", "q3_which_real"):
            if getattr(self, name) not in SIDES:
                raise DataError(f"{name} must be left/right, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class ReviewSession:
    """Ordered item list plus the server-side image reference map."""

    items: tuple[ReviewItem, ...]
    image_paths: dict[str, Path] = field(default_factory=dict)
    seed: int = 0

    def originals(self) -> list[ReviewItem]:
        return [it for it in self.items if it.duplicate_of is None]

    def duplicates(self) -> list[ReviewItem]:
        return [it for it in self.items if it.duplicate_of is not None]

    def item(self, item_id: str) -> ReviewItem:
        for it in self.items:
            if it.item_id == item_id:
                return it
        raise KeyError(item_id)


def _ref_token(rng: np.random.Generator) -> str:
    return bytes(rng.integers(0, 256, size=12, dtype=np.uint8)).hex()


def build_session(
    manifest: DatasetManifest,
    n: int = 500,
    dup_rate: float = 0.01,
    seed: int = 0,
) -> ReviewSession:
    """Assemble a blinded session: n stratified items plus injected duplicates.

    Duplicates re-present an earlier original with an independently drawn
    left/right assignment and fresh image references, inserted at seeded
    random positions that are never adjacent to (and always after) their
    original. The whole original order is seeded-shuffled first.
    """
    if dup_rate < 0:
        raise ValueError(f"dup_rate must be >= 0, got {dup_rate}")
    ids = stratified_sample(manifest, n, seed)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))

    image_paths: dict[str, Path] = {}
    items: list[ReviewItem] = []

    def make_item(entry_id: str, item_id: str, duplicate_of: str | None) -> ReviewItem:
        entry = manifest.entry(entry_id)
        if entry.gen_ihc_path is None:
            raise DataError(f"manifest entry {entry_id!r} lacks a generated image")
        truth = SIDES[int(rng.integers(0, 2))]
        real_ref, gen_ref = _ref_token(rng), _ref_token(rng)
        image_paths[real_ref] = Path(entry.real_ihc_path)
        image_paths[gen_ref] = Path(entry.gen_ihc_path)
        left_ref, right_ref = (real_ref, gen_ref) if truth == "left" else (gen_ref, real_ref)
        return ReviewItem(
            item_id=item_id,
            left_image_ref=left_ref,
            right_image_ref=right_ref,
            truth=truth,
            her2_score=entry.her2_score,
            duplicate_of=duplicate_of,
            source_id=entry_id,
        )

    for seq, pos in enumerate(order):
        items.append(make_item(ids[pos], f"it{_ref_token(rng)}", None))

    n_dup = math.ceil(dup_rate * n)
    if n_dup > 0:
        if len(items) < 2:
            raise DataError("cannot inject non-adjacent duplicates into a 1-item session")
        chosen = rng.choice(len(items), size=n_dup, replace=False)
        chosen_originals = [items[int(i)] for i in sorted(int(i) for i in chosen)]
        for original in chosen_originals:
            dup = make_item(original.source_id, f"it{_ref_token(rng)}", original.item_id)
            # Valid slots are strictly after the original and never directly
            # adjacent to it; positions shift as earlier duplicates land.
            pos_now = items.index(original)
            lo = pos_now + 2
            if lo > len(items):
                # Original currently sits last: pull it one position forward so
                # a non-adjacent slot exists, then append the duplicate.
                items[pos_now - 1], items[pos_now] = items[pos_now], items[pos_now - 1]
                slot = len(items)
            else:
                slot = int(rng.integers(lo, len(items) + 1))
            items.insert(slot, dup)

    return ReviewSession(items=tuple(items), image_paths=image_paths, seed=seed)


def _to_target(answer_side: str, item: ReviewItem) -> str:
    """Map a left/right choice to real/generated via the item's truth side."""
    return "real" if answer_side == item.truth else "generated"


def _majority(values: list[str]) -> str | None:
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: -kv[1])
    if len(ranked) == 1:
        return ranked[0][0]
    return ranked[0][0] if ranked[0][1] > ranked[1][1] else None


@dataclass(frozen=True)
class QuestionFractions:
    """Consensus fractions for one HER2 class (or overall)."""

    n_items: int
    q1_yes: float | None
    q2_generated: float | None
    q3_generated: float | None
    denominators: dict[str, int]


@dataclass(frozen=True)
class ConsensusReport:
    n_items: int
    per_score: dict[str, QuestionFractions]
    overall: QuestionFractions
    duplicate_consistency: dict[str, float | None]
    header: dict

    def to_dict(self) -> dict:
        def frac(qf: QuestionFractions) -> dict:
            return {
                "n_items": qf.n_items,
                "q1_yes": qf.q1_yes,
                "q2_generated": qf.q2_generated,
                "q3_generated": qf.q3_generated,
                "denominators": qf.denominators,
            }

        return {
            "n_items": self.n_items,
            "per_score": {k: frac(v) for k, v in self.per_score.items()},
            "overall": frac(self.overall),
            "duplicate_consistency": self.duplicate_consistency,
            "header": self.header,
        }


def consensus(
    answers: list[RaterAnswer],
    items: list[ReviewItem] | tuple[ReviewItem, ...],
    raters: list[str],
) -> ConsensusReport:
    """Majority-vote report over the original (non-duplicate) items.

    Answers are mapped from left/right to real/generated through each
    item's truth side before voting, so the report is invariant under
    relabeling sides. Items where the answering raters split evenly (only
    possible when a rater abstained) drop out of that question's
    denominator and are counted in the header.
    """
    originals = [it for it in items if it.duplicate_of is None]
    by_item: dict[str, dict[str, RaterAnswer]] = {}
    known_ids = {it.item_id for it in items}
    for a in answers:
        if a.item_id not in known_ids:
            continue
        if a.rater_id in raters:
            by_item.setdefault(a.item_id, {})[a.rater_id] = a

    for it in originals:
        have = len(by_item.get(it.item_id, {}))
        if have < 2:
            raise InsufficientRaters(
                f"item {it.item_id!r} has {have} answer(s); consensus needs at least 2 raters"
            )

    abstentions = sum(
        1 for it in originals for r in raters if r not in by_item.get(it.item_id, {})
    )

    tallies: dict[str, dict[str, list]] = {
        s.value: {"q1": [], "q2": [], "q3": []} for s in Her2Score
    }
    non_consensus = {"q1": 0, "q2": 0, "q3": 0}
    for it in originals:
        item_answers = list(by_item[it.item_id].values())
        votes_q1 = [a.q1_similar_pattern for a in item_answers]
        votes_q2 = [_to_target(a.q2_better_quality, it) for a in item_answers]
        votes_q3 = [_to_target(a.q3_which_real, it) for a in item_answers]
        for q, votes in (("q1", votes_q1), ("q2", votes_q2), ("q3", votes_q3)):
            winner = _majority(votes)
            if winner is None:
                non_consensus[q] += 1
            else:
                tallies[it.her2_score.value][q].append(winner)

    def fractions(scores: list[str]) -> QuestionFractions:
        q1_votes = [v for s in scores for v in tallies[s]["q1"]]
        q2_votes = [v for s in scores for v in tallies[s]["q2"]]
        q3_votes = [v for s in scores for v in tallies[s]["q3"]]
        n_class = sum(1 for it in originals if it.her2_score.value in scores)
        return QuestionFractions(
            n_items=n_class,
            q1_yes=(q1_votes.count("yes") / len(q1_votes)) if q1_votes else None,
            q2_generated=(q2_votes.count("generated") / len(q2_votes)) if q2_votes else None,
            q3_generated=(q3_votes.count("generated") / len(q3_votes)) if q3_votes else None,
            denominators={"q1": len(q1_votes), "q2": len(q2_votes), "q3": len(q3_votes)},
        )

    per_score = {s.value: fractions([s.value]) for s in Her2Score}
    overall = fractions([s.value for s in Her2Score])

    dup_rates: dict[str, float | None] = {}
    if any(it.duplicate_of is not None for it in items):
        dup_rates = duplicate_consistency(answers, items)

    header = {
        "raters": list(raters),
        "n_duplicates": sum(1 for it in items if it.duplicate_of is not None),
        "abstentions": abstentions,
        "non_consensus": non_consensus,
    }
    return ConsensusReport(
        n_items=len(originals),
        per_score=per_score,
        overall=overall,
        duplicate_consistency=dup_rates,
        header=header,
    )


def duplicate_consistency(
    answers: list[RaterAnswer],
    items: list[ReviewItem] | tuple[ReviewItem, ...],
) -> dict[str, float | None]:
    """Per-rater fraction of duplicates answered identically to the original.

    Answers are compared after mapping sides through each presentation's
    truth, so a flipped layout with the same judgment still counts as
    consistent. Raters who answered no (duplicate, original) pair map to
    None.
    """
    by_id = {it.item_id: it for it in items}
    dups = [it for it in items if it.duplicate_of is not None]
    if not dups:
        raise NoDuplicates("session contains no duplicate items")
    index: dict[tuple[str, str], RaterAnswer] = {}
    raters: list[str] = []
    for a in answers:
        index[(a.item_id, a.rater_id)] = a
        if a.rater_id not in raters:
            raters.append(a.rater_id)

    def mapped(a: RaterAnswer, it: ReviewItem) -> tuple[str, str, str]:
        return (
            a.q1_similar_pattern,
            _to_target(a.q2_better_quality, it),
            _to_target(a.q3_which_real, it),
        )

    rates: dict[str, float | None] = {}
    for rater in raters:
        matched = 0
        total = 0
        for dup in dups:
            orig = by_id.get(dup.duplicate_of or "")
            a_dup = index.get((dup.item_id, rater))
            a_orig = index.get((orig.item_id, rater)) if orig else None
            if a_dup is None or a_orig is None or orig is None:
                continue
            total += 1
            if mapped(a_dup, dup) == mapped(a_orig, orig):
                matched += 1
        rates[rater] = (matched / total) if total else None
    return rates


def render_consensus_table(report: ConsensusReport) -> str:
    """Markdown table in the qualitative-results shape (three decimals)."""
    scores = [s.value for s in Her2Score]

    def fmt(v: float | None) -> str:
        return f"{v:.3f}" if v is not None else "-"

    lines = [
        "## Blinded review consensus",
        "",
        f"Items scored: {report.n_items}; duplicates excluded: {report.header['n_duplicates']}; "
        f"abstentions: {report.header['abstentions']}.",
        "",
        "| Question | " + " | ".join(scores) + " | All |",
        "|" + "---|" * (len(scores) + 2),
    ]
    rows = (
        ("(1) Consistent staining pattern?", "q1_yes"),
        ("(2) Which image has better quality?", "q2_generated"),
        ("(3) Which one is the real image?", "q3_generated"),
    )
    for label, attr in rows:
        cells = [fmt(getattr(report.per_score[s], attr)) for s in scores]
        cells.append(fmt(getattr(report.overall, attr)))
        lines.append(f"| {label} | " + " | ".join(cells) + " |")
    if report.duplicate_consistency:
        lines.append("")
        for rater, rate in sorted(report.duplicate_consistency.items()):
            lines.append(f"- duplicate consistency, {rater}: {fmt(rate)}")
    return "\n".join(lines) + "\n"
