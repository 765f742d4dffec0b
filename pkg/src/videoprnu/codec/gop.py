"""Frame typing, reference assignment, and decode-order scheduling.

GOPs are closed: every prediction reference lives inside the same GOP, so
decoding can start at any GOP head. B frames use the nearest past and the
nearest future anchor (I or P) of their GOP; a B frame with no future anchor
(trailing pattern position or truncated video) predicts from the past anchor
only.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError

FRAME_TYPES = ("I", "P", "B")


def validate_gop_pattern(pattern: str) -> None:
    if not pattern or pattern[0] != "I":
        raise ConfigError(f"GOP pattern must begin with I, got {pattern!r}")
    bad = set(pattern) - set(FRAME_TYPES)
    if bad:
        raise ConfigError(f"GOP pattern may only contain I/P/B, got {pattern!r}")


@dataclass(frozen=True)
class FramePlan:
    """Schedule entry for one frame, indexed by display order."""

    display_index: int
    frame_type: str
    past_ref: int | None  # display index of the backward reference
    future_ref: int | None  # display index of the forward reference (B only)


def plan_frames(pattern: str, n_frames: int) -> list[FramePlan]:
    """Assign a type and references to every display index."""
    validate_gop_pattern(pattern)
    if n_frames < 1:
        raise ConfigError("need at least one frame")
    period = len(pattern)
    types = [pattern[i % period] for i in range(n_frames)]

    plans: list[FramePlan] = []
    for i, ftype in enumerate(types):
        gop_start = i - (i % period)
        gop_end = min(gop_start + period, n_frames)  # exclusive
        past = None
        future = None
        if ftype != "I":
            past = max(j for j in range(gop_start, i) if types[j] in ("I", "P"))
        if ftype == "B":
            forward = [j for j in range(i + 1, gop_end) if types[j] in ("I", "P")]
            future = forward[0] if forward else None
        plans.append(FramePlan(i, ftype, past, future))
    return plans


def decode_order(plans: list[FramePlan]) -> list[int]:
    """Display indices in decode order: anchors first, B after its references."""

    def key(plan: FramePlan) -> tuple[int, int, int]:
        if plan.frame_type == "B":
            gate = plan.future_ref if plan.future_ref is not None else plan.past_ref
            return (gate, 1, plan.display_index)
        return (plan.display_index, 0, plan.display_index)

    return [p.display_index for p in sorted(plans, key=key)]
