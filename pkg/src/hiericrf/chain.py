"""Level schedule and prompt rendering for the iterated reasoning chain.

A schedule visits taxonomy levels top-down, walks back up, and then
repeats full descents for every remaining iteration:

    [1..D] + [D-1..1] + (I-1) * [D..1]        for I >= 1,

so its length is l = D + (D-1) + (I-1)*D.  I = 0 degenerates to the
plain ascending [1..D]: a single pass with no revisits, i.e. the flat
one-slot-per-level prompt.  Each schedule position becomes one mask
slot in the rendered prompt, and the position's level decides which
label supervises it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgument, LengthMismatch

DEFAULT_ITERATIONS = 5


@dataclass(frozen=True)
class ChainSchedule:
    levels: tuple[int, ...]
    depth: int
    iterations: int

    @property
    def l(self) -> int:
        return len(self.levels)


def build_schedule(depth: int, iterations: int = DEFAULT_ITERATIONS) -> ChainSchedule:
    """Build the level schedule for a taxonomy of the given depth."""
    if depth < 1:
        raise InvalidArgument(f"depth must be >= 1, got {depth}")
    if iterations < 0:
        raise InvalidArgument(f"iterations must be >= 0, got {iterations}")
    if iterations == 0:
        levels = list(range(1, depth + 1))
    else:
        levels = list(range(1, depth + 1))
        levels += list(range(depth - 1, 0, -1))
        for _ in range(iterations - 1):
            levels += list(range(depth, 0, -1))
    return ChainSchedule(levels=tuple(levels), depth=depth, iterations=iterations)


def render_template(text: str, schedule: ChainSchedule, mask_token: str = "[MASK]") -> str:
    """Render the prompt: one ``{level} level: {mask}`` slot per schedule position.

    The exact spacing and punctuation are fixed so that independently
    written exporters produce byte-identical prompts.
    """
    if not mask_token:
        raise InvalidArgument("mask_token must be non-empty")
    parts = [f"{text}. It was "]
    for level in schedule.levels:
        parts.append(f"{level} level: {mask_token} ")
    rendered = "".join(parts)
    return rendered[:-1] + "."


def golden_sequence(path, schedule: ChainSchedule) -> tuple:
    """Expand a root-to-leaf gold path into per-position supervision.

    Position i is supervised by the path's label at the level the
    schedule visits there: output[i] = path[schedule[i] - 1].
    """
    if len(path) != schedule.depth:
        raise LengthMismatch(
            f"gold path has length {len(path)}, schedule depth is {schedule.depth}"
        )
    return tuple(path[level - 1] for level in schedule.levels)
