"""Random inputs for the parser and agent-loop fuzz tests."""
from __future__ import annotations

import random

ALPHABET = list('abcxyz_ ()",=.-\\#019\t') + ["highlight", "cut", "progress_bar", "k", "TERMINATE",
                                             "THOUGHT:", "ACTION:", "ANSWER:", "```", "\n", "é", "\x00"]
SEEDS = [
    'highlight("cat")',
    'highlight("a \\"q\\"", k=3)',
    "cut(10, 20.5)",
    "progress_bar()",
    "cut(start=-1, end=5)",
    "import os",
    'highlight(cat, k="x")',
]


def mutate(rng: random.Random, text: str) -> str:
    chars = list(text)
    for _ in range(rng.randint(1, 4)):
        op = rng.randrange(3)
        pos = rng.randint(0, len(chars))
        if op == 0:
            chars.insert(pos, rng.choice(ALPHABET))
        elif op == 1 and chars:
            del chars[min(pos, len(chars) - 1)]
        elif chars:
            chars[min(pos, len(chars) - 1)] = rng.choice(ALPHABET)
    return "".join(chars)


def random_action(rng: random.Random) -> str:
    if rng.random() < 0.3:
        return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 30)))
    lines = [rng.choice(SEEDS) for _ in range(rng.randint(1, 3))]
    return "\n".join(mutate(rng, ln) if rng.random() < 0.7 else ln for ln in lines)


def random_response(rng: random.Random) -> str:
    parts = []
    if rng.random() < 0.8:
        parts.append("THOUGHT: " + rng.choice(["look", "", "the cat is at 20s", "```"]))
    r = rng.random()
    if r < 0.5:
        fence = rng.random() < 0.5
        body = random_action(rng)
        parts.append("ACTION:\n```\n" + body + "\n```" if fence else "ACTION: " + body)
    elif r < 0.75:
        parts.append("ANSWER: " + rng.choice(["[3, 9]", "B", "", "12 - 30 seconds"]))
        parts.append("TERMINATE")
    elif r < 0.85:
        parts.append("".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 40))))
    text = "\n".join(parts)
    return mutate(rng, text) if rng.random() < 0.3 else text
