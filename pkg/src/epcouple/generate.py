"""Random end-periodic homotopy equivalences for property tests.

Every sample is a two-ended spine: a core vertex with `rank` loops, one
block vertex per side carrying `rank` loops of its own, and a single
joining edge each way.  The map translates the spine one step toward
the attracting end, twisting the core loop images by a random
composition of Nielsen moves and the incoming negative loops by a
random signed permutation (their images must stay single edges, the
map is rigid that close to an end).  Nielsen composites and signed
permutations are automorphisms of the free group on the loops, so each
twisted translation is still a homotopy equivalence; the sample is
re-validated before it is returned.
"""
from __future__ import annotations

import random

from .pi1 import Word, invert_word, reduce_word
from .presentation import EndPeriodicPresentation


def nielsen_automorphism(rng: random.Random, rank: int,
                         moves: int) -> tuple[Word, ...]:
    """Images of the generators under `moves` random Nielsen moves."""
    images = [(i + 1,) for i in range(rank)]
    if rank == 0:
        return ()
    for _ in range(moves):
        kind = rng.choice(("invert", "swap", "left", "right"))
        i = rng.randrange(rank)
        j = rng.randrange(rank)
        if kind == "invert":
            images[i] = invert_word(images[i])
        elif kind == "swap":
            images[i], images[j] = images[j], images[i]
        elif i != j:
            factor = images[j] if rng.random() < 0.5 else invert_word(images[j])
            if kind == "left":
                images[i] = reduce_word(factor + images[i])
            else:
                images[i] = reduce_word(images[i] + factor)
    return tuple(images)


def _word_path(word: Word, names: list[str]) -> list[str]:
    return [names[k - 1] if k > 0 else "-" + names[-k - 1] for k in word]


def random_presentation(rng: random.Random) -> EndPeriodicPresentation:
    """One validated sample; structure and twists drawn from `rng`."""
    rank = rng.randint(1, 4)
    xs = [f"x{i}" for i in range(1, rank + 1)]
    ys = [f"y{i}" for i in range(1, rank + 1)]
    zs = [f"z{i}" for i in range(1, rank + 1)]

    core_twist = nielsen_automorphism(rng, rank, rng.randint(0, 8))
    perm = list(range(rank))
    rng.shuffle(perm)
    neg_signs = [rng.choice((1, -1)) for _ in range(rank)]

    data = {
        "core": {
            "vertices": ["c"],
            "edges": [{"id": x, "tail": "c", "head": "c"} for x in xs],
        },
        "ends": [
            {"id": "Eminus", "sign": "repelling", "period": 1,
             "orbit_leader": "Eminus"},
            {"id": "Eplus", "sign": "attracting", "period": 1,
             "orbit_leader": "Eplus"},
        ],
        "block_pos": {
            "vertices": [{"id": "p", "end": "Eplus"}],
            "edges": [{"id": "t", "tail": "c", "head": "p",
                       "end": "Eplus", "kind": "joining"}]
                     + [{"id": y, "tail": "p", "head": "p",
                         "end": "Eplus", "kind": "subgraph"} for y in ys],
        },
        "block_neg": {
            "vertices": [{"id": "w", "end": "Eminus"}],
            "edges": [{"id": "s", "tail": "c", "head": "w",
                       "end": "Eminus", "kind": "joining"}]
                     + [{"id": z, "tail": "w", "head": "w",
                         "end": "Eminus", "kind": "subgraph"} for z in zs],
        },
        "map": {
            "vertices": {"c": "p", "w": "c"},
            "edges": {"s": ["-t"]}
                     | {x: _word_path(core_twist[i], ys)
                        for i, x in enumerate(xs)}
                     | {z: _word_path((neg_signs[i] * (perm[i] + 1),), xs)
                        for i, z in enumerate(zs)},
        },
    }
    pres = EndPeriodicPresentation.from_data(data)
    pres.validate()
    return pres
