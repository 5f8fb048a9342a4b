import time

import pytest

from gridgym.generator import GenConfig, generate_puzzle

CORPUS_SEED = "corpus-7f3a"
CORPUS_SIZE = 100


class Corpus(list):
    """(puzzle, solutions) pairs plus the wall time generation took, so
    the generator acceptance budget can charge for it."""

    elapsed: float = 0.0


@pytest.fixture(scope="session")
def generated_corpus():
    """Seeded certified corpus shared by the generator-contract and
    baseline acceptance tests (generation dominates suite runtime, so it
    happens once)."""
    t0 = time.monotonic()
    out = Corpus()
    for k in range(CORPUS_SIZE):
        puzzle, solutions = generate_puzzle(GenConfig(seed=f"{CORPUS_SEED}-{k}"))
        out.append((puzzle, solutions))
    out.elapsed = time.monotonic() - t0
    return out
