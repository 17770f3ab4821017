"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np

from resalg import expr

# pools for seeded random expressions: spectral parameters are well separated
# so pair rewriting never divides by a tiny gap, vectors exercise the zero
# vector (R2) and non-unit scalings (R3)
Z_POOL = (1.0, 2.0, -1.0, 0.5 + 1.0j, -2.0 + 0.5j)
F_POOL = (
    (1.0, 0.0),
    (0.0, 1.0),
    (2.0, 0.0),
    (1.0, 1.0),
    (0.0, -3.0),
    (0.0, 0.0),
)


def random_expression(rng: np.random.Generator, n_terms_max=3, word_max=4) -> expr.Expr:
    terms = []
    for _ in range(int(rng.integers(1, n_terms_max + 1))):
        length = int(rng.integers(0, word_max + 1))
        word = tuple(
            expr.Generator(
                Z_POOL[int(rng.integers(len(Z_POOL)))],
                F_POOL[int(rng.integers(len(F_POOL)))],
            )
            for _ in range(length)
        )
        coeff = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        terms.append((coeff, word))
    return expr.Expr(tuple(terms))
