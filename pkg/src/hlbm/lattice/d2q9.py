"""D2Q9 velocity set and its isotropy identities."""

from fractions import Fraction
from itertools import product

import numpy as np

#   6   2   5
#     \ | /
#   3 - 0 - 1
#     / | \
#   7   4   8
C = np.array(
    [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1], [1, 1], [-1, 1], [-1, -1], [1, -1]],
    dtype=np.int64,
)
W_EXACT = (
    [Fraction(4, 9)] + [Fraction(1, 9)] * 4 + [Fraction(1, 36)] * 4
)
# the rest weight absorbs the rounding of the others so the float weights
# sum to exactly one; rounding 4/9 directly loses 2**-54 of mass per step
W1 = 1.0 / 9.0
W2 = 1.0 / 36.0
W0 = 1.0 - 4.0 * W1 - 4.0 * W2
W = np.array([W0] + [W1] * 4 + [W2] * 4)
OPP = np.array([0, 3, 4, 1, 2, 7, 8, 5, 6], dtype=np.int64)
CS2 = 1.0 / 3.0
Q = 9
D = 2

CX = C[:, 0].astype(np.float64)
CY = C[:, 1].astype(np.float64)


def _delta(a, b):
    return 1 if a == b else 0


def check_isotropy() -> None:
    """Assert the lattice moment identities in exact rational arithmetic.

    sum w = 1, sum w c = 0, sum w c c = I/3, odd third moment = 0 and
    sum w c c c c = (dd + dd + dd)/9.
    """
    c = [tuple(int(v) for v in ci) for ci in C]
    assert sum(W_EXACT) == 1, "weights do not sum to one"
    assert sum(Fraction(w) for w in W) == 1, "float weights do not sum to one"
    assert all(abs(Fraction(w) - we) <= we * Fraction(1, 2**51) for w, we in zip(W, W_EXACT))
    for a in range(D):
        assert sum(w * ci[a] for w, ci in zip(W_EXACT, c)) == 0
    for a, b in product(range(D), repeat=2):
        m2 = sum(w * ci[a] * ci[b] for w, ci in zip(W_EXACT, c))
        assert m2 == Fraction(_delta(a, b), 3), f"second moment ({a},{b}) = {m2}"
    for a, b, g in product(range(D), repeat=3):
        assert sum(w * ci[a] * ci[b] * ci[g] for w, ci in zip(W_EXACT, c)) == 0
    for a, b, g, e in product(range(D), repeat=4):
        m4 = sum(w * ci[a] * ci[b] * ci[g] * ci[e] for w, ci in zip(W_EXACT, c))
        iso = Fraction(
            _delta(a, b) * _delta(g, e) + _delta(a, g) * _delta(b, e)
            + _delta(a, e) * _delta(b, g),
            9,
        )
        assert m4 == iso, f"fourth moment ({a},{b},{g},{e}) = {m4}, expected {iso}"
    for i in range(Q):
        assert (C[OPP[i]] == -C[i]).all()


check_isotropy()
