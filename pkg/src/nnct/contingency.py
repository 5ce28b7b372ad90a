"""2x2 nearest-neighbor contingency table and its moment model.

Cross-tabulating the n (base, NN) pairs by base class (rows) and NN class
(columns) gives the table

                 NN 1    NN 2   sum
    base 1       N11     N12    n1
    base 2       N21     N22    n2
    sum          C1      C2     n

Row sums are the fixed class sizes; column sums and cell counts are random.
Under random labeling the cell counts are join counts over the arcs of the
NN digraph, which yields closed-form expectations and a full 4x4 covariance
matrix in terms of the margins and the digraph statistics Q and R.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError
from .geometry import LabeledPointSet, NNStructure

# Row-wise cell order used for every 4-vector and 4x4 matrix in the package.
CELL_ORDER: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 NNCT of (base class, NN class) pair counts."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (2, 2):
            raise InvalidInputError(f"counts must be 2x2, got shape {c.shape}")
        if np.any(c < 0):
            raise InvalidInputError("cell counts must be nonnegative")
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_counts(cls, counts) -> "ContingencyTable":
        return cls(counts=np.asarray(counts))

    @property
    def row_sums(self) -> tuple[int, int]:
        s = self.counts.sum(axis=1)
        return int(s[0]), int(s[1])

    @property
    def col_sums(self) -> tuple[int, int]:
        s = self.counts.sum(axis=0)
        return int(s[0]), int(s[1])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def as_vector(self) -> np.ndarray:
        """Cell counts flattened in CELL_ORDER."""
        return self.counts.astype(float).ravel()


def tabulate_pairs(labels: np.ndarray, nn_index: np.ndarray) -> np.ndarray:
    """Raw 2x2 table of (base label, NN label) pair counts."""
    labels = np.asarray(labels)
    base1 = labels == 1
    nn1 = labels[nn_index] == 1
    n11 = int(np.count_nonzero(base1 & nn1))
    n12 = int(np.count_nonzero(base1 & ~nn1))
    n21 = int(np.count_nonzero(~base1 & nn1))
    n22 = int(np.count_nonzero(~base1 & ~nn1))
    return np.array([[n11, n12], [n21, n22]], dtype=np.int64)


def build_nnct(pts: LabeledPointSet, nns: NNStructure) -> ContingencyTable:
    """Cross-tabulate the (base, NN) pairs of a two-class point set.

    Raises
    ------
    InvalidInputError
        If either class has no members (the table would be degenerate).
    """
    n1, n2 = pts.class_sizes
    if n1 == 0 or n2 == 0:
        raise InvalidInputError(
            f"both classes need members, got class sizes ({n1}, {n2})"
        )
    return ContingencyTable(tabulate_pairs(pts.labels, nns.nn_index))


def expected_counts(n1: int, n2: int, n: int) -> np.ndarray:
    """Expected cell counts under random labeling.

    E[N_ii] = n_i (n_i - 1) / (n - 1) and E[N_ij] = n_i n_j / (n - 1); the
    expectations depend on class sizes only.  The off-diagonal entry is
    evaluated as the row remainder n_i - E[N_ii] (algebraically identical)
    so each row sums to n_i exactly, ulps included.
    """
    _check_margins(n1, n2, n, minimum=2)
    e11 = n1 * (n1 - 1) / (n - 1)
    e22 = n2 * (n2 - 1) / (n - 1)
    return np.array([[e11, n1 - e11], [n2 - e22, e22]])


@dataclass(frozen=True)
class PairProbabilities:
    """Probabilities that 2, 3, or 4 distinct points drawn without
    replacement carry the indicated class labels.

    A probability whose numerator would need more members than a class has
    is exactly zero.
    """

    p11: float
    p12: float
    p21: float
    p22: float
    p111: float
    p112: float
    p221: float
    p222: float
    p1111: float
    p1122: float
    p2222: float


def _falling(n: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= n - i
    return out


def _multiset_prob(n1: int, n2: int, n: int, c1: int, c2: int) -> float:
    """P(c1 + c2 distinct points have c1 class-1 and c2 class-2 labels)."""
    den = _falling(n, c1 + c2)
    if den <= 0.0:
        return 0.0
    return _falling(n1, c1) * _falling(n2, c2) / den


def pair_probabilities(n1: int, n2: int, n: int) -> PairProbabilities:
    """All pair, triplet, and quartet class probabilities for given margins."""
    _check_margins(n1, n2, n, minimum=2)
    p = lambda c1, c2: _multiset_prob(n1, n2, n, c1, c2)
    return PairProbabilities(
        p11=p(2, 0),
        p12=p(1, 1),
        p21=p(1, 1),
        p22=p(0, 2),
        p111=p(3, 0),
        p112=p(2, 1),
        p221=p(1, 2),
        p222=p(0, 3),
        p1111=p(4, 0),
        p1122=p(2, 2),
        p2222=p(0, 4),
    )


@dataclass(frozen=True)
class CovarianceModel:
    """Moment model of the four cell counts for given margins and (Q, R).

    ``sigma_full`` is the symmetric 4x4 covariance matrix of the cell
    counts in CELL_ORDER; ``expected`` the 2x2 expectation matrix.  Q and R
    enter only the (co)variances, never the expectations, and may be
    real-valued (the adjusted tests substitute estimated expectations).
    """

    n1: int
    n2: int
    n: int
    q_used: float
    r_used: float
    expected: np.ndarray
    sigma_full: np.ndarray

    def dixon_sigma(self) -> np.ndarray:
        """2x2 covariance of (N11, N22)."""
        s = self.sigma_full
        return np.array([[s[0, 0], s[0, 3]], [s[3, 0], s[3, 3]]])


def _check_margins(n1: int, n2: int, n: int, minimum: int) -> None:
    if n1 < 0 or n2 < 0 or n1 + n2 != n:
        raise InvalidInputError(f"inconsistent margins: n1={n1}, n2={n2}, n={n}")
    if n < minimum:
        raise InvalidInputError(f"need at least {minimum} points, got n={n}")


def _cov_entry_coeffs(i, j, k, l, n1, n2, n) -> tuple[float, float, float]:
    """Coefficients (c0, cq, cr) of Cov[N_ij, N_kl] = c0 + cq*Q + cr*R.

    The second moment decomposes over ordered pairs of digraph arcs, which
    fall into six disjoint configurations: the same arc (n of them),
    reversed arcs (R), arcs sharing their head (Q), head-to-tail chains in
    either orientation (n - R each), and fully disjoint pairs
    (n^2 - 3n - Q + R).  Each configuration contributes the probability
    that its distinct points carry the required labels, so every entry is
    affine in Q and R for fixed margins.
    """
    p = lambda *classes: _multiset_prob(
        n1, n2, n, sum(1 for c in classes if c == 1), sum(1 for c in classes if c == 2)
    )
    c0 = cq = cr = 0.0
    if (i, j) == (k, l):
        c0 += n * p(i, j)
    if (i, j) == (l, k):
        cr += p(i, j)
    if j == l:
        cq += p(i, k, j)
    if j == k:
        p3 = p(i, j, l)
        c0 += n * p3
        cr -= p3
    if i == l:
        p3 = p(i, j, k)
        c0 += n * p3
        cr -= p3
    p4 = p(i, j, k, l)
    c0 += (n * n - 3.0 * n) * p4
    cq -= p4
    cr += p4
    c0 -= n * n * p(i, j) * p(k, l)
    return c0, cq, cr


@lru_cache(maxsize=64)
def _sigma_basis(n1: int, n2: int, n: int):
    """sigma(Q, R) = S0 + Q*Sq + R*Sr, so repeated evaluation at new
    (Q, R) values is three scaled adds of fixed 4x4 matrices."""
    s0 = np.empty((4, 4))
    sq = np.empty((4, 4))
    sr = np.empty((4, 4))
    for a, (i, j) in enumerate(CELL_ORDER):
        for b, (k, l) in enumerate(CELL_ORDER):
            if b < a:
                s0[a, b], sq[a, b], sr[a, b] = s0[b, a], sq[b, a], sr[b, a]
            else:
                s0[a, b], sq[a, b], sr[a, b] = _cov_entry_coeffs(i, j, k, l, n1, n2, n)
    for m in (s0, sq, sr):
        m.setflags(write=False)
    return s0, sq, sr


def covariance_model(n1: int, n2: int, n: int, q: float, r: float) -> CovarianceModel:
    """Expectations and the full 4x4 cell-count covariance for given margins.

    Parameters
    ----------
    n1, n2, n : int
        Class sizes and total, n = n1 + n2 >= 4.
    q, r : float
        Shared-NN and reflexive statistics; observed integer values give the
        conditional model, substituted expectations the adjusted one.
    """
    _check_margins(n1, n2, n, minimum=4)
    if not (np.isfinite(q) and np.isfinite(r)) or q < 0 or r < 0:
        raise InvalidInputError(f"Q and R must be finite and >= 0, got ({q}, {r})")
    s0, sq, sr = _sigma_basis(n1, n2, n)
    sigma = s0 + q * sq + r * sr
    return CovarianceModel(
        n1=n1,
        n2=n2,
        n=n,
        q_used=float(q),
        r_used=float(r),
        expected=expected_counts(n1, n2, n),
        sigma_full=sigma,
    )
