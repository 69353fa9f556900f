"""Finite-alphabet distributions and information measures.

All information quantities are in bits (log base 2) and 0*log(0) is 0.
Containers are immutable wrappers around numpy arrays, validated at
construction; the measures themselves are plain functions. Multi-symbol
blocks are indexed lexicographically with the first symbol most
significant, and every module that enumerates blocks uses the helpers
here so the encoding never drifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LN2 = float(np.log(2.0))

# constructors renormalize when |sum - 1| <= this, reject otherwise
NORMALIZATION_SLACK = 1e-9
# entries this far below zero are rejected rather than clipped
NEGATIVE_SLACK = 1e-12

DEFAULT_BLOCK_CAP = 10_000_000


class DomainError(ValueError):
    """A numeric argument lies outside the operation's domain."""


class CapExceeded(RuntimeError):
    """A resource cap (alphabet, block count, codebook size) was hit."""


def _clean_pmf_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if np.any(arr < -NEGATIVE_SLACK):
        raise ValueError(f"{name} has negative entries")
    arr = np.clip(arr, 0.0, None)
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_SLACK:
        raise ValueError(f"{name} sums to {total!r}, not 1")
    return arr / total


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on {0, ..., m-1}."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _clean_pmf_array(self.probs, "pmf")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def size(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.size

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0.0)


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix; row i is the output law given input i."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.rows, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("channel must be a nonempty 2-D array")
        cleaned = np.vstack([_clean_pmf_array(r, "channel row") for r in arr])
        cleaned.setflags(write=False)
        object.__setattr__(self, "rows", cleaned)

    @property
    def input_size(self) -> int:
        return int(self.rows.shape[0])

    @property
    def output_size(self) -> int:
        return int(self.rows.shape[1])

    def apply(self, p: Pmf) -> Pmf:
        """Pushforward of the input law through the channel."""
        if p.size != self.input_size:
            raise ValueError("input pmf does not match channel input size")
        return Pmf(p.probs @ self.rows)

    def joint(self, p: Pmf) -> "JointPmf":
        """Joint (input, output) law for a given input marginal."""
        if p.size != self.input_size:
            raise ValueError("input pmf does not match channel input size")
        return JointPmf(p.probs[:, None] * self.rows)

    @classmethod
    def bsc(cls, crossover: float) -> "Channel":
        """Binary symmetric channel with the given crossover probability."""
        if not 0.0 <= crossover <= 1.0:
            raise DomainError("crossover must lie in [0, 1]")
        a = float(crossover)
        return cls(np.array([[1.0 - a, a], [a, 1.0 - a]]))

    @classmethod
    def identity(cls, m: int) -> "Channel":
        return cls(np.eye(m))


@dataclass(frozen=True)
class JointPmf:
    """Joint law on a product alphabet, stored as an |X| x |Y| table."""

    table: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.table, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("joint table must be a nonempty 2-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("joint table has non-finite entries")
        if np.any(arr < -NEGATIVE_SLACK):
            raise ValueError("joint table has negative entries")
        arr = np.clip(arr, 0.0, None)
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_SLACK:
            raise ValueError(f"joint table sums to {total!r}, not 1")
        arr = arr / total
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.table.shape[0]), int(self.table.shape[1]))

    def marginal_x(self) -> Pmf:
        return Pmf(self.table.sum(axis=1))

    def marginal_y(self) -> Pmf:
        return Pmf(self.table.sum(axis=0))


@dataclass(frozen=True)
class DistortionMatrix:
    """Per-letter distortion cost, rows indexed by x and columns by y."""

    costs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.costs, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("distortion matrix must be a nonempty 2-D array")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise ValueError("distortion entries must be finite and >= 0")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "costs", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.costs.shape[0]), int(self.costs.shape[1]))

    @property
    def max_cost(self) -> float:
        return float(self.costs.max())

    @property
    def is_square(self) -> bool:
        return self.costs.shape[0] == self.costs.shape[1]

    @classmethod
    def hamming(cls, m: int) -> "DistortionMatrix":
        return cls(1.0 - np.eye(m))


def _xlog2x(arr: np.ndarray) -> np.ndarray:
    # 0 * log 0 = 0 by continuity
    out = np.zeros_like(arr)
    mask = arr > 0.0
    out[mask] = arr[mask] * np.log2(arr[mask])
    return out


def binary_entropy(p: float) -> float:
    """Entropy of a Bernoulli(p) source in bits."""
    if not -NEGATIVE_SLACK <= p <= 1.0 + NEGATIVE_SLACK:
        raise DomainError(f"binary_entropy argument {p!r} outside [0, 1]")
    p = min(max(float(p), 0.0), 1.0)
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p)


def entropy(p: Pmf | np.ndarray) -> float:
    """Shannon entropy in bits."""
    arr = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    return float(-_xlog2x(arr).sum())


def kl_divergence(p: Pmf, q: Pmf) -> float:
    """Relative entropy D(p || q) in bits; +inf off the support of q."""
    if p.size != q.size:
        raise ValueError("pmf sizes differ")
    pp, qq = p.probs, q.probs
    if np.any((pp > 0.0) & (qq == 0.0)):
        return float("inf")
    mask = pp > 0.0
    return float(np.sum(pp[mask] * np.log2(pp[mask] / qq[mask])))


def mutual_information(joint: JointPmf) -> float:
    """I(X;Y) in bits for a joint table."""
    t = joint.table
    px = t.sum(axis=1)
    py = t.sum(axis=0)
    ref = np.outer(px, py)
    mask = t > 0.0
    val = float(np.sum(t[mask] * np.log2(t[mask] / ref[mask])))
    # cancellation noise is ~1e-16 per term and either sign; snap it so
    # product joints report an exact zero
    return 0.0 if val < 1e-12 else val


def conditional_entropy(joint: JointPmf) -> float:
    """H(Y|X) in bits."""
    t = joint.table
    return float(-_xlog2x(t).sum() + _xlog2x(t.sum(axis=1)).sum())


def total_variation(p: Pmf | np.ndarray, q: Pmf | np.ndarray) -> float:
    """Total variation distance, (1/2) sum |p - q|."""
    pa = p.probs if isinstance(p, Pmf) else np.asarray(p, dtype=float)
    qa = q.probs if isinstance(q, Pmf) else np.asarray(q, dtype=float)
    if pa.shape != qa.shape:
        raise ValueError("distributions have different shapes")
    return float(0.5 * np.abs(pa - qa).sum())


def empirical_pmf(samples: np.ndarray, size: int) -> Pmf:
    """Empirical distribution of integer samples over {0, ..., size-1}."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("no samples")
    counts = np.bincount(samples.ravel(), minlength=size)
    if counts.size > size:
        raise ValueError("sample outside the alphabet")
    return Pmf(counts / counts.sum())


def product_extension(p: Pmf, n: int, cap: int = DEFAULT_BLOCK_CAP) -> Pmf:
    """IID n-fold product law over blocks, lexicographic block index.

    The first symbol of the block is the most significant digit of the
    index, matching block_index / block_of_index below.
    """
    if n < 1:
        raise DomainError("block length must be >= 1")
    if p.size ** n > cap:
        raise CapExceeded(f"{p.size}^{n} block alphabet exceeds cap {cap}")
    out = p.probs
    for _ in range(n - 1):
        out = np.kron(out, p.probs)
    return Pmf(out)


def all_blocks(m: int, n: int, cap: int = DEFAULT_BLOCK_CAP) -> np.ndarray:
    """All length-n blocks over {0..m-1} in lexicographic index order."""
    if m ** n > cap:
        raise CapExceeded(f"{m}^{n} block alphabet exceeds cap {cap}")
    grids = np.meshgrid(*([np.arange(m)] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def block_index(blocks: np.ndarray, m: int) -> np.ndarray:
    """Lexicographic index of each row, first symbol most significant."""
    blocks = np.atleast_2d(np.asarray(blocks))
    n = blocks.shape[1]
    weights = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return blocks @ weights


def block_of_index(index: int, m: int, n: int) -> np.ndarray:
    """Inverse of block_index for a single index."""
    out = np.zeros(n, dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[pos] = index % m
        index //= m
    if index != 0:
        raise ValueError("index out of range for the block alphabet")
    return out


def conditional_entropy_grouping(joint: JointPmf, tol: float = 1e-9) -> float:
    """Smallest H(f(Y)|X) over functions f that leave X and Y
    conditionally independent given f(Y).

    The minimizer merges output symbols whose posterior columns
    P(x | y) coincide (within tol in sup norm); merging anything else
    would break the conditional independence requirement, and keeping
    equal-posterior symbols apart can only raise the entropy.
    """
    t = joint.table
    py = t.sum(axis=0)
    labels = -np.ones(t.shape[1], dtype=int)
    reps: list[np.ndarray] = []
    for y in range(t.shape[1]):
        if py[y] <= 0.0:
            # massless symbols never occur; park each in its own class
            labels[y] = len(reps)
            reps.append(np.full(t.shape[0], np.nan))
            continue
        post = t[:, y] / py[y]
        for g, rep in enumerate(reps):
            if np.all(np.isfinite(rep)) and np.max(np.abs(post - rep)) <= tol:
                labels[y] = g
                break
        else:
            labels[y] = len(reps)
            reps.append(post)
    grouped = np.zeros((t.shape[0], len(reps)))
    for y in range(t.shape[1]):
        grouped[:, labels[y]] += t[:, y]
    return conditional_entropy(JointPmf(grouped))
