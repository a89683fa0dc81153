"""Tensor powers, factorial powers and the moments of finite point processes."""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config_space import Configuration
from .exceptions import DimensionError
from .utils import rational_array, zeros

logger = logging.getLogger(__name__)

MAX_ORDER = 3


def check_order(n: int):
    if not 0 <= n <= MAX_ORDER:
        raise DimensionError(f"order {n} outside the supported range 0..{MAX_ORDER}")


def is_symmetric(entries: np.ndarray) -> bool:
    """True when the array is invariant under every permutation of its axes."""
    axes = tuple(range(entries.ndim))
    return all(np.array_equal(entries, np.transpose(entries, perm))
               for perm in permutations(axes))


def symmetrize(entries: np.ndarray) -> np.ndarray:
    """Average of an array over all permutations of its axes (exact)."""
    entries = rational_array(entries)
    if entries.ndim < 2:
        return entries
    perms = list(permutations(range(entries.ndim)))
    total = zeros(entries.shape)
    for perm in perms:
        total = total + np.transpose(entries, perm)
    return rational_array(total / len(perms))


class MomentTensor:
    """
    A symmetric rational tensor of order 0..3 over the sites.

    Holds tensor powers, factorial powers, moment functions and correlation
    functions alike. Asymmetric input is rejected.
    """

    def __init__(self, entries: Any, n_sites: Optional[int] = None):
        entries = rational_array(entries)
        check_order(entries.ndim)
        if entries.ndim > 0:
            if len(set(entries.shape)) != 1:
                raise DimensionError(f"tensor dimensions differ: {entries.shape}")
            if n_sites is not None and entries.shape[0] != n_sites:
                raise DimensionError(
                    f"tensor has dimension {entries.shape[0]}, expected {n_sites}"
                )
            if not is_symmetric(entries):
                raise DimensionError(f"order-{entries.ndim} tensor is not symmetric")
        self.entries = entries
        self._n_sites = n_sites if entries.ndim == 0 else entries.shape[0]

    @classmethod
    def zeros(cls, order: int, n_sites: int) -> "MomentTensor":
        check_order(order)
        return cls(zeros((n_sites,) * order), n_sites)

    @property
    def order(self) -> int:
        return self.entries.ndim

    @property
    def n_sites(self) -> Optional[int]:
        return self._n_sites

    def __getitem__(self, index):
        return self.entries[index]

    def __add__(self, other: "MomentTensor") -> "MomentTensor":
        return MomentTensor(self.entries + other.entries, self._n_sites)

    def __sub__(self, other: "MomentTensor") -> "MomentTensor":
        return MomentTensor(self.entries - other.entries, self._n_sites)

    def scaled(self, factor: Fraction) -> "MomentTensor":
        return MomentTensor(self.entries * Fraction(factor), self._n_sites)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentTensor):
            return NotImplemented
        return (self.entries.shape == other.entries.shape
                and bool(np.all(self.entries == other.entries)))

    def __repr__(self) -> str:
        return f"MomentTensor(order={self.order}, entries={self.entries.tolist()})"


@dataclass(frozen=True)
class FiniteMeasure:
    """A finitely supported nonnegative measure on configurations."""

    support: Tuple[Tuple[Configuration, Fraction], ...]

    def __post_init__(self):
        cleaned = []
        seen = set()
        for config, weight in self.support:
            if not isinstance(config, Configuration):
                config = Configuration(tuple(config))
            weight = Fraction(weight)
            if weight <= 0:
                raise DimensionError(f"weight of {config} must be positive, got {weight}")
            if config in seen:
                raise DimensionError(f"configuration {config} appears twice in the support")
            seen.add(config)
            cleaned.append((config, weight))
        lengths = {len(c) for c, _ in cleaned}
        if len(lengths) > 1:
            raise DimensionError(f"support mixes site counts {sorted(lengths)}")
        object.__setattr__(self, "support", tuple(cleaned))

    @classmethod
    def from_weights(cls, pairs: Iterable[Tuple[Any, Any]]) -> "FiniteMeasure":
        """Build from (counts, weight) pairs, merging duplicates and dropping zeros."""
        merged = {}
        for counts, weight in pairs:
            config = counts if isinstance(counts, Configuration) else Configuration(tuple(counts))
            merged[config] = merged.get(config, Fraction(0)) + Fraction(weight)
        return cls(tuple((c, w) for c, w in sorted(merged.items()) if w != 0))

    @property
    def total_weight(self) -> Fraction:
        return sum((w for _, w in self.support), Fraction(0))

    @property
    def configurations(self) -> List[Configuration]:
        return [c for c, _ in self.support]

    @property
    def n_sites(self) -> Optional[int]:
        return len(self.support[0][0]) if self.support else None

    def normalized(self) -> "FiniteMeasure":
        total = self.total_weight
        if total == 0:
            raise DimensionError("cannot normalize an empty measure")
        return FiniteMeasure(tuple((c, w / total) for c, w in self.support))

    def __len__(self) -> int:
        return len(self.support)


def _counts(config: Configuration) -> np.ndarray:
    return rational_array(list(config.counts))


def tensor_power(config: Configuration, n: int) -> MomentTensor:
    """eta^{(x)n}: entry (i1..in) is the product of the counts at those sites."""
    check_order(n)
    if n == 0:
        return MomentTensor(Fraction(1), len(config))
    k = _counts(config)
    result = k
    for _ in range(n - 1):
        result = np.multiply.outer(result, k)
    return MomentTensor(result, len(config))


def _falling(k: int, c: int) -> int:
    value = 1
    for j in range(c):
        value *= k - j
    return value


def factorial_power(config: Configuration, n: int) -> MomentTensor:
    """
    eta^{(.)n}: ordered n-tuples of pairwise distinct particles.

    The entry at an index tuple whose site multiplicities are (c_s) is the
    product over sites of the falling factorials k_s (k_s - 1) ... (k_s - c_s + 1).
    """
    check_order(n)
    size = len(config)
    entries = zeros((size,) * n)
    for index in np.ndindex(entries.shape):
        value = 1
        for site, c in Counter(index).items():
            value *= _falling(config.counts[site], c)
        entries[index] = Fraction(value)
    return MomentTensor(entries, size)


def _accumulate(mu: FiniteMeasure, N: int, power,
                n_sites: Optional[int]) -> List[MomentTensor]:
    check_order(N)
    if n_sites is None:
        n_sites = mu.n_sites
    if n_sites is None:
        raise DimensionError("moments of an empty measure need an explicit site count")
    if mu.n_sites is not None and mu.n_sites != n_sites:
        raise DimensionError(f"measure lives on {mu.n_sites} sites, expected {n_sites}")
    totals = [zeros((n_sites,) * n) for n in range(N + 1)]
    for config, weight in mu.support:
        for n in range(N + 1):
            totals[n] = totals[n] + power(config, n).entries * weight
    return [MomentTensor(t, n_sites) for t in totals]


def power_moments(mu: FiniteMeasure, N: int,
                  n_sites: Optional[int] = None) -> List[MomentTensor]:
    """Moment functions m_0..m_N (m_0 is the total weight)."""
    return _accumulate(mu, N, tensor_power, n_sites)


def correlation_functions(mu: FiniteMeasure, N: int,
                          n_sites: Optional[int] = None) -> List[MomentTensor]:
    """Correlation functions rho^(0)..rho^(N)."""
    return _accumulate(mu, N, factorial_power, n_sites)


@lru_cache(maxsize=None)
def set_partitions(n: int) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """All set partitions of {0..n-1}; blocks ordered by their smallest element."""
    if n == 0:
        return ((),)
    result = []
    for partition in set_partitions(n - 1):
        for i in range(len(partition)):
            blocks = list(partition)
            blocks[i] = blocks[i] + (n - 1,)
            result.append(tuple(blocks))
        result.append(partition + ((n - 1,),))
    return tuple(result)


def _diagonal_term(lower: np.ndarray, partition, shape) -> np.ndarray:
    """Embed a lower-order tensor on the diagonal pattern given by ``partition``."""
    out = zeros(shape)
    for index in np.ndindex(shape):
        if all(len({index[p] for p in block}) == 1 for block in partition):
            out[index] = lower[tuple(index[block[0]] for block in partition)]
    return out


def _check_tensor_list(tensors: Sequence[MomentTensor]) -> int:
    if not tensors:
        raise DimensionError("need at least the order-0 tensor")
    if len(tensors) - 1 > MAX_ORDER:
        raise DimensionError(f"orders above {MAX_ORDER} are not supported")
    n_sites = None
    for n, tensor in enumerate(tensors):
        if tensor.order != n:
            raise DimensionError(f"position {n} holds an order-{tensor.order} tensor")
        if n > 0:
            if n_sites is None:
                n_sites = tensor.n_sites
            elif tensor.n_sites != n_sites:
                raise DimensionError(
                    f"order-{n} tensor has dimension {tensor.n_sites}, expected {n_sites}"
                )
    return n_sites or 0


def factorial_to_power(tensors: Sequence[MomentTensor]) -> List[MomentTensor]:
    """
    Convert correlation functions rho^(0..N) into moment functions m_0..m_N.

    m_n is the sum over set partitions of {1..n} of rho^(#blocks) embedded
    on the diagonal where indices in a block coincide.
    """
    n_sites = _check_tensor_list(tensors)
    result = []
    for n in range(len(tensors)):
        shape = (n_sites,) * n
        total = zeros(shape)
        for partition in set_partitions(n):
            total = total + _diagonal_term(tensors[len(partition)].entries, partition, shape)
        result.append(MomentTensor(total, n_sites))
    return result


def power_to_factorial(tensors: Sequence[MomentTensor]) -> List[MomentTensor]:
    """Inverse of factorial_to_power, solved order by order."""
    n_sites = _check_tensor_list(tensors)
    result: List[MomentTensor] = []
    for n in range(len(tensors)):
        shape = (n_sites,) * n
        rest = tensors[n].entries
        for partition in set_partitions(n):
            if len(partition) == n:
                continue
            rest = rest - _diagonal_term(result[len(partition)].entries, partition, shape)
        result.append(MomentTensor(rest, n_sites))
    return result


def local_moment(mu: FiniteMeasure, region: Iterable[int], n: int) -> Fraction:
    """Local n-th moment: sum of w * (particles inside region)^n."""
    region = list(region)
    total = Fraction(0)
    for config, weight in mu.support:
        total += weight * Fraction(sum(config.counts[i] for i in region)) ** n
    return total


def weighted_mass(config: Configuration, gamma: Sequence[Fraction]) -> Fraction:
    """Gamma-weighted total mass, sum over sites of gamma(x) k_x."""
    if len(gamma) != len(config):
        raise DimensionError(f"gamma has {len(gamma)} entries for {len(config)} sites")
    return sum((Fraction(g) * k for g, k in zip(gamma, config.counts)), Fraction(0))


def weighted_third_moment(mu: FiniteMeasure, gamma: Sequence[Fraction]) -> Fraction:
    """Third moment of the Gamma-weighted total mass under mu."""
    return sum((w * weighted_mass(c, gamma) ** 3 for c, w in mu.support), Fraction(0))
