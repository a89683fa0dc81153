"""Finite site spaces and the configuration sets K used by the solver."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Iterator, List, Optional, Sequence, Tuple

from .config import DEFAULT_ENUMERATION_CAP
from .exceptions import CapExceededError, DimensionError, KSpecError
from .utils import to_fraction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SiteSpace:
    """A finite labelled site set with an optional distance matrix."""

    sites: Tuple[str, ...]
    distances: Optional[Tuple[Tuple[Fraction, ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(str(s) for s in self.sites))
        if not self.sites:
            raise DimensionError("a site space needs at least one site")
        if len(set(self.sites)) != len(self.sites):
            raise DimensionError(f"duplicate site labels in {self.sites}")

        if self.distances is None:
            return

        n = len(self.sites)
        rows = tuple(tuple(to_fraction(d, f"$.distances[{i}][{j}]")
                           for j, d in enumerate(row))
                     for i, row in enumerate(self.distances))
        if len(rows) != n or any(len(row) != n for row in rows):
            raise DimensionError(f"distance matrix must be {n}x{n}")
        for i in range(n):
            if rows[i][i] != 0:
                raise DimensionError(f"distance d({self.sites[i]},{self.sites[i]}) must be 0")
            for j in range(n):
                if rows[i][j] < 0:
                    raise DimensionError("distances must be nonnegative")
                if rows[i][j] != rows[j][i]:
                    raise DimensionError(
                        f"distance matrix not symmetric at ({self.sites[i]}, {self.sites[j]})"
                    )
        object.__setattr__(self, "distances", rows)

    @classmethod
    def on_line(cls, sites: Sequence[str], spacing: Fraction = Fraction(1)) -> "SiteSpace":
        """Sites placed at 0, spacing, 2*spacing, ... on a line."""
        n = len(sites)
        distances = [[abs(i - j) * Fraction(spacing) for j in range(n)] for i in range(n)]
        return cls(tuple(sites), tuple(tuple(row) for row in distances))

    @property
    def size(self) -> int:
        return len(self.sites)

    def index(self, label: str) -> int:
        try:
            return self.sites.index(label)
        except ValueError:
            raise DimensionError(f"unknown site label {label!r}")

    def distance(self, i: int, j: int) -> Fraction:
        if self.distances is None:
            raise KSpecError("site space has no distance matrix")
        return self.distances[i][j]


@dataclass(frozen=True, order=True)
class Configuration:
    """A point configuration as a per-site particle count vector."""

    counts: Tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise DimensionError(f"negative particle count in {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def total_mass(self) -> int:
        return sum(self.counts)

    @property
    def is_simple(self) -> bool:
        return all(c <= 1 for c in self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.counts) + ")"


def total_mass(config: Configuration) -> int:
    """Total particle number eta(X)."""
    return config.total_mass


class KVariant(str, Enum):
    """Supported configuration sets."""
    AT_MOST = "at_most"
    EXACTLY = "exactly"
    SIMPLE = "simple"
    HARD_CORE = "hard_core"
    LISTED = "listed"


@dataclass(frozen=True)
class KSpec:
    """
    Specification of the configuration set K.

    Every variant carries a total-mass cap Q. HARD_CORE additionally needs a
    positive exclusion distance D; LISTED holds an explicit configuration
    list and takes Q as its largest total mass.
    """

    variant: KVariant
    Q: int
    D: Optional[Fraction] = None
    listed: Tuple[Configuration, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "variant", KVariant(self.variant))
        if self.Q < 0:
            raise KSpecError(f"Q must be nonnegative, got {self.Q}")
        if self.variant is KVariant.HARD_CORE:
            if self.D is None:
                raise KSpecError("hard-core K-spec needs an exclusion distance D")
            object.__setattr__(self, "D", to_fraction(self.D, "$.kspec.D"))
            if self.D <= 0:
                raise KSpecError(f"D must be positive, got {self.D}")
        if self.variant is KVariant.LISTED:
            configs = tuple(sorted(set(c if isinstance(c, Configuration)
                                       else Configuration(tuple(c))
                                       for c in self.listed)))
            if not configs:
                raise KSpecError("listed K-spec needs at least one configuration")
            object.__setattr__(self, "listed", configs)

    @classmethod
    def at_most(cls, Q: int) -> "KSpec":
        return cls(KVariant.AT_MOST, Q)

    @classmethod
    def exactly(cls, Q: int) -> "KSpec":
        return cls(KVariant.EXACTLY, Q)

    @classmethod
    def simple(cls, Q: int) -> "KSpec":
        return cls(KVariant.SIMPLE, Q)

    @classmethod
    def hard_core(cls, D, Q: int) -> "KSpec":
        return cls(KVariant.HARD_CORE, Q, D=D)

    @classmethod
    def from_list(cls, configurations: Sequence[Sequence[int]]) -> "KSpec":
        configs = [Configuration(tuple(c)) for c in configurations]
        q = max((c.total_mass for c in configs), default=0)
        return cls(KVariant.LISTED, q, listed=tuple(configs))

    def with_q(self, Q: int) -> "KSpec":
        """Same variant with a different total-mass cap."""
        if self.variant is KVariant.LISTED:
            raise KSpecError("a listed K-spec has no adjustable cap")
        return KSpec(self.variant, Q, D=self.D)

    def validate_for(self, space: SiteSpace):
        """Check that this K-spec can be enumerated over ``space``."""
        if self.variant is KVariant.HARD_CORE and space.distances is None:
            raise KSpecError("hard-core K-spec requires a distance matrix")
        if self.variant is KVariant.LISTED:
            for config in self.listed:
                if len(config) != space.size:
                    raise DimensionError(
                        f"listed configuration {config} does not have {space.size} sites"
                    )

    def describe(self) -> str:
        if self.variant is KVariant.HARD_CORE:
            return f"hard_core(D={self.D}, Q={self.Q})"
        if self.variant is KVariant.LISTED:
            return f"listed({len(self.listed)} configurations)"
        return f"{self.variant.value}(Q={self.Q})"


def predicted_count(space: SiteSpace, kspec: KSpec) -> Optional[int]:
    """Closed-form size of K, or None when only enumeration can tell (hard-core)."""
    n, q = space.size, kspec.Q
    if kspec.variant is KVariant.AT_MOST:
        return comb(n + q, q)
    if kspec.variant is KVariant.EXACTLY:
        return comb(n + q - 1, q)
    if kspec.variant is KVariant.SIMPLE:
        return sum(comb(n, k) for k in range(min(n, q) + 1))
    if kspec.variant is KVariant.LISTED:
        return len(kspec.listed)
    return None


def _bounded_vectors(n: int, remaining: int, per_site: int) -> Iterator[Tuple[int, ...]]:
    # lexicographic: first coordinate varies slowest
    if n == 0:
        yield ()
        return
    for value in range(min(per_site, remaining) + 1):
        for rest in _bounded_vectors(n - 1, remaining - value, per_site):
            yield (value,) + rest


def _exact_vectors(n: int, total: int) -> Iterator[Tuple[int, ...]]:
    if n == 1:
        yield (total,)
        return
    for value in range(total + 1):
        for rest in _exact_vectors(n - 1, total - value):
            yield (value,) + rest


def _hard_core_vectors(space: SiteSpace, D: Fraction, Q: int) -> Iterator[Tuple[int, ...]]:
    n = space.size

    def extend(prefix: List[int], occupied: List[int], mass: int):
        i = len(prefix)
        if i == n:
            yield tuple(prefix)
            return
        prefix.append(0)
        yield from extend(prefix, occupied, mass)
        prefix.pop()
        if mass < Q and all(space.distance(i, j) > D for j in occupied):
            prefix.append(1)
            occupied.append(i)
            yield from extend(prefix, occupied, mass + 1)
            occupied.pop()
            prefix.pop()

    yield from extend([], [], 0)


def iter_configurations(space: SiteSpace, kspec: KSpec) -> Iterator[Configuration]:
    """Lazily yield K in strictly increasing lexicographic order."""
    kspec.validate_for(space)
    n, q = space.size, kspec.Q
    if kspec.variant is KVariant.AT_MOST:
        vectors = _bounded_vectors(n, q, q)
    elif kspec.variant is KVariant.EXACTLY:
        vectors = _exact_vectors(n, q)
    elif kspec.variant is KVariant.SIMPLE:
        vectors = _bounded_vectors(n, q, 1)
    elif kspec.variant is KVariant.HARD_CORE:
        vectors = _hard_core_vectors(space, kspec.D, q)
    else:
        yield from kspec.listed
        return
    for counts in vectors:
        yield Configuration(counts)


def enumerate_configurations(space: SiteSpace, kspec: KSpec,
                             cap: int = DEFAULT_ENUMERATION_CAP) -> List[Configuration]:
    """
    Enumerate the configuration set K.

    Args:
        space: Finite site space
        kspec: Which configurations belong to K
        cap: Maximum number of configurations allowed

    Returns:
        Configurations in strictly increasing lexicographic order

    Raises:
        CapExceededError: if K has more than ``cap`` elements
    """
    kspec.validate_for(space)
    predicted = predicted_count(space, kspec)
    if predicted is not None and predicted > cap:
        raise CapExceededError(
            f"{kspec.describe()} on {space.size} sites has {predicted} configurations "
            f"(cap {cap})", cap
        )

    configs = []
    for config in iter_configurations(space, kspec):
        configs.append(config)
        if len(configs) > cap:
            raise CapExceededError(
                f"{kspec.describe()} on {space.size} sites exceeds the cap of {cap} "
                f"configurations", cap
            )

    logger.debug(f"Enumerated {len(configs)} configurations for {kspec.describe()}")
    return configs


def count_configurations(space: SiteSpace, kspec: KSpec) -> int:
    """Size of K; closed form where one exists, otherwise counted lazily."""
    kspec.validate_for(space)
    predicted = predicted_count(space, kspec)
    if predicted is not None:
        return predicted
    return sum(1 for _ in iter_configurations(space, kspec))


def contains(space: SiteSpace, kspec: KSpec, config: Configuration) -> bool:
    """Membership test for K without enumerating it."""
    if len(config) != space.size:
        return False
    mass = config.total_mass
    if kspec.variant is KVariant.AT_MOST:
        return mass <= kspec.Q
    if kspec.variant is KVariant.EXACTLY:
        return mass == kspec.Q
    if kspec.variant is KVariant.SIMPLE:
        return mass <= kspec.Q and config.is_simple
    if kspec.variant is KVariant.LISTED:
        return config in kspec.listed
    if mass > kspec.Q or not config.is_simple:
        return False
    occupied = [i for i, c in enumerate(config.counts) if c]
    return all(space.distance(i, j) > kspec.D
               for a, i in enumerate(occupied) for j in occupied[a + 1:])
