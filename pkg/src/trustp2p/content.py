"""Content catalogue, interest profiles, libraries and query generation.

Files are ``(category, rank)`` pairs. Category popularity and file popularity
within a category both follow a Zipf law; query counts per peer are Poisson.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError


class FileId(NamedTuple):
    category: int
    rank: int


@dataclass(frozen=True)
class ZipfSampler:
    """Finite Zipf law over ranks ``1..support_size``: P(k) proportional to k**-alpha."""

    alpha: float
    support_size: int
    probs: tuple[float, ...]
    cumulative: tuple[float, ...]

    def prob(self, rank: int) -> float:
        return self.probs[rank - 1]

    def sample(self, rng: np.random.Generator) -> int:
        """Draw a rank (1-based)."""
        k = bisect.bisect_right(self.cumulative, rng.random())
        return min(k, self.support_size - 1) + 1


def build_zipf(support_size: int, alpha: float = 0.8) -> ZipfSampler:
    if support_size < 1:
        raise ParameterError(f"Zipf support must be non-empty, got {support_size}")
    if alpha < 0:
        raise ParameterError(f"Zipf alpha must be >= 0, got {alpha}")
    w = np.arange(1, support_size + 1, dtype=float) ** -alpha
    p = w / w.sum()
    cum = np.cumsum(p)
    cum[-1] = 1.0
    return ZipfSampler(alpha, support_size, tuple(p.tolist()), tuple(cum.tolist()))


@dataclass(frozen=True)
class InterestProfile:
    """Categories a peer cares about, with normalized weights."""

    categories: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.categories:
            raise ParameterError("interest profile must be non-empty")
        object.__setattr__(self, "_cum", tuple(np.cumsum(self.weights).tolist()))
        object.__setattr__(self, "_set", frozenset(self.categories))

    def __contains__(self, category: int) -> bool:
        return category in self._set

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.categories, self.weights))

    def sample_category(self, rng: np.random.Generator) -> int:
        i = bisect.bisect_right(self._cum, rng.random() * self._cum[-1])
        return self.categories[min(i, len(self.categories) - 1)]


def assign_profiles(
    n_peers: int,
    n_categories: int,
    rng: np.random.Generator,
    interests_min: int = 3,
    interests_max: int = 6,
    alpha: float = 0.8,
) -> list[InterestProfile]:
    """Give each peer ``k`` distinct categories drawn by category popularity.

    ``k`` is uniform on ``[interests_min, min(interests_max, n_categories)]``.
    """
    if n_categories < 1:
        raise ParameterError(f"n_categories must be >= 1, got {n_categories}")
    if interests_min < 1 or interests_max < interests_min:
        raise ParameterError(f"bad interest range [{interests_min}, {interests_max}]")
    if interests_min > n_categories:
        raise ParameterError(
            f"interests_min={interests_min} exceeds n_categories={n_categories}"
        )
    hi = min(interests_max, n_categories)
    cat_p = np.asarray(build_zipf(n_categories, alpha).probs)
    profiles = []
    for _ in range(n_peers):
        k = int(rng.integers(interests_min, hi + 1))
        cats = rng.choice(n_categories, size=k, replace=False, p=cat_p)
        cats = sorted(int(c) for c in cats)
        w = cat_p[cats]
        w = w / w.sum()
        profiles.append(InterestProfile(tuple(cats), tuple(w.tolist())))
    return profiles


def seed_libraries(
    profiles: list[InterestProfile],
    files_per_category: int,
    copies_per_peer: int,
    rng: np.random.Generator,
    alpha: float = 0.8,
) -> list[set[FileId]]:
    """Initial libraries: ``copies_per_peer`` distinct files per peer, drawn by
    interest weight times within-category popularity."""
    if files_per_category < 1:
        raise ParameterError(f"files_per_category must be >= 1, got {files_per_category}")
    file_zipf = build_zipf(files_per_category, alpha)
    libraries = []
    for prof in profiles:
        lib: set[FileId] = set()
        capacity = len(prof.categories) * files_per_category
        want = min(copies_per_peer, capacity)
        # Rejection on duplicates; bounded so near-saturated profiles terminate.
        tries = 0
        while len(lib) < want and tries < 50 * max(want, 1):
            lib.add(FileId(prof.sample_category(rng), file_zipf.sample(rng)))
            tries += 1
        libraries.append(lib)
    return libraries


def sample_query_count(lam: float, rng: np.random.Generator) -> int:
    """Number of queries a peer issues this generation, Poisson(lam)."""
    if not lam > 0:
        raise ParameterError(f"query rate must be > 0, got {lam}")
    return int(rng.poisson(lam))


def pick_query_target(
    profile: InterestProfile,
    file_sampler: ZipfSampler,
    own_library: set[FileId],
    rng: np.random.Generator,
    max_retries: int = 5,
) -> FileId:
    """Pick a file the peer wants: category by interest, rank by popularity.

    Owned files are re-drawn up to ``max_retries`` times; the last draw is
    returned regardless.
    """
    f = FileId(profile.sample_category(rng), file_sampler.sample(rng))
    for _ in range(max_retries):
        if f not in own_library:
            break
        f = FileId(profile.sample_category(rng), file_sampler.sample(rng))
    return f
