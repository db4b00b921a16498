"""Step CDFs, empirical CDFs and DKW confidence bands.

Every distribution handled by the package (empirical, band envelope or an
analytic reference) is a :class:`StepCdf`: finitely many jumps on the
nonnegative reals plus an optional atom at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import BandError, ParameterError

PROB_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Nonnegative finite samples, kept sorted ascending."""

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.array(self.values, dtype=float).ravel(), kind="stable")
        if v.size == 0:
            raise ParameterError("no samples")
        if not np.isfinite(v).all() or v[0] < 0:
            raise ParameterError("samples must be nonnegative and finite")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def k(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.k

    def mean(self) -> float:
        return math.fsum(self.values) / self.k


def _compact(values: np.ndarray, cum: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop points whose cumulative probability does not strictly increase."""
    if cum.size == 0:
        return values, cum
    running = np.concatenate(([0.0], np.maximum.accumulate(cum)[:-1]))
    keep = cum > running
    return values[keep], cum[keep]


@dataclass(frozen=True, eq=False)
class StepCdf:
    """Right-continuous nondecreasing step function on ``[0, inf)``.

    ``values`` are the jump locations (strictly increasing), ``cumulative``
    the CDF value at each jump (strictly increasing, positive). Whatever
    probability is not reached by the last jump sits at infinity.
    """

    values: np.ndarray
    cumulative: np.ndarray
    infinity_mass: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        c = np.array(self.cumulative, dtype=float).ravel()
        inf_mass = float(self.infinity_mass)
        if v.shape != c.shape:
            raise ParameterError("values and cumulative must have equal length")
        if not np.isfinite(v).all() or (v.size and v[0] < 0):
            raise ParameterError("jump values must be finite and nonnegative")
        if np.any(np.diff(v) <= 0):
            raise ParameterError("jump values must be strictly increasing")
        if c.size and (c[0] <= 0 or np.any(np.diff(c) <= 0)):
            raise ParameterError("cumulative probabilities must be positive and strictly increasing")
        if not 0.0 <= inf_mass <= 1.0:
            raise ParameterError(f"infinity mass {inf_mass} outside [0, 1]")
        last = c[-1] if c.size else 0.0
        if abs(last + inf_mass - 1.0) > PROB_TOL:
            raise ParameterError(f"total probability {last + inf_mass!r} differs from 1")
        object.__setattr__(self, "values", _readonly(v))
        object.__setattr__(self, "cumulative", _readonly(c))
        object.__setattr__(self, "infinity_mass", inf_mass)

    @classmethod
    def from_masses(
        cls,
        masses: Mapping[float, float] | Iterable[tuple[float, float]],
        infinity_mass: float = 0.0,
        normalize: bool = False,
    ) -> "StepCdf":
        """Build a CDF from point masses; repeated values are merged, zero masses dropped."""
        items = list(masses.items()) if isinstance(masses, Mapping) else list(masses)
        if items:
            vals, ms = (np.asarray(a, dtype=float) for a in zip(*items))
        else:
            vals, ms = np.empty(0), np.empty(0)
        if np.any(ms < 0) or infinity_mass < 0:
            raise ParameterError("masses must be nonnegative")
        uniq, inverse = np.unique(vals, return_inverse=True)
        merged = np.bincount(inverse, weights=ms, minlength=uniq.size) if uniq.size else ms
        if normalize:
            total = math.fsum(merged) + infinity_mass
            if total <= 0:
                raise ParameterError("cannot normalize zero total mass")
            merged = merged / total
            infinity_mass = infinity_mass / total
        cum = np.cumsum(merged)
        uniq, cum = _compact(uniq, cum)
        if normalize and infinity_mass == 0 and cum.size:
            cum[-1] = 1.0
        return cls(uniq, cum, infinity_mass)

    @classmethod
    def point_mass(cls, value: float) -> "StepCdf":
        return cls([value], [1.0])

    @property
    def masses(self) -> np.ndarray:
        return np.diff(self.cumulative, prepend=0.0)

    def __len__(self) -> int:
        return int(self.values.size)

    def __call__(self, x):
        """Evaluate the CDF at ``x`` (scalar or array)."""
        table = np.concatenate(([0.0], self.cumulative))
        out = table[np.searchsorted(self.values, x, side="right")]
        return float(out) if np.ndim(out) == 0 else out

    def is_close(self, other: "StepCdf", tol: float = PROB_TOL) -> bool:
        if self.values.shape != other.values.shape:
            return False
        return bool(
            np.array_equal(self.values, other.values)
            and np.allclose(self.cumulative, other.cumulative, rtol=0, atol=tol)
            and abs(self.infinity_mass - other.infinity_mass) <= tol
        )

    def __repr__(self) -> str:
        pairs = ", ".join(f"{v:g}: {m:.6g}" for v, m in zip(self.values, self.masses))
        tail = f", inf: {self.infinity_mass:.6g}" if self.infinity_mass else ""
        return f"StepCdf({{{pairs}{tail}}})"


@dataclass(frozen=True)
class General:
    """No upper bound on the random variable is known."""

    def __str__(self) -> str:
        return "general"


@dataclass(frozen=True)
class Bounded:
    """The random variable is almost surely at most ``upper``."""

    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.upper) and self.upper >= 0):
            raise ParameterError(f"bound must be finite and nonnegative, got {self.upper}")

    def __str__(self) -> str:
        return f"bounded {self.upper:g}"


BoundKind = Union[General, Bounded]
GENERAL = General()


def ecdf_from_samples(samples: SampleSet | Iterable[float]) -> StepCdf:
    """Empirical CDF: one jump per distinct value, height multiplicity / k."""
    if not isinstance(samples, SampleSet):
        samples = SampleSet(samples)
    v = samples.values
    k = v.size
    last_of_run = np.flatnonzero(np.append(np.diff(v) != 0, True))
    return StepCdf(v[last_of_run], (last_of_run + 1) / k)


def dkw_delta(k: int, delta_conf: float) -> float:
    """Half-width of the DKW band for ``k`` samples at confidence ``1 - delta_conf``."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"sample count must be a positive integer, got {k!r}")
    if not 0.0 < delta_conf < 1.0:
        raise ParameterError(f"confidence parameter must lie in (0, 1), got {delta_conf!r}")
    return math.sqrt(math.log(2.0 / delta_conf) / (2.0 * k))


@dataclass(frozen=True, eq=False)
class DkwBand:
    """Empirical CDF with a simultaneous band of half-width ``delta``.

    ``confidence`` is the error probability the band was built for; it is
    ``None`` for bands constructed with an explicit half-width.
    """

    ecdf: StepCdf
    delta: float
    k: int
    bound: BoundKind = GENERAL
    confidence: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ParameterError(f"band half-width must lie in [0, 1], got {self.delta}")
        if self.k < 1:
            raise ParameterError("no samples")
        if self.ecdf.infinity_mass != 0:
            raise ParameterError("empirical CDF cannot carry mass at infinity")
        if isinstance(self.bound, Bounded) and self.ecdf.values[-1] > self.bound.upper:
            raise BandError(
                f"bound below observed support: {self.bound.upper:g} < max sample {self.ecdf.values[-1]:g}"
            )

    @classmethod
    def from_samples(
        cls, samples: SampleSet | Iterable[float], delta_conf: float, bound: BoundKind = GENERAL
    ) -> "DkwBand":
        if not isinstance(samples, SampleSet):
            samples = SampleSet(samples)
        return cls(ecdf_from_samples(samples), dkw_delta(samples.k, delta_conf), samples.k, bound, delta_conf)

    @classmethod
    def with_half_width(
        cls, samples: SampleSet | Iterable[float], half_width: float, bound: BoundKind = GENERAL,
        delta_conf: float | None = None,
    ) -> "DkwBand":
        if not isinstance(samples, SampleSet):
            samples = SampleSet(samples)
        return cls(ecdf_from_samples(samples), half_width, samples.k, bound, delta_conf)

    @cached_property
    def lower_env(self) -> StepCdf:
        """CDF of the stochastically smallest variable in the band (mass ``delta`` moved to 0)."""
        e = self.ecdf
        xs = e.values if e.values[0] == 0 else np.concatenate(([0.0], e.values))
        cum = np.minimum(e(xs) + self.delta, 1.0)
        xs, cum = _compact(xs, cum)
        return StepCdf(xs, cum)

    @cached_property
    def upper_env(self) -> StepCdf:
        """CDF of the stochastically largest variable in the band.

        The displaced mass ``delta`` goes to infinity in the general case and
        to ``U`` in the bounded case.
        """
        e = self.ecdf
        xs = e.values
        cum = np.maximum(e.cumulative - self.delta, 0.0)
        if isinstance(self.bound, Bounded):
            u = self.bound.upper
            if u < xs[-1]:
                raise BandError("bound below observed support")
            if u == xs[-1]:
                cum = cum.copy()
                cum[-1] = 1.0
            else:
                xs = np.append(xs, u)
                cum = np.append(cum, 1.0)
        xs, cum = _compact(xs, cum)
        inf_mass = 0.0 if isinstance(self.bound, Bounded) else (1.0 - cum[-1] if cum.size else 1.0)
        return StepCdf(xs, cum, inf_mass)


def band_envelopes(band: DkwBand) -> tuple[StepCdf, StepCdf]:
    """Return ``(lower_env, upper_env)``: the CDFs of the two extreme variables of the band."""
    return band.lower_env, band.upper_env


def mean_of_step_cdf(cdf: StepCdf) -> float:
    if cdf.infinity_mass > 0:
        return math.inf
    return math.fsum(cdf.values * cdf.masses)


def stochastically_dominates(a: StepCdf, b: StepCdf, tol: float = PROB_TOL) -> bool:
    """True iff ``a`` dominates ``b``, i.e. ``b``'s CDF lies above ``a``'s everywhere."""
    xs = np.union1d(a.values, b.values)
    if xs.size == 0:
        return True
    return bool(np.all(b(xs) >= a(xs) - tol))
