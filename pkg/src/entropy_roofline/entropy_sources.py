"""Parametric models of hardware entropy sources with seeded, splittable streams.

Every stream is driven by a counter-based generator: output word ``i`` of a
stream is a pure function of ``(seed, stream_id, i)``, so sequences are
bit-identical across platforms, across block sizes, and across parallel
sweeps.  The mixing function is the SplitMix64 finalizer applied to a keyed
counter (state = key + (i+1) * 0x9E3779B97F4A7C15), i.e. word ``i`` equals
output ``i`` of the canonical SplitMix64 sequence seeded at ``key``.  The
per-stream key folds ``seed`` and ``stream_id`` through the same finalizer.
The exact construction is frozen by golden vectors in the test suite.

Source kinds:

* ``pseudo_uniform``   — uniform doubles in [0, 1) (53-bit mantissa).
* ``thermal_gaussian`` — zero-mean Gaussian voltage noise; sigma given
  directly or derived from sqrt(kT/C).
* ``mismatch_static``  — per-device Gaussian offsets whose sigma follows the
  1/sqrt(area) mismatch law; as a stream, each draw is a fresh device.
* ``stochastic_switch``— Bernoulli(p) switching events, emitted as 0.0/1.0.

Ideal draws are i.i.d.; non-idealities are layered on top as an AR(1)
correlation filter, an additive bias, and a linear drift of the mean
(expressed per million samples).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .distribution_shaping import box_muller
from .errors import DomainError

# Boltzmann constant, J/K (2019 SI exact value).
BOLTZMANN_K = 1.380649e-23

# ------------------------------------------------------------------------
# Counter-based generator core
# ------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15  # SplitMix64 state increment
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_SEED_SALT = 0xBB67AE8584CAA73B  # frac(sqrt(3)), fixed whitening constant

KIND_PSEUDO_UNIFORM = "pseudo_uniform"
KIND_THERMAL_GAUSSIAN = "thermal_gaussian"
KIND_MISMATCH_STATIC = "mismatch_static"
KIND_STOCHASTIC_SWITCH = "stochastic_switch"

SOURCE_KINDS = (
    KIND_PSEUDO_UNIFORM,
    KIND_THERMAL_GAUSSIAN,
    KIND_MISMATCH_STATIC,
    KIND_STOCHASTIC_SWITCH,
)


def _finalize(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit word (pure-Python reference path)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def derive_stream_key(seed: int, stream_id: int) -> int:
    """Fold (seed, stream_id) into a 64-bit stream key.

    The finalizer is a bijection, so at a fixed seed every stream_id maps to
    a distinct key.
    """
    k = _finalize((seed ^ _SEED_SALT) & _MASK64)
    return _finalize((k + stream_id) & _MASK64)


def raw_u64(seed: int, stream_id: int, counter: int) -> int:
    """Output word ``counter`` of stream (seed, stream_id). Pure function."""
    key = derive_stream_key(seed, stream_id)
    return _finalize((key + ((counter + 1) * _GOLDEN)) & _MASK64)


def _raw_block(key: int, start: int, n: int) -> np.ndarray:
    """Vectorized words for counters [start, start + n) of a keyed stream."""
    # uint64 array arithmetic wraps mod 2**64 (C semantics), which is exactly
    # the masking the scalar path does explicitly.
    idx = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    z = np.uint64(key) + idx * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _uniform_block(key: int, start: int, n: int) -> np.ndarray:
    """Uniform doubles in [0, 1) from the top 53 bits of each word."""
    return (_raw_block(key, start, n) >> np.uint64(11)) * (2.0 ** -53)


def _uniform_scalar(key: int, counter: int) -> float:
    """Scalar path of _uniform_block; bit-identical, no array overhead."""
    return (_finalize((key + ((counter + 1) * _GOLDEN)) & _MASK64) >> 11) * 2.0 ** -53


def _normal_block(key: int, start_index: int, n: int) -> np.ndarray:
    """Standard normals; sample ``i`` consumes counters (2i, 2i+1).

    Uses the cosine branch of a Box-Muller pair per sample, so every sample
    index maps to a fixed counter pair and block boundaries cannot shift the
    stream.  u1 is mapped to (0, 1] via u -> 1 - u to dodge log(0).
    """
    u = _uniform_block(key, 2 * start_index, 2 * n)
    u1 = 1.0 - u[0::2]
    u2 = u[1::2]
    z1, _ = box_muller(u1, u2)
    return np.asarray(z1, dtype=np.float64)


# ------------------------------------------------------------------------
# Specs
# ------------------------------------------------------------------------


@dataclass(frozen=True)
class NonidealitySpec:
    """Bias, lag-1 autocorrelation and mean drift layered onto a stream.

    bias:   additive offset in the output unit.
    rho:    AR(1) coefficient in (-1, 1); the injected noise is scaled by
            sqrt(1 - rho^2) so the stationary variance is preserved.
    drift:  mean shift per million samples (aging folded in here too).
    """

    bias: float = 0.0
    rho: float = 0.0
    drift: float = 0.0

    def __post_init__(self) -> None:
        if not (abs(self.rho) < 1.0):
            raise DomainError(f"|rho| must be < 1, got {self.rho!r}")

    @property
    def is_identity(self) -> bool:
        return self.bias == 0.0 and self.rho == 0.0 and self.drift == 0.0


@dataclass(frozen=True)
class SourceSpec:
    """Description of one entropy source; see module docstring for kinds."""

    kind: str
    seed: int = 0
    stream_id: int = 0
    nonideality: NonidealitySpec = field(default_factory=NonidealitySpec)
    # thermal_gaussian: either sigma directly, or temperature+capacitance
    sigma: Optional[float] = None
    temperature: Optional[float] = None
    capacitance: Optional[float] = None
    # mismatch_static
    sigma0: float = 0.0
    area_wl: float = 1.0
    # stochastic_switch
    p: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise DomainError(f"unknown source kind {self.kind!r}")
        if self.kind == KIND_THERMAL_GAUSSIAN:
            if self.sigma is None and (
                self.temperature is None or self.capacitance is None
            ):
                raise DomainError(
                    "thermal_gaussian needs sigma, or temperature and capacitance"
                )
            if self.sigma is not None and self.sigma < 0.0:
                raise DomainError(f"sigma must be >= 0, got {self.sigma!r}")
        if self.kind == KIND_MISMATCH_STATIC:
            if self.sigma0 < 0.0:
                raise DomainError(f"sigma0 must be >= 0, got {self.sigma0!r}")
            if not (self.area_wl > 0.0):
                raise DomainError(f"area_wl must be > 0, got {self.area_wl!r}")
        if self.kind == KIND_STOCHASTIC_SWITCH and not (0.0 <= self.p <= 1.0):
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")

    def ideal_sigma(self) -> float:
        """Standard deviation of the ideal (pre-non-ideality) distribution."""
        if self.kind == KIND_THERMAL_GAUSSIAN:
            if self.sigma is not None:
                return self.sigma
            return thermal_sigma(self.temperature, self.capacitance)
        if self.kind == KIND_MISMATCH_STATIC:
            return pelgrom_sigma(self.sigma0, self.area_wl)
        raise DomainError(f"{self.kind!r} has no Gaussian sigma")

    # -- conveniences -----------------------------------------------------

    @classmethod
    def pseudo_uniform(cls, seed: int = 0, stream_id: int = 0, **kw) -> "SourceSpec":
        return cls(kind=KIND_PSEUDO_UNIFORM, seed=seed, stream_id=stream_id, **kw)

    @classmethod
    def thermal_gaussian(
        cls,
        sigma: Optional[float] = None,
        temperature: Optional[float] = None,
        capacitance: Optional[float] = None,
        seed: int = 0,
        stream_id: int = 0,
        **kw,
    ) -> "SourceSpec":
        return cls(
            kind=KIND_THERMAL_GAUSSIAN,
            sigma=sigma,
            temperature=temperature,
            capacitance=capacitance,
            seed=seed,
            stream_id=stream_id,
            **kw,
        )

    @classmethod
    def mismatch_static(
        cls, sigma0: float, area_wl: float = 1.0, seed: int = 0, stream_id: int = 0, **kw
    ) -> "SourceSpec":
        return cls(
            kind=KIND_MISMATCH_STATIC,
            sigma0=sigma0,
            area_wl=area_wl,
            seed=seed,
            stream_id=stream_id,
            **kw,
        )

    @classmethod
    def stochastic_switch(
        cls, p: float, seed: int = 0, stream_id: int = 0, **kw
    ) -> "SourceSpec":
        return cls(
            kind=KIND_STOCHASTIC_SWITCH, p=p, seed=seed, stream_id=stream_id, **kw
        )


# ------------------------------------------------------------------------
# Device-physics scaling laws
# ------------------------------------------------------------------------


def pelgrom_sigma(sigma0: float, area_wl: float) -> float:
    """Mismatch sigma at device area ``area_wl``: sigma0 / sqrt(area)."""
    if sigma0 < 0.0:
        raise DomainError(f"sigma0 must be >= 0, got {sigma0!r}")
    if not (area_wl > 0.0):
        raise DomainError(f"area_wl must be > 0, got {area_wl!r}")
    return sigma0 / math.sqrt(area_wl)


def thermal_sigma(temperature: float, capacitance: float) -> float:
    """kT/C noise voltage sigma: sqrt(k_B * T / C), volts."""
    if not (temperature > 0.0):
        raise DomainError(f"temperature must be > 0, got {temperature!r}")
    if not (capacitance > 0.0):
        raise DomainError(f"capacitance must be > 0, got {capacitance!r}")
    return math.sqrt(BOLTZMANN_K * temperature / capacitance)


# ------------------------------------------------------------------------
# Non-ideality layering
# ------------------------------------------------------------------------


@dataclass
class NonidealityState:
    """Mutable AR(1)/drift state: previous output and samples emitted."""

    prev: float = 0.0
    t: int = 0


def _apply_nonidealities_block(
    x: np.ndarray, state: NonidealityState, spec: NonidealitySpec
) -> np.ndarray:
    """Vectorized AR(1) + bias + drift over a contiguous block."""
    n = x.shape[0]
    t0 = state.t
    if spec.rho != 0.0:
        c = math.sqrt(1.0 - spec.rho * spec.rho)
        y, zf = lfilter([c], [1.0, -spec.rho], x, zi=[spec.rho * state.prev])
        state.prev = float(y[-1])
    else:
        y = x.astype(np.float64, copy=True)
        state.prev = float(y[-1]) if n else state.prev
    state.t = t0 + n
    if spec.bias != 0.0 or spec.drift != 0.0:
        t = np.arange(t0, t0 + n, dtype=np.float64)
        y = y + spec.bias + spec.drift * (t * 1e-6)
    return y


def apply_nonidealities(
    x_t: float, state: NonidealityState, spec: NonidealitySpec
) -> float:
    """Transform one raw sample; updates ``state`` in place.

    y_t = rho * y_{t-1} + sqrt(1 - rho^2) * x_t, then + bias + drift * t/1e6.
    """
    return float(_apply_nonidealities_block(np.array([x_t]), state, spec)[0])


# ------------------------------------------------------------------------
# Stream handles
# ------------------------------------------------------------------------


class SourceHandle:
    """A running entropy stream.

    Single-owner mutable state (the AR(1)/drift state and the sample index);
    distinct handles may be driven concurrently, one handle may not.
    """

    def __init__(self, spec: SourceSpec):
        self.spec = spec
        self._key = derive_stream_key(spec.seed, spec.stream_id)
        self._index = 0
        self._ni_state = NonidealityState()

    def _ideal_block(self, start: int, n: int) -> np.ndarray:
        spec = self.spec
        if spec.kind == KIND_PSEUDO_UNIFORM:
            return _uniform_block(self._key, start, n)
        if spec.kind == KIND_STOCHASTIC_SWITCH:
            u = _uniform_block(self._key, start, n)
            return (u < spec.p).astype(np.float64)
        # Gaussian kinds: one normal per counter pair
        return spec.ideal_sigma() * _normal_block(self._key, start, n)

    def draw(self, n: int) -> np.ndarray:
        """Next ``n`` samples; draw(a) then draw(b) equals draw(a + b)."""
        if n < 0:
            raise DomainError(f"n must be >= 0, got {n!r}")
        x = self._ideal_block(self._index, n)
        self._index += n
        if self.spec.nonideality.is_identity:
            self._ni_state.prev = float(x[-1]) if n else self._ni_state.prev
            self._ni_state.t += n
            return x
        return _apply_nonidealities_block(x, self._ni_state, self.spec.nonideality)

    @property
    def samples_emitted(self) -> int:
        return self._index


def create_source(spec: SourceSpec) -> SourceHandle:
    """Instantiate a deterministic stream for ``spec``."""
    return SourceHandle(spec)


def next_raw(source: SourceHandle) -> float:
    """One sample from the source (kind-specific unit)."""
    return float(source.draw(1)[0])


class EntropyStream:
    """Mixed-type deterministic draw stream for memory-array sampling.

    Uniform draws consume one counter, normal draws consume two (a
    Box-Muller pair, cosine branch).  The cursor is exposed so callers can
    snapshot/replay the stream state.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0):
        self.seed = seed
        self.stream_id = stream_id
        self._key = derive_stream_key(seed, stream_id)
        self._pos = 0

    @property
    def position(self) -> int:
        return self._pos

    @position.setter
    def position(self, value: int) -> None:
        if value < 0:
            raise DomainError(f"position must be >= 0, got {value!r}")
        self._pos = value

    def next_uniform(self) -> float:
        u = _uniform_scalar(self._key, self._pos)
        self._pos += 1
        return u

    def next_normal(self) -> float:
        u1 = 1.0 - _uniform_scalar(self._key, self._pos)
        u2 = _uniform_scalar(self._key, self._pos + 1)
        self._pos += 2
        z1, _ = box_muller(u1, u2)
        return z1

    def next_bit(self, p: float) -> int:
        if not (0.0 <= p <= 1.0):
            raise DomainError(f"p must lie in [0, 1], got {p!r}")
        return 1 if self.next_uniform() < p else 0


# ------------------------------------------------------------------------
# Static mismatch arrays
# ------------------------------------------------------------------------


@dataclass(frozen=True)
class MismatchArray:
    """Fixed per-cell offsets of a device array (drawn once, then frozen)."""

    rows: int
    cols: int
    offsets: np.ndarray

    def __post_init__(self) -> None:
        self.offsets.setflags(write=False)


def mismatch_array(spec: SourceSpec, rows: int, cols: int) -> MismatchArray:
    """Draw the static offset map of a rows x cols device array.

    Offsets are i.i.d. Gaussian with sigma = sigma0 / sqrt(area_wl); the
    same spec always yields the same array (cells are re-derivable from
    their linear index).  Spatial correlation is out of scope: cells are
    independent.
    """
    if spec.kind != KIND_MISMATCH_STATIC:
        raise DomainError(f"mismatch_array needs a mismatch_static spec, got {spec.kind!r}")
    if rows < 1 or cols < 1:
        raise DomainError(f"rows and cols must be >= 1, got {rows!r} x {cols!r}")
    key = derive_stream_key(spec.seed, spec.stream_id)
    sigma = pelgrom_sigma(spec.sigma0, spec.area_wl)
    flat = sigma * _normal_block(key, 0, rows * cols)
    return MismatchArray(rows=rows, cols=cols, offsets=flat.reshape(rows, cols))
