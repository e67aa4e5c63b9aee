"""Separable variance profiles ``E|Y_ij|^2 = d_i * d_tilde_j``.

A profile is stored through the diagonals of the receive-side matrix ``D``
(length ``big_n``) and the transmit-side matrix ``D_tilde`` (length ``n``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParams, ProfileError, RejectNegativeEntry, RejectZeroTrace, UnknownKind

KINDS = ("constant", "linear-ramp", "exponential-decay")


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class VarianceProfile:
    d: np.ndarray
    d_tilde: np.ndarray
    d_max: Optional[float] = None
    d_tilde_max: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "d", _frozen_array(self.d))
        object.__setattr__(self, "d_tilde", _frozen_array(self.d_tilde))

    @property
    def big_n(self) -> int:
        return self.d.size

    @property
    def n(self) -> int:
        return self.d_tilde.size

    @property
    def c(self) -> float:
        return self.big_n / self.n

    @property
    def bound_d(self) -> float:
        """Declared ``d_max``, or the largest entry of ``d`` when none is declared."""
        return float(self.d.max()) if self.d_max is None else float(self.d_max)

    @property
    def bound_d_tilde(self) -> float:
        return float(self.d_tilde.max()) if self.d_tilde_max is None else float(self.d_tilde_max)

    @property
    def trace_d(self) -> float:
        """Normalized trace ``(1/n) tr D`` (normalized by ``n``, not ``N``)."""
        return float(self.d.sum()) / self.n

    @property
    def trace_d_tilde(self) -> float:
        return float(self.d_tilde.sum()) / self.n

    def is_constant(self) -> bool:
        return bool(np.all(self.d == self.d[0]) and np.all(self.d_tilde == self.d_tilde[0]))

    def to_dict(self) -> dict:
        out = {"n": self.n, "N": self.big_n, "d": self.d.tolist(), "d_tilde": self.d_tilde.tolist()}
        if self.d_max is not None:
            out["d_max"] = self.d_max
        if self.d_tilde_max is not None:
            out["d_tilde_max"] = self.d_tilde_max
        return out

    def __eq__(self, other):
        if not isinstance(other, VarianceProfile):
            return NotImplemented
        return (
            np.array_equal(self.d, other.d)
            and np.array_equal(self.d_tilde, other.d_tilde)
            and self.d_max == other.d_max
            and self.d_tilde_max == other.d_tilde_max
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ValidatedProfile(VarianceProfile):
    """A profile that passed :func:`validate`. Immutable."""

    validated: bool = field(default=True, repr=False)


def validate(profile: VarianceProfile) -> ValidatedProfile:
    """Check the per-instance consequences of the boundedness and trace assumptions.

    Raises
    ------
    RejectNegativeEntry
        If any entry of ``d`` or ``d_tilde`` is negative (or not finite).
    RejectZeroTrace
        If either normalized trace vanishes.
    ProfileError
        For empty vectors, or entries above a declared maximum.
    """
    if isinstance(profile, ValidatedProfile):
        return profile
    d, dt = profile.d, profile.d_tilde
    if d.size == 0 or dt.size == 0:
        raise ProfileError("d and d_tilde must be non-empty")
    for name, vec in (("d", d), ("d_tilde", dt)):
        if not np.all(np.isfinite(vec)):
            raise RejectNegativeEntry(f"{name} has non-finite entries")
        if np.any(vec < 0):
            raise RejectNegativeEntry(f"{name} has negative entries (min {vec.min()!r})")
    if d.sum() <= 0:
        raise RejectZeroTrace("normalized trace of D is zero")
    if dt.sum() <= 0:
        raise RejectZeroTrace("normalized trace of D_tilde is zero")
    if profile.d_max is not None and d.max() > profile.d_max:
        raise ProfileError(f"max(d) = {d.max()} exceeds declared d_max = {profile.d_max}")
    if profile.d_tilde_max is not None and dt.max() > profile.d_tilde_max:
        raise ProfileError(
            f"max(d_tilde) = {dt.max()} exceeds declared d_tilde_max = {profile.d_tilde_max}"
        )
    return ValidatedProfile(d, dt, profile.d_max, profile.d_tilde_max)


def _family(kind: str, size: int, params: Sequence[float]) -> np.ndarray:
    if kind == "constant":
        if len(params) != 1:
            raise InvalidParams("constant takes one parameter c0")
        (c0,) = params
        if c0 < 0:
            raise InvalidParams(f"constant level must be >= 0, got {c0}")
        return np.full(size, float(c0))
    if kind == "linear-ramp":
        if len(params) != 2:
            raise InvalidParams("linear-ramp takes two parameters lo, hi")
        lo, hi = params
        if lo < 0 or hi < 0:
            raise InvalidParams(f"linear-ramp endpoints must be >= 0, got {lo}, {hi}")
        if size == 1:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, size)
    if kind == "exponential-decay":
        if len(params) != 1:
            raise InvalidParams("exponential-decay takes one parameter base")
        (base,) = params
        if base <= 0:
            raise InvalidParams(f"exponential-decay base must be > 0, got {base}")
        return float(base) ** np.arange(size, dtype=float)
    raise UnknownKind(f"unknown profile kind {kind!r}; expected one of {KINDS}")


def generate(kind: str, big_n: int, n: int, params: Sequence[float] = ()) -> VarianceProfile:
    """Build a deterministic profile; both sides follow the same family.

    >>> generate("linear-ramp", 3, 1, (0.5, 1.5)).d.tolist()
    [0.5, 1.0, 1.5]
    """
    if big_n < 1 or n < 1:
        raise InvalidParams(f"dimensions must be >= 1, got N={big_n}, n={n}")
    params = tuple(float(p) for p in params)
    return VarianceProfile(_family(kind, big_n, params), _family(kind, n, params))


def family_trace(kind: str, size: int, params: Sequence[float]) -> float:
    """Closed-form sum of a generated family vector of length ``size``."""
    params = tuple(float(p) for p in params)
    if kind == "constant":
        return size * params[0]
    if kind == "linear-ramp":
        lo, hi = params
        return size * 0.5 * (lo + hi)
    if kind == "exponential-decay":
        (base,) = params
        if base == 1.0:
            return float(size)
        return (1.0 - base**size) / (1.0 - base)
    raise UnknownKind(kind)


def parse_generator(spec: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``"kind:p1,p2"`` as used by ``--generate``."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind not in KINDS:
        raise UnknownKind(f"unknown profile kind {kind!r}; expected one of {KINDS}")
    try:
        params = tuple(float(p) for p in rest.split(",") if p.strip())
    except ValueError as exc:
        raise InvalidParams(f"bad parameters in {spec!r}") from exc
    return kind, params


def from_dict(data: dict) -> VarianceProfile:
    try:
        d, dt = data["d"], data["d_tilde"]
    except KeyError as exc:
        raise ProfileError(f"profile document is missing field {exc.args[0]!r}") from None
    profile = VarianceProfile(d, dt, data.get("d_max"), data.get("d_tilde_max"))
    if "N" in data and int(data["N"]) != profile.big_n:
        raise ProfileError(f"N = {data['N']} but len(d) = {profile.big_n}")
    if "n" in data and int(data["n"]) != profile.n:
        raise ProfileError(f"n = {data['n']} but len(d_tilde) = {profile.n}")
    return profile


def load(path) -> VarianceProfile:
    with open(path) as fh:
        return from_dict(json.load(fh))


def save(profile: VarianceProfile, path) -> None:
    # repr-based float serialization in json round-trips exactly
    Path(path).write_text(json.dumps(profile.to_dict(), indent=2) + "\n")
