"""Decay and growth functions used by certificates.

DecayFn models beta(t) (or alpha(t)): nonincreasing, beta(inf) < 1.
GrowthFn models J(t): nonnegative and nondecreasing.

Both parse from short text specs, which is how the CLI takes them:

    exp:a,b,c        a exp(-b t) + c
    const:c          constant c
    affine:p,q       p + q t           (growth only)
    sat:p,q,r        p (1 - exp(-q t)) + r   (growth only)
    table:t=v;...|L  linear interpolation, last value held; L = declared limit (decay only)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from attractor_lab.errors import ConfigurationError

ArrayLike = Union[float, np.ndarray]


def _finish(result: np.ndarray, scalar: bool) -> ArrayLike:
    return float(result) if scalar else result


def _parse_numbers(body: str, count: int, text: str) -> Tuple[float, ...]:
    try:
        numbers = tuple(float(part) for part in body.split(","))
    except ValueError as e:
        raise ConfigurationError(f"cannot parse '{text}': {e}") from e
    if len(numbers) != count:
        raise ConfigurationError(f"'{text}' needs {count} numbers, got {len(numbers)}")
    return numbers


def _parse_table(body: str, text: str) -> Tuple[Tuple[float, ...], Tuple[float, ...], str]:
    table, _, limit = body.partition("|")
    times, values = [], []
    try:
        for entry in table.split(";"):
            t, _, v = entry.partition("=")
            times.append(float(t))
            values.append(float(v))
    except ValueError as e:
        raise ConfigurationError(f"cannot parse table '{text}': {e}") from e
    return tuple(times), tuple(values), limit


def _check_table(times: Sequence[float], values: Sequence[float]) -> None:
    if len(times) < 1 or len(times) != len(values):
        raise ConfigurationError("table needs matching, nonempty times and values")
    if times[0] != 0:
        raise ConfigurationError(f"table must start at t = 0, got {times[0]}")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigurationError("table times must be strictly increasing")


@dataclass(frozen=True)
class DecayFn:
    """
    Nonincreasing function beta(t) >= 0 with beta(inf) < 1.

    Attributes:
        kind: "exp_floor" or "table"
        a, b, c: Parameters of a exp(-b t) + c
        times, values: Table nodes
        limit: Declared value at infinity for tables
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    times: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    limit: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "exp_floor":
            if self.a < 0 or self.b < 0 or self.c < 0:
                raise ConfigurationError("exp_floor decay needs a, b, c >= 0")
            if self.a > 0 and self.b == 0:
                raise ConfigurationError("exp_floor decay with a > 0 needs b > 0")
            if self.c >= 1:
                raise ConfigurationError(f"decay limit must be < 1, got c={self.c}")
        elif self.kind == "table":
            _check_table(self.times, self.values)
            if any(v < 0 for v in self.values):
                raise ConfigurationError("decay table values must be nonnegative")
            if any(b > a for a, b in zip(self.values, self.values[1:])):
                raise ConfigurationError("decay table values must be nonincreasing")
            if not 0 <= self.limit < 1:
                raise ConfigurationError(f"declared decay limit must lie in [0, 1), got {self.limit}")
            if self.limit > self.values[-1]:
                raise ConfigurationError("declared decay limit exceeds the last table value")
        else:
            raise ConfigurationError(f"unknown decay kind '{self.kind}'")

    @classmethod
    def exp_floor(cls, a: float, b: float, c: float = 0.0) -> "DecayFn":
        return cls("exp_floor", a=float(a), b=float(b), c=float(c))

    @classmethod
    def constant(cls, c: float) -> "DecayFn":
        return cls("exp_floor", a=0.0, b=0.0, c=float(c))

    @classmethod
    def tabulated(cls, times: Sequence[float], values: Sequence[float], limit: float) -> "DecayFn":
        return cls(
            "table",
            times=tuple(float(t) for t in times),
            values=tuple(float(v) for v in values),
            limit=float(limit),
        )

    @classmethod
    def parse(cls, text: str) -> "DecayFn":
        """Parse ``exp:a,b,c``, ``const:c`` or ``table:t=v;...|limit``."""
        kind, _, body = text.strip().partition(":")
        if kind == "exp":
            return cls.exp_floor(*_parse_numbers(body, 3, text))
        if kind == "const":
            return cls.constant(*_parse_numbers(body, 1, text))
        if kind == "table":
            times, values, limit = _parse_table(body, text)
            try:
                declared = float(limit) if limit else values[-1]
            except ValueError as e:
                raise ConfigurationError(f"cannot parse table limit in '{text}': {e}") from e
            return cls.tabulated(times, values, declared)
        raise ConfigurationError(f"unknown decay spec '{text}'")

    def __call__(self, t: ArrayLike) -> ArrayLike:
        arr = np.asarray(t, dtype=float)
        if self.kind == "exp_floor":
            out = self.a * np.exp(-self.b * arr) + self.c
        else:
            out = np.interp(arr, self.times, self.values)
        return _finish(out, arr.ndim == 0)

    @property
    def at_zero(self) -> float:
        return float(self(0.0))

    @property
    def at_infinity(self) -> float:
        return self.c if self.kind == "exp_floor" else self.limit

    @property
    def horizon(self) -> float:
        """Last table time (inf for closed forms)."""
        return self.times[-1] if self.kind == "table" else float("inf")

    def to_dict(self) -> dict:
        if self.kind == "exp_floor":
            return {"kind": self.kind, "a": self.a, "b": self.b, "c": self.c}
        return {"kind": self.kind, "times": list(self.times), "values": list(self.values), "limit": self.limit}

    @classmethod
    def from_dict(cls, data: dict) -> "DecayFn":
        if data["kind"] == "exp_floor":
            return cls.exp_floor(data["a"], data["b"], data["c"])
        return cls.tabulated(data["times"], data["values"], data["limit"])


@dataclass(frozen=True)
class GrowthFn:
    """
    Nonnegative nondecreasing function J(t).

    Attributes:
        kind: "affine", "saturating" or "table"
        p, q, r: Parameters (p + q t, or p (1 - exp(-q t)) + r)
        times, values: Table nodes (last value held beyond the table)
    """

    kind: str
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0
    times: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind in ("affine", "saturating"):
            if self.p < 0 or self.q < 0 or self.r < 0:
                raise ConfigurationError(f"{self.kind} growth needs nonnegative parameters")
        elif self.kind == "table":
            _check_table(self.times, self.values)
            if any(v < 0 for v in self.values):
                raise ConfigurationError("growth table values must be nonnegative")
            if any(b < a for a, b in zip(self.values, self.values[1:])):
                raise ConfigurationError("growth table values must be nondecreasing")
        else:
            raise ConfigurationError(f"unknown growth kind '{self.kind}'")

    @classmethod
    def affine(cls, p: float, q: float = 0.0) -> "GrowthFn":
        return cls("affine", p=float(p), q=float(q))

    @classmethod
    def constant(cls, p: float) -> "GrowthFn":
        return cls.affine(p, 0.0)

    @classmethod
    def saturating(cls, p: float, q: float, r: float = 0.0) -> "GrowthFn":
        return cls("saturating", p=float(p), q=float(q), r=float(r))

    @classmethod
    def tabulated(cls, times: Sequence[float], values: Sequence[float]) -> "GrowthFn":
        return cls("table", times=tuple(float(t) for t in times), values=tuple(float(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "GrowthFn":
        """Parse ``const:c``, ``affine:p,q``, ``sat:p,q,r`` or ``table:t=v;...``."""
        kind, _, body = text.strip().partition(":")
        if kind == "const":
            return cls.constant(*_parse_numbers(body, 1, text))
        if kind == "affine":
            return cls.affine(*_parse_numbers(body, 2, text))
        if kind == "sat":
            return cls.saturating(*_parse_numbers(body, 3, text))
        if kind == "table":
            times, values, _ = _parse_table(body, text)
            return cls.tabulated(times, values)
        raise ConfigurationError(f"unknown growth spec '{text}'")

    def __call__(self, t: ArrayLike) -> ArrayLike:
        arr = np.asarray(t, dtype=float)
        if self.kind == "affine":
            out = self.p + self.q * arr
        elif self.kind == "saturating":
            out = self.p * (1.0 - np.exp(-self.q * arr)) + self.r
        else:
            out = np.interp(arr, self.times, self.values)
        return _finish(out, arr.ndim == 0)

    @property
    def at_infinity(self) -> float:
        if self.kind == "affine":
            return float("inf") if self.q > 0 else self.p
        if self.kind == "saturating":
            return self.p + self.r
        return self.values[-1]

    @property
    def is_zero(self) -> bool:
        return self.at_infinity == 0.0

    def to_dict(self) -> dict:
        if self.kind == "table":
            return {"kind": self.kind, "times": list(self.times), "values": list(self.values)}
        return {"kind": self.kind, "p": self.p, "q": self.q, "r": self.r}

    @classmethod
    def from_dict(cls, data: dict) -> "GrowthFn":
        if data["kind"] == "table":
            return cls.tabulated(data["times"], data["values"])
        return cls(data["kind"], p=data["p"], q=data["q"], r=data["r"])
