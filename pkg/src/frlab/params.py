"""Exponent/weight frames and operator parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

INF = math.inf


def conjugate(p: float) -> float:
    """Hoelder conjugate: 1/p + 1/p' = 1."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


class ExponentVec(NamedTuple):
    p1: float
    p2: float

    @property
    def plus(self) -> float:
        return max(self)

    @property
    def minus(self) -> float:
        return min(self)

    def conjugate(self) -> ExponentVec:
        return ExponentVec(conjugate(self.p1), conjugate(self.p2))

    def validate(self) -> None:
        for p in self:
            if not p >= 1:
                raise ValueError(f"exponents must lie in [1, inf], got {tuple(self)}")


class WeightVec(NamedTuple):
    a1: float
    a2: float

    def validate(self) -> None:
        for a in self:
            if not a > -1:
                raise ValueError(f"weights must exceed -1, got {tuple(self)}")


@dataclass(frozen=True)
class Setting:
    n: int
    p: ExponentVec
    q: ExponentVec
    alpha: WeightVec
    beta: WeightVec

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "p", ExponentVec(*map(float, self.p)))
        object.__setattr__(self, "q", ExponentVec(*map(float, self.q)))
        object.__setattr__(self, "alpha", WeightVec(*map(float, self.alpha)))
        object.__setattr__(self, "beta", WeightVec(*map(float, self.beta)))
        self.p.validate()
        self.q.validate()
        self.alpha.validate()
        self.beta.validate()

    @property
    def same_weights(self) -> bool:
        return tuple(self.alpha) == tuple(self.beta)

    def finite(self) -> bool:
        return not any(math.isinf(x) for x in (*self.p, *self.q))

    def lam(self, i: int) -> float:
        """(n+1+beta_i)/q_i - (n+1+alpha_i)/p_i."""
        n = self.n
        return (n + 1 + self.beta[i]) / self.q[i] - (n + 1 + self.alpha[i]) / self.p[i]

    def dual(self) -> Setting:
        """The frame of the adjoint operator: (q', p', beta, alpha)."""
        return Setting(self.n, self.q.conjugate(), self.p.conjugate(), self.beta, self.alpha)

    def to_dict(self) -> dict:
        return {"n": self.n, "p": list(self.p), "q": list(self.q),
                "alpha": list(self.alpha), "beta": list(self.beta)}


@dataclass(frozen=True)
class FRParams:
    a: tuple[float, float]
    b: tuple[float, float]
    c: tuple[float, float]

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != 2:
                raise ValueError(f"{name} must be a pair")
            object.__setattr__(self, name, v)

    def adjoint(self, setting: Setting) -> FRParams:
        """Parameters read off the adjoint kernel: (b - alpha, a + beta, c)."""
        return FRParams(
            tuple(b - al for b, al in zip(self.b, setting.alpha)),
            tuple(a + be for a, be in zip(self.a, setting.beta)),
            self.c,
        )

    def to_dict(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "c": list(self.c)}


@dataclass(frozen=True)
class DistParams:
    base: FRParams
    d: tuple[float, float] = (0.0, 0.0)
    eps: float = 0.1

    def __post_init__(self):
        d = tuple(float(x) for x in self.d)
        if any(x < 0 for x in d):
            raise ValueError("distance exponents must be >= 0")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "d", d)
