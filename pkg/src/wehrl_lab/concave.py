"""Concave test functions on [0, 1], addressable by short string tags.

Tags: ``xlogx`` (-t ln t), ``power:<p>`` (t^p, 0<p<1), ``negpower:<p>``
(-t^p, p>=1), ``pl:<b1,b2,...>`` (sum_i min(t, b_i)) and ``linear`` (t).
"""

from dataclasses import dataclass

import numpy as np

KINDS = ("xlogx", "power", "negpower", "pl", "linear")
_GRID = np.linspace(0.0, 1.0, 1001)


@dataclass(frozen=True)
class ConcaveSpec:
    kind: str
    p: float = None
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown concave function kind {self.kind!r}")
        if self.kind == "power" and not (self.p is not None and 0 < self.p < 1):
            raise ValueError(f"power needs 0 < p < 1, got {self.p!r}")
        if self.kind == "negpower" and not (self.p is not None and self.p >= 1):
            raise ValueError(f"negpower needs p >= 1, got {self.p!r}")
        if self.kind == "pl":
            if not self.breakpoints or any(not 0 < b < 1 for b in self.breakpoints):
                raise ValueError("pl needs breakpoints strictly inside (0, 1)")
            object.__setattr__(self, "breakpoints", tuple(sorted(self.breakpoints)))
        second = np.diff(self(_GRID), 2)
        if second.max() > 1e-12:
            raise ValueError(f"{self.tag} is not concave on [0, 1]")

    @classmethod
    def parse(cls, tag):
        name, _, arg = tag.strip().partition(":")
        if name in ("xlogx", "linear"):
            if arg:
                raise ValueError(f"{name} takes no parameter")
            return cls(name)
        if name in ("power", "negpower"):
            return cls(name, p=float(arg))
        if name == "pl":
            return cls("pl", breakpoints=tuple(float(b) for b in arg.split(",") if b))
        raise ValueError(f"unknown concave function tag {tag!r}")

    @property
    def tag(self):
        if self.kind in ("power", "negpower"):
            return f"{self.kind}:{self.p:g}"
        if self.kind == "pl":
            return "pl:" + ",".join(f"{b:g}" for b in self.breakpoints)
        return self.kind

    def __call__(self, t):
        t = np.clip(np.asarray(t, dtype=float), 0.0, None)
        if self.kind == "xlogx":
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(t > 0, -t * np.log(np.where(t > 0, t, 1.0)), 0.0)
        if self.kind == "power":
            return t ** self.p
        if self.kind == "negpower":
            return -(t ** self.p)
        if self.kind == "pl":
            return sum(np.minimum(t, b) for b in self.breakpoints)
        return t

    def derivative(self, t):
        """f'(t) for t > 0 (one-sided where f has a kink)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "xlogx":
            return -np.log(t) - 1.0
        if self.kind == "power":
            return self.p * t ** (self.p - 1)
        if self.kind == "negpower":
            return -self.p * t ** (self.p - 1)
        if self.kind == "pl":
            return sum((t < b).astype(float) for b in self.breakpoints)
        return np.ones_like(t)

    @property
    def at_zero(self):
        return 0.0

    def __str__(self):
        return self.tag


def as_function(f):
    """Accept a tag string, a ConcaveSpec or any vectorized callable."""
    if isinstance(f, str):
        return ConcaveSpec.parse(f)
    if not callable(f):
        raise TypeError(f"expected a function or tag, got {f!r}")
    return f


def value_at_zero(f):
    return f.at_zero if isinstance(f, ConcaveSpec) else float(np.asarray(f(np.array([0.0])))[0])


STANDARD_FAMILY = tuple(ConcaveSpec.parse(t) for t in ("xlogx", "power:0.5", "negpower:2", "pl:0.1,0.35,0.7"))
