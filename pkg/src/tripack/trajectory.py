"""Deterministic trajectories and error envelopes for the removal process.

With time scaled as t = i / n^2 the edge density is p = 1 - 6t, a typical
co-degree is y(t) n = p^2 n and the triangle count is q(t) n^3 = p^3 n^3 / 6.
The envelope width is f(t) = c_f0 - c_flog * ln p. All logarithms are natural.

Only the ``i <= i0`` window carries the lower-bound and co-degree guarantees;
outside it (and whenever i0 <= 0, which is the case for every n one can
simulate with the default constants) those checks report ``NOT_APPLICABLE``
rather than passing or failing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

from .graph import GraphState, scan_codegrees


@dataclass(frozen=True)
class TrajectoryParams:
    c_f0: float = 5.0
    c_flog: float = 30.0
    c_qlow: float = 1.0
    c_qup: float = 1.0 / 3.0
    c_i0a: float = 5.0 / 3.0
    c_p0: float = 10.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {value}")
        if self.c_f0 <= 0:
            raise ValueError("c_f0 must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_PARAMS = TrajectoryParams()


class Curves(NamedTuple):
    p: float
    y: float
    q: float
    f: float


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class EnvelopeVerdict:
    q_lower_ok: Verdict
    q_upper_ok: Verdict
    y_ok: Verdict

    def to_dict(self) -> dict:
        return {"q_lower": self.q_lower_ok.value, "q_upper": self.q_upper_ok.value,
                "y": self.y_ok.value}


def ideal_curves(t: float, params: TrajectoryParams = DEFAULT_PARAMS) -> Curves:
    """(p, y, q, f) at scaled time t < 1/6."""
    if not t < 1.0 / 6.0:
        raise ValueError(f"t must be below 1/6, got {t}")
    p = 1.0 - 6.0 * t
    return Curves(p, p * p, p ** 3 / 6.0, params.c_f0 - params.c_flog * math.log(p))


def threshold_p0(n: int, params: TrajectoryParams = DEFAULT_PARAMS) -> float:
    """Density c_p0 * n^(-1/4) * (ln n)^(5/4) below which the guarantees lapse."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    return params.c_p0 * n ** -0.25 * math.log(n) ** 1.25


def horizon_i0(n: int, params: TrajectoryParams = DEFAULT_PARAMS) -> int:
    """floor(n^2/6 - c_i0a * n^(7/4) * (ln n)^(5/4)); may be zero or negative."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    n = int(n)
    if params.c_i0a == 0:
        return n * n // 6
    return math.floor(n * n / 6 - params.c_i0a * n ** 1.75 * math.log(n) ** 1.25)


@dataclass(frozen=True)
class TrajectorySnapshot:
    """State of one run at step i. Continuous quantities are derived on read."""

    n: int
    i: int
    q_actual: int
    edges: int
    min_y: int | None
    max_y: int | None
    verdicts: EnvelopeVerdict | None = field(default=None, compare=False)

    @property
    def t(self) -> float:
        return self.i / (self.n * self.n)

    @property
    def p(self) -> float:
        return 1.0 - 6.0 * self.i / (self.n * self.n)

    @property
    def q_ideal(self) -> float:
        """q(t) n^3."""
        return self.p ** 3 * self.n ** 3 / 6.0

    @property
    def y_ideal(self) -> float:
        """y(t) n."""
        return self.p ** 2 * self.n

    @property
    def max_y_dev(self) -> float:
        if self.min_y is None:
            return 0.0
        target = self.y_ideal
        return max(abs(self.max_y - target), abs(self.min_y - target))

    @property
    def residual(self) -> int:
        """|E(i)| - 3 Q(i), a lower bound on the final edge count."""
        return self.edges - 3 * self.q_actual

    def normalized_y_dev(self) -> float:
        """max |Y - y(t) n| / sqrt(n ln n)."""
        return self.max_y_dev / math.sqrt(self.n * math.log(self.n))

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "t": self.t,
            "p": self.p,
            "Q": self.q_actual,
            "q_ideal_n3": self.q_ideal,
            "edges": self.edges,
            "min_y": self.min_y,
            "max_y": self.max_y,
            "max_y_dev": self.max_y_dev,
            "residual": self.residual,
            "verdicts": self.verdicts.to_dict() if self.verdicts else None,
        }

    @classmethod
    def from_dict(cls, n: int, d: dict) -> "TrajectorySnapshot":
        v = d.get("verdicts")
        verdicts = None
        if v is not None:
            verdicts = EnvelopeVerdict(Verdict(v["q_lower"]), Verdict(v["q_upper"]), Verdict(v["y"]))
        return cls(n, d["i"], d["Q"], d["edges"], d["min_y"], d["max_y"], verdicts)


def _judge(ok: bool) -> Verdict:
    return Verdict.HOLDS if ok else Verdict.VIOLATED


def envelope_check(snapshot: TrajectorySnapshot, n: int,
                   params: TrajectoryParams = DEFAULT_PARAMS,
                   i0: int | None = None) -> EnvelopeVerdict:
    """Judge a snapshot against the three envelopes.

    The upper bound on Q applies at every step. The lower bound on Q and the
    co-degree band apply only while i <= i0, and only when i0 > 0.
    """
    p = snapshot.p
    if p <= 0:
        raise ValueError(f"snapshot density must be positive, got p = {p}")
    q = snapshot.q_actual
    q_ideal = snapshot.q_ideal
    upper = _judge(q <= q_ideal + params.c_qup * n * n * p)

    if n < 2:
        return EnvelopeVerdict(Verdict.NOT_APPLICABLE, upper, Verdict.NOT_APPLICABLE)
    if i0 is None:
        i0 = horizon_i0(n, params)
    if i0 <= 0 or snapshot.i > i0:
        return EnvelopeVerdict(Verdict.NOT_APPLICABLE, upper, Verdict.NOT_APPLICABLE)

    f = ideal_curves(snapshot.t, params).f
    log_n = math.log(n)
    lower = _judge(q >= q_ideal - params.c_qlow * f * f * n * n * log_n / p)
    band = _judge(snapshot.max_y_dev <= f * math.sqrt(n * log_n))
    return EnvelopeVerdict(lower, upper, band)


def take_snapshot(state: GraphState, params: TrajectoryParams = DEFAULT_PARAMS,
                  extremes: tuple[int | None, int | None] | None = None,
                  i0: int | None = None) -> TrajectorySnapshot:
    """Scan all pairs for co-degree extremes and judge the envelopes.

    ``extremes`` lets a caller that already scanned the pairs (see
    ``graph.scan_codegrees``) pass (min_y, max_y) in and skip the O(n^2) pass.
    """
    if extremes is None:
        _, lo, hi, _ = scan_codegrees(state)
    else:
        lo, hi = extremes
    bare = TrajectorySnapshot(state.n, state.i, state.q, state.edge_count, lo, hi)
    verdicts = envelope_check(bare, state.n, params, i0)
    return TrajectorySnapshot(state.n, state.i, state.q, state.edge_count, lo, hi, verdicts)
