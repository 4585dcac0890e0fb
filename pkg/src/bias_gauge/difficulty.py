"""Inductive bias complexity of tasks from their summary parameters.

The central quantity is

    I ~ (2 d z E - n d) * (log b + 1/2 log z + log d + log K
                           - (1/m) log n - log(eps/L) + log c)

with K, E the mode index and eigenfunction count for the cutoff
M = 2*pi*r/delta on an m-sphere, and c the hypercube transport constant.
Classification tasks set z = d. All terms are natural logs; bits appear only
in rendered reports.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Union

from . import spectral
from .numerics import LogScalar, log_binomial, log_sum, log_to_bits
from .transport import log_transport_constant

KINDS = ("classification", "general", "rl_cube")

DECISIONS = {
    "log_base": "natural log internally; bits = nats / ln 2",
    "eps_convention": "eps/L_loss is set to the error rate itself",
    "negative_dominant": "n d >= 2 d z E clamps the result to 0 (data sufficient)",
    "nonpositive_bracket": "a nonpositive log-ratio bracket clamps the result to 0",
    "ground_cost": "Euclidean chordal distance",
}


class SpecError(ValueError):
    """Invalid task specification."""


class ResolutionError(ValueError):
    """The resolution is coarser than the manifold (K = 0)."""


Magnitude = Union[float, int, LogScalar]


def _ln(x: Magnitude) -> float:
    if isinstance(x, LogScalar):
        if x.sign <= 0:
            raise SpecError("magnitude must be positive")
        return x.ln_mag
    if x <= 0:
        raise SpecError("magnitude must be positive")
    return math.log(x)


def _mag_json(x: Magnitude):
    if isinstance(x, LogScalar):
        return x.to_json()
    return x


def _mag_from_json(x) -> Magnitude:
    if isinstance(x, dict):
        return LogScalar.from_json(x)
    return x


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    m: int
    n: Magnitude
    d: Magnitude
    z: Magnitude
    r: float
    delta: float
    b: float
    eps_over_L: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown kind {self.kind!r}")
        if int(self.m) != self.m or self.m < 1:
            raise SpecError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        for name in ("r", "delta", "b", "eps_over_L"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise SpecError(f"{name} must be a positive finite number, got {v!r}")
        for name in ("n", "d", "z"):
            try:
                _ln(getattr(self, name))
            except (SpecError, TypeError) as exc:
                raise SpecError(f"{name} must be positive") from exc
        if self.kind == "classification" and abs(_ln(self.z) - _ln(self.d)) > 1e-12:
            raise SpecError("classification tasks require z = d")

    @classmethod
    def classification(cls, m, n, d, r, delta, b=1.0, eps_over_L=0.01) -> "TaskSpec":
        return cls("classification", m, n, d, d, r, delta, b, eps_over_L)

    @property
    def ln_n(self) -> float:
        return _ln(self.n)

    @property
    def ln_d(self) -> float:
        return _ln(self.d)

    @property
    def ln_z(self) -> float:
        return _ln(self.z)

    def with_(self, **changes) -> "TaskSpec":
        return replace(self, **changes)

    def to_json(self) -> dict:
        out = asdict(self)
        for name in ("n", "d", "z"):
            out[name] = _mag_json(getattr(self, name))
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TaskSpec":
        obj = dict(obj)
        obj.setdefault("kind", "classification")
        if obj["kind"] == "classification":
            obj.setdefault("z", obj.get("d"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise SpecError(f"unknown TaskSpec fields: {sorted(unknown)}")
        missing = known - set(obj)
        if missing:
            raise SpecError(f"missing TaskSpec fields: {sorted(missing)}")
        for name in ("n", "d", "z"):
            obj[name] = _mag_from_json(obj[name])
        return cls(**obj)


@dataclass(frozen=True)
class InnerTask:
    z_g: int
    d_g: int
    m_g: int
    r_g: float
    delta_g: float
    b_g: float = 1.0


@dataclass(frozen=True)
class MetaTaskSpec:
    ways: int
    shots_per_letter: int
    alphabet_sizes: tuple
    inner: InnerTask
    m1: int
    eps_over_L: float

    def __post_init__(self):
        object.__setattr__(self, "alphabet_sizes", tuple(int(a) for a in self.alphabet_sizes))
        if self.ways < 1 or self.shots_per_letter < 1 or not self.alphabet_sizes:
            raise SpecError("ways, shots and alphabets must be positive")
        if any(a < 1 for a in self.alphabet_sizes):
            raise SpecError("alphabet sizes must be positive")
        if self.m1 < self.inner.m_g:
            raise SpecError("the whole-dataset dimension m1 must be >= the per-alphabet m_g")
        if self.inner.d_g < 1 or self.inner.z_g < 1:
            raise SpecError("inner task must have positive output dimension and submanifold count")
        if not self.eps_over_L > 0:
            raise SpecError("eps_over_L must be positive")

    @classmethod
    def omniglot(cls, m0: int, m1: int, r_g: float, delta_g: float, alphabet_sizes,
                 ways: int = 20, shots: int = 20, eps_over_L: float = 0.01) -> "MetaTaskSpec":
        inner = InnerTask(z_g=ways, d_g=ways - 1, m_g=m0, r_g=r_g, delta_g=delta_g, b_g=1.0)
        return cls(ways, shots, tuple(alphabet_sizes), inner, m1, eps_over_L)

    def to_json(self) -> dict:
        out = asdict(self)
        out["alphabet_sizes"] = list(self.alphabet_sizes)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MetaTaskSpec":
        obj = dict(obj)
        try:
            obj["inner"] = InnerTask(**obj["inner"])
            return cls(**obj)
        except TypeError as exc:
            raise SpecError(str(exc)) from exc


@dataclass
class DifficultyReport:
    dominant_dim: LogScalar
    bracket_terms: dict
    total_nats: LogScalar
    total_bits: LogScalar
    data_sufficient: bool
    metadata: dict = field(default_factory=dict)

    @property
    def log10_bits(self) -> float:
        return self.total_bits.log10()

    def to_json(self) -> dict:
        return {
            "dominant_dim": self.dominant_dim.to_json(),
            "bracket_terms": dict(self.bracket_terms),
            "total_nats": self.total_nats.to_json(),
            "total_bits": self.total_bits.to_json(),
            "total_bits_sci": self.total_bits.scientific(),
            "data_sufficient": self.data_sufficient,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DifficultyReport":
        return cls(
            dominant_dim=LogScalar.from_json(obj["dominant_dim"]),
            bracket_terms=dict(obj["bracket_terms"]),
            total_nats=LogScalar.from_json(obj["total_nats"]),
            total_bits=LogScalar.from_json(obj["total_bits"]),
            data_sufficient=bool(obj["data_sufficient"]),
            metadata=obj.get("metadata", {}),
        )

    def table(self) -> str:
        width = max(len(k) for k in self.bracket_terms) + 2
        lines = [f"{'term':<{width}}nats"]
        for name, value in self.bracket_terms.items():
            lines.append(f"{name:<{width}}{value:.6g}")
        lines.append(f"{'bracket_sum':<{width}}{sum(self.bracket_terms.values()):.6g}")
        lines.append(f"{'dominant_dim':<{width}}{self.dominant_dim.scientific()}")
        lines.append(f"{'total_nats':<{width}}{self.total_nats.scientific()}")
        lines.append(f"{'total_bits':<{width}}{self.total_bits.scientific()}")
        if self.data_sufficient:
            lines.append("data_sufficient: training data pins the hypothesis space")
        return "\n".join(lines)


def _assemble(dominant: LogScalar, terms: dict, metadata: dict) -> DifficultyReport:
    bracket = math.fsum(terms.values())
    flags = list(metadata.get("flags", []))
    data_sufficient = dominant.sign <= 0
    if data_sufficient:
        total = LogScalar.zero()
        flags.append("data_sufficient")
    elif bracket <= 0:
        total = LogScalar.zero()
        flags.append("nonpositive_bracket")
    else:
        total = dominant * LogScalar.from_float(bracket)
    metadata = dict(metadata, flags=flags, bracket_sum=bracket, decisions=DECISIONS)
    return DifficultyReport(
        dominant_dim=dominant,
        bracket_terms=terms,
        total_nats=total,
        total_bits=log_to_bits(total),
        data_sufficient=data_sufficient,
        metadata=metadata,
    )


def difficulty_general(spec: TaskSpec) -> DifficultyReport:
    """Difficulty of a task on z spheres with d-dimensional output."""
    if spec.kind == "rl_cube":
        if abs(spec.ln_z) > 1e-12 or abs(spec.b - math.sqrt(_to_float(spec.d))) > 1e-12 * spec.b:
            raise SpecError("rl_cube specs require z = 1 and b = sqrt(d)")
        return difficulty_rl(spec.m, spec.delta, spec.n, spec.d, spec.eps_over_L)
    m = spec.m
    M = spectral.cutoff(spec.r, spec.delta)
    K = spectral.max_mode(M, m)
    if K == 0:
        raise ResolutionError(
            f"resolution coarser than manifold: M={M:.4g} < sqrt(m)={math.sqrt(m):.4g}, so K = 0"
        )
    E = spectral.eigen_count(K, m)
    ln_n, ln_d, ln_z = spec.ln_n, spec.ln_d, spec.ln_z

    hyp_dim = LogScalar(1, math.log(2.0) + ln_d + ln_z + E.ln_mag)
    constrained = LogScalar(1, ln_n + ln_d)
    dominant = hyp_dim - constrained

    terms = {
        "log_b": math.log(spec.b),
        "half_log_z": 0.5 * ln_z,
        "log_d": ln_d,
        "log_K": math.log(K),
        "neg_log_n_over_m": -ln_n / m,
        "neg_log_eps_over_L": -math.log(spec.eps_over_L),
        "log_c": log_transport_constant(m) + ln_z / m,
    }
    metadata = {
        "spec": spec.to_json(),
        "M": M,
        "K": K,
        "E": E.to_json(),
        "log10_E": E.log10(),
    }
    return _assemble(dominant, terms, metadata)


def _to_float(x: Magnitude) -> float:
    return x.to_float() if isinstance(x, LogScalar) else float(x)


def difficulty_rl(m: int, delta: float, n: Magnitude, d: Magnitude, eps_over_L: float) -> DifficultyReport:
    """Difficulty of a control task whose observations fill the cube [-pi, pi]^m.

    Output bound b = sqrt(d) and a single submanifold are built in.
    """
    if m < 1 or delta <= 0 or eps_over_L <= 0:
        raise SpecError("m, delta and eps_over_L must be positive")
    ln_n, ln_d = _ln(n), _ln(d)
    E = spectral.euclidean_mode_count(m, delta)
    hyp_dim = LogScalar(1, math.log(2.0) + E.ln_mag + ln_d)
    dominant = hyp_dim - LogScalar(1, ln_n + ln_d)
    terms = {
        "log_4pi2_over_sqrt6": math.log(4.0 * math.pi ** 2 / math.sqrt(6.0)),
        "log_d": ln_d,
        "half_log_m": 0.5 * math.log(m),
        "neg_log_delta": -math.log(delta),
        "neg_log_n_over_m": -ln_n / m,
        "neg_log_eps_over_L": -math.log(eps_over_L),
    }
    spec = TaskSpec("rl_cube", m, n, d, 1, math.pi, delta, math.exp(0.5 * ln_d) if ln_d < 700 else 1.0,
                    eps_over_L)
    metadata = {"spec": spec.to_json(), "E": E.to_json(), "log10_E": E.log10()}
    return _assemble(dominant, terms, metadata)


# -- meta-learning ------------------------------------------------------------------

def meta_outer_spec(spec: MetaTaskSpec) -> TaskSpec:
    """Outer task of a few-shot problem: datasets in, inner-classifier parameters out."""
    g = spec.inner
    W, s = spec.ways, spec.shots_per_letter
    if g.d_g < 1:
        raise SpecError("inner output dimension d_g must be >= 1")
    M_g = spectral.cutoff(g.r_g, g.delta_g)
    K_g = spectral.max_mode(M_g, g.m_g)
    E_g = spectral.eigen_count(K_g, g.m_g)
    d_f = LogScalar(1, math.log(2.0 * g.z_g * g.d_g) + E_g.ln_mag)
    ln_n = log_sum(log_binomial(max(a, W), W) for a in spec.alphabet_sizes).ln_mag + W * math.log(s)
    m_f = int(spec.m1 + (W - 1) * g.m_g)
    return TaskSpec(
        kind="general",
        m=m_f,
        n=LogScalar(1, ln_n),
        d=d_f,
        z=1,
        r=g.r_g * math.sqrt(W),
        delta=g.delta_g,
        b=g.b_g * math.sqrt(g.z_g * g.d_g),
        eps_over_L=spec.eps_over_L,
    )


def difficulty_meta(spec: MetaTaskSpec) -> DifficultyReport:
    outer = meta_outer_spec(spec)
    report = difficulty_general(outer)
    report.metadata["meta_spec"] = spec.to_json()
    return report


# -- combinations ----------------------------------------------------------------------

@dataclass
class CombineResult:
    lower: LogScalar
    upper: LogScalar
    i1_aug: DifficultyReport
    i2_aug: DifficultyReport
    lower_gap_nats: float  # log(1 + exp(-|I1' - I2'|)), subtracted from min(I1', I2')

    def to_json(self) -> dict:
        return {
            "lower_nats": self.lower.to_json(),
            "upper_nats": self.upper.to_json(),
            "lower_bits_sci": log_to_bits(self.lower).scientific(),
            "upper_bits_sci": log_to_bits(self.upper).scientific(),
            "lower_gap_nats": self.lower_gap_nats,
            "i1_aug": self.i1_aug.to_json(),
            "i2_aug": self.i2_aug.to_json(),
        }


def augment_with_distractor(task: TaskSpec, other: TaskSpec) -> TaskSpec:
    """Task ``task`` with the inputs of ``other`` appended as an irrelevant distractor."""
    return TaskSpec(
        kind="general",
        m=task.m + other.m,
        n=LogScalar(1, task.ln_n + other.ln_n),
        d=task.d,
        z=LogScalar(1, task.ln_z + other.ln_z),
        r=math.hypot(task.r, other.r),
        delta=task.delta,
        b=math.hypot(task.b, other.b),
        eps_over_L=task.eps_over_L,
    )


def combine(a: TaskSpec, b: TaskSpec) -> CombineResult:
    """Lower and upper bounds (nats) on the difficulty of solving both tasks jointly."""
    r1 = difficulty_general(augment_with_distractor(a, b))
    r2 = difficulty_general(augment_with_distractor(b, a))
    i1, i2 = r1.total_nats, r2.total_nats
    upper = i1 + i2
    diff = i1 - i2
    gap_mag = diff.to_float() if diff.ln_mag < 700 else math.inf
    gap = math.log1p(math.exp(-abs(gap_mag)))
    low = i1 if i1.ln_mag <= i2.ln_mag else i2
    lower = low - LogScalar.from_float(gap) if gap > 0 else low
    return CombineResult(lower=lower, upper=upper, i1_aug=r1, i2_aug=r2, lower_gap_nats=gap)


# -- models and sweeps -------------------------------------------------------------------

def model_information(spec: TaskSpec, test_error_rate: float) -> LogScalar:
    """Bits of inductive bias needed to reach a model's test error rate."""
    if not 0.0 < test_error_rate < 1.0:
        raise SpecError("test error rate must lie in (0, 1)")
    return difficulty_general(spec.with_(eps_over_L=test_error_rate)).total_bits


def rank_models(spec: TaskSpec, models) -> list:
    """``models`` is an iterable of (name, error_rate); returns rows sorted by information, largest first.

    Rows that fail carry an ``error`` string and sort last.
    """
    rows = []
    for name, err in models:
        try:
            bits = model_information(spec, float(err))
            rows.append({"name": name, "error_rate": float(err), "bits": bits, "error": None})
        except ValueError as exc:
            rows.append({"name": name, "error_rate": err, "bits": None, "error": str(exc)})
    ok = sorted((r for r in rows if r["bits"] is not None), key=lambda r: -r["bits"].ln_mag)
    return ok + [r for r in rows if r["bits"] is None]


SWEEP_PARAMS = ("n", "eps_over_L", "m", "d", "delta")


def sweep(spec: TaskSpec, param: str, values) -> list:
    """Evaluate the difficulty over ``values`` of one parameter, holding the rest fixed.

    Returns ``(value, report_or_None, error_or_None)`` rows.
    """
    if param not in SWEEP_PARAMS:
        raise SpecError(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")
    rows = []
    for v in values:
        try:
            changes = {param: v}
            if param == "d" and spec.kind == "classification":
                changes["z"] = v
            rows.append((v, difficulty_general(spec.with_(**changes)), None))
        except ValueError as exc:
            rows.append((v, None, str(exc)))
    return rows


def sweep_csv(rows, param: str) -> str:
    lines = [f"{param},log10_bits,bits_sci,data_sufficient,error"]
    for v, rep, err in rows:
        if rep is None:
            lines.append(f"{v},,,,{json.dumps(err)}")
        else:
            l10 = rep.log10_bits
            l10s = "" if rep.total_bits.is_zero else repr(l10)
            lines.append(f"{v},{l10s},{rep.total_bits.scientific()},{str(rep.data_sufficient).lower()},")
    return "\n".join(lines) + "\n"
