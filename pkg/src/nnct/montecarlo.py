"""Point-pattern generators and the Monte Carlo size/power machinery.

Replications are independent units of work: replication ``i`` of a study
draws from an RNG substream keyed by (seed, stream tag, study parameters,
i), so results are bit-identical for a fixed seed regardless of worker
count or execution order.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import special

from .contingency import ContingencyTable, covariance_model, tabulate_pairs
from .errors import InvalidInputError
from .geometry import LabeledPointSet, _nn_indices
from .numerics import DEFAULT_REL_CUTOFF
from .segregation import (
    OVERALL_FLAVORS,
    QRMode,
    dixon_overall,
    version_I,
    version_II,
    version_III,
)

# Large-n CSR expectations of Q/n and R/n on the unit square (Monte Carlo
# estimates; used by the "asymptotic" flavor of the adjustment).
CSR_Q_PER_POINT = 0.6327860
CSR_R_PER_POINT = 0.6211200

# Sample-size combinations in the fixed 1..12 order used by the long-format
# plot output.
PAPER_COMBOS: tuple[tuple[int, int], ...] = (
    (10, 10), (10, 30), (10, 50), (30, 10), (30, 30), (30, 50),
    (50, 10), (50, 30), (50, 50), (50, 100), (100, 50), (100, 100),
)

QR_MODES = ("observed", "adjusted")

_STREAM_QR = 1
_STREAM_SIZE = 2
_STREAM_POWER = 3
_ALT_CODES = {"segregation": 11, "association": 12}
_CHUNK = 500


@dataclass(frozen=True)
class PatternSpec:
    """Recipe for one random point pattern on (or around) the unit square."""

    kind: str
    n1: int = 0
    n2: int = 0
    s: float | None = None
    r: float | None = None
    base: LabeledPointSet | None = None

    def __post_init__(self):
        if self.kind == "rl_permutation":
            if self.base is None:
                raise InvalidInputError("rl_permutation needs a base point set")
            return
        if self.kind not in ("csr", "segregation", "association"):
            raise InvalidInputError(f"unknown pattern kind {self.kind!r}")
        if self.n1 < 1 or self.n2 < 1:
            raise InvalidInputError("class sizes must be >= 1")
        if self.kind == "segregation" and not (0.0 <= self.s < 1.0):
            raise InvalidInputError(f"segregation offset must be in [0, 1), got {self.s}")
        if self.kind == "association" and not (0.0 < self.r < 1.0):
            raise InvalidInputError(f"association radius must be in (0, 1), got {self.r}")

    @classmethod
    def csr(cls, n1: int, n2: int) -> "PatternSpec":
        return cls(kind="csr", n1=n1, n2=n2)

    @classmethod
    def segregation(cls, n1: int, n2: int, s: float) -> "PatternSpec":
        return cls(kind="segregation", n1=n1, n2=n2, s=float(s))

    @classmethod
    def association(cls, n1: int, n2: int, r: float) -> "PatternSpec":
        return cls(kind="association", n1=n1, n2=n2, r=float(r))

    @classmethod
    def rl_permutation(cls, base: LabeledPointSet) -> "PatternSpec":
        n1, n2 = base.class_sizes
        return cls(kind="rl_permutation", n1=n1, n2=n2, base=base)


def generate(spec: PatternSpec, rng: np.random.Generator) -> LabeledPointSet:
    """Draw one realization of a pattern.

    csr: both classes iid uniform on the unit square.
    segregation: class 1 uniform on (0, 1-s)^2, class 2 on (s, 1)^2.
    association: class 1 uniform; each class-2 point is a uniformly chosen
    class-1 point plus a polar offset with radius ~ U(0, r) and angle
    ~ U(0, 2 pi).  Offsets may land outside the unit square; they are kept
    as generated.
    rl_permutation: the base coordinates with labels uniformly permuted.
    """
    if spec.kind == "rl_permutation":
        return LabeledPointSet(spec.base.points, rng.permutation(spec.base.labels))
    n1, n2 = spec.n1, spec.n2
    labels = np.repeat([1, 2], [n1, n2])
    if spec.kind == "csr":
        return LabeledPointSet(rng.random((n1 + n2, 2)), labels)
    if spec.kind == "segregation":
        width = 1.0 - spec.s
        x = rng.random((n1, 2)) * width
        y = spec.s + rng.random((n2, 2)) * width
        return LabeledPointSet(np.vstack([x, y]), labels)
    # association
    x = rng.random((n1, 2))
    anchor = rng.integers(0, n1, size=n2)
    radius = rng.uniform(0.0, spec.r, size=n2)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n2)
    y = x[anchor] + radius[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])
    return LabeledPointSet(np.vstack([x, y]), labels)


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs shared by the size and power studies.

    ``qr_mode`` controls the adjusted columns of the report: observed (the
    default) lets the engine estimate per-n expectations of Q and R itself;
    an explicit adjusted mode pins them (sensible only when every combo has
    the same total n).  ``adjusted_source`` picks between per-n Monte Carlo
    estimation ("estimate") and the large-n ratios ("asymptotic").
    """

    n_mc: int
    seed: int
    alpha: float = 0.05
    qr_mode: QRMode = field(default_factory=QRMode.observed)
    parallelism: int = 1
    adjusted_source: str = "estimate"
    qr_estimate_nmc: int = 10000

    def __post_init__(self):
        if self.n_mc < 1:
            raise InvalidInputError(f"n_mc must be >= 1, got {self.n_mc}")
        if not (0.0 <= self.alpha < 1.0):
            raise InvalidInputError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.seed < 0:
            raise InvalidInputError("seed must be a nonnegative integer")
        if self.parallelism < 1:
            raise InvalidInputError("parallelism must be >= 1")
        if self.adjusted_source not in ("estimate", "asymptotic"):
            raise InvalidInputError(f"unknown adjusted_source {self.adjusted_source!r}")


@dataclass(frozen=True)
class SizePowerRow:
    n1: int
    n2: int
    combo_index: int | None
    alternative: str | None
    param: float | None
    flavor: str
    qr_mode: str
    q_hat: float | None
    r_hat: float | None
    rejection_rate: float
    mc_se: float
    flag: str


@dataclass(frozen=True)
class SizePowerReport:
    kind: str  # "size" or "power"
    alpha: float
    n_mc: int
    seed: int
    band: tuple[float, float]
    rows: tuple[SizePowerRow, ...]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "n_mc": self.n_mc,
            "seed": self.seed,
            "band": list(self.band),
            "rows": [vars(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    _CSV_FIELDS = (
        "combo_index", "n1", "n2", "alternative", "param", "flavor",
        "qr_mode", "q_hat", "r_hat", "n_mc", "alpha",
        "rejection_rate", "mc_se", "flag",
    )

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self._CSV_FIELDS)
        for r in self.rows:
            w.writerow([
                _blank(r.combo_index), r.n1, r.n2, _blank(r.alternative),
                _blank(r.param), r.flavor, r.qr_mode, _blank(r.q_hat),
                _blank(r.r_hat), self.n_mc, self.alpha,
                repr(r.rejection_rate), repr(r.mc_se), r.flag,
            ])

    def write_plot_csv(self, fh) -> None:
        """Long format keyed by combo index 1..12, one series per
        (flavor, qr mode, alternative parameter)."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["combo_index", "n1", "n2", "series", "alternative",
                    "param", "estimate"])
        for r in self.rows:
            series = f"{r.flavor}:{r.qr_mode}"
            w.writerow([
                _blank(r.combo_index), r.n1, r.n2, series,
                _blank(r.alternative), _blank(r.param), repr(r.rejection_rate),
            ])


def _blank(v):
    return "" if v is None else v


def size_band(alpha: float, n_mc: int) -> tuple[float, float]:
    """Acceptance band for an empirical size estimate at nominal level
    ``alpha``: alpha -/+ z_0.95 * sqrt(alpha (1 - alpha) / n_mc), a
    one-sided normal proportion test in each direction."""
    if not (0.0 <= alpha < 1.0):
        raise InvalidInputError(f"alpha must be in [0, 1), got {alpha}")
    if n_mc < 1:
        raise InvalidInputError(f"n_mc must be >= 1, got {n_mc}")
    z95 = float(special.ndtri(0.95))
    half = z95 * np.sqrt(alpha * (1.0 - alpha) / n_mc)
    return alpha - half, alpha + half


def _band_flag(rate: float, band: tuple[float, float]) -> str:
    if rate < band[0]:
        return "conservative"
    if rate > band[1]:
        return "liberal"
    return "ok"


def _run_chunks(worker, n_mc: int, workers: int) -> list:
    """Run worker(lo, hi) over fixed chunks of the replication range and
    return the parts in chunk order (deterministic reduction)."""
    bounds = [(lo, min(lo + _CHUNK, n_mc)) for lo in range(0, n_mc, _CHUNK)]
    if workers <= 1 or len(bounds) <= 1:
        return [worker(lo, hi) for lo, hi in bounds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, *zip(*bounds)))


# ---------------------------------------------------------------------------
# Q/R estimation under CSR


@dataclass(frozen=True)
class QREstimate:
    n: int
    n_mc: int
    q_over_n: float
    r_over_n: float
    se_q: float
    se_r: float


def _qr_chunk(n: int, seed: int, lo: int, hi: int):
    qs = np.empty(hi - lo)
    rs = np.empty(hi - lo)
    for t, rep in enumerate(range(lo, hi)):
        rng = np.random.default_rng([seed, _STREAM_QR, n, rep])
        nn = _nn_indices(rng.random((n, 2)))
        deg = np.bincount(nn, minlength=n)
        qs[t] = np.sum(deg * (deg - 1)) / n
        rs[t] = np.count_nonzero(nn[nn] == np.arange(n)) / n
    return qs, rs


def estimate_qr(n: int, n_mc: int, seed: int, workers: int = 1) -> QREstimate:
    """Monte Carlo estimate of E[Q/n] and E[R/n] under CSR on the unit
    square, with standard errors.  Bit-reproducible for a fixed seed at any
    worker count."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2, got {n}")
    if n_mc < 1:
        raise InvalidInputError(f"n_mc must be >= 1, got {n_mc}")
    parts = _run_chunks(partial(_qr_chunk, n, seed), n_mc, workers)
    qs = np.concatenate([p[0] for p in parts])
    rs = np.concatenate([p[1] for p in parts])
    se_q = float(qs.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    se_r = float(rs.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    return QREstimate(
        n=n, n_mc=n_mc,
        q_over_n=float(qs.mean()), r_over_n=float(rs.mean()),
        se_q=se_q, se_r=se_r,
    )


# ---------------------------------------------------------------------------
# rejection engine shared by the size and power studies


def _rejection_chunk(kind, param, n1, n2, seed, alpha, q_hat, r_hat, lo, hi):
    """Rejection counts over replications [lo, hi) as a (4 tests, 2 modes)
    integer matrix; modes are observed then adjusted."""
    if kind == "csr":
        spec = PatternSpec.csr(n1, n2)
        entropy = (seed, _STREAM_SIZE, n1, n2)
    else:
        spec = (PatternSpec.segregation(n1, n2, param)
                if kind == "segregation"
                else PatternSpec.association(n1, n2, param))
        entropy = (seed, _STREAM_POWER, _ALT_CODES[kind],
                   int(round(param * 1e9)), n1, n2)
    n = n1 + n2
    rej = np.zeros((4, 2), dtype=np.int64)
    for rep in range(lo, hi):
        rng = np.random.default_rng([*entropy, rep])
        pts = generate(spec, rng)
        nn = _nn_indices(pts.points)
        deg = np.bincount(nn, minlength=n)
        q_obs = float(np.sum(deg * (deg - 1)))
        r_obs = float(np.count_nonzero(nn[nn] == np.arange(n)))
        table = ContingencyTable(tabulate_pairs(pts.labels, nn))
        for m, (q, r) in enumerate(((q_obs, r_obs), (q_hat, r_hat))):
            model = covariance_model(n1, n2, n, q, r)
            pvals = (
                dixon_overall(table, model).p_value,
                version_I(table, model, DEFAULT_REL_CUTOFF).p_value,
                version_II(table, model, DEFAULT_REL_CUTOFF).p_value,
                version_III(table, model, DEFAULT_REL_CUTOFF).p_value,
            )
            for t, pv in enumerate(pvals):
                if pv <= alpha:
                    rej[t, m] += 1
    return rej


def _adjusted_qr(n: int, config: SimulationConfig) -> tuple[float, float]:
    if config.qr_mode.kind == "adjusted":
        return config.qr_mode.q_hat, config.qr_mode.r_hat
    if config.adjusted_source == "asymptotic":
        return CSR_Q_PER_POINT * n, CSR_R_PER_POINT * n
    est = estimate_qr(n, config.qr_estimate_nmc, config.seed,
                      workers=config.parallelism)
    return est.q_over_n * n, est.r_over_n * n


def _combo_index(n1: int, n2: int) -> int | None:
    try:
        return PAPER_COMBOS.index((n1, n2)) + 1
    except ValueError:
        return None


def _study(kind_params, combos, config: SimulationConfig, report_kind: str):
    band = size_band(config.alpha, config.n_mc)
    rows = []
    for alt_kind, param in kind_params:
        for n1, n2 in combos:
            n = n1 + n2
            q_hat, r_hat = _adjusted_qr(n, config)
            worker = partial(
                _rejection_chunk, alt_kind, param, n1, n2,
                config.seed, config.alpha, q_hat, r_hat,
            )
            rej = sum(_run_chunks(worker, config.n_mc, config.parallelism))
            for m, mode in enumerate(QR_MODES):
                for t, flavor in enumerate(OVERALL_FLAVORS):
                    rate = float(rej[t, m]) / config.n_mc
                    se = float(np.sqrt(rate * (1.0 - rate) / config.n_mc))
                    rows.append(SizePowerRow(
                        n1=n1, n2=n2, combo_index=_combo_index(n1, n2),
                        alternative=None if alt_kind == "csr" else alt_kind,
                        param=None if alt_kind == "csr" else param,
                        flavor=flavor, qr_mode=mode,
                        q_hat=q_hat if mode == "adjusted" else None,
                        r_hat=r_hat if mode == "adjusted" else None,
                        rejection_rate=rate, mc_se=se,
                        flag=_band_flag(rate, band),
                    ))
    return SizePowerReport(
        kind=report_kind, alpha=config.alpha, n_mc=config.n_mc,
        seed=config.seed, band=band, rows=tuple(rows),
    )


def empirical_size(combos, config: SimulationConfig) -> SizePowerReport:
    """Null rejection rates under CSR for every combo, all four overall
    tests, observed and adjusted modes."""
    return _study([("csr", 0.0)], combos, config, "size")


def empirical_power(alternatives, combos, config: SimulationConfig) -> SizePowerReport:
    """Rejection rates under segregation/association alternatives.

    ``alternatives`` is a sequence of ("segregation" | "association",
    parameter) pairs; the report has one block per (alternative, combo).
    """
    alts = []
    for kind, param in alternatives:
        if kind not in _ALT_CODES:
            raise InvalidInputError(f"unknown alternative kind {kind!r}")
        alts.append((kind, float(param)))
    if not alts:
        raise InvalidInputError("need at least one alternative")
    return _study(alts, combos, config, "power")
