"""The xyz interaction search and its parameter selection.

Each repetition draws M rows (uniformly, or proportionally to ``|y_i|`` for a
real response), reduces every column of X and of ``Z = sgn(y) * X`` to an
M-bit key, collects equal-key pairs by sorting, and keeps the candidates whose
exact strength reaches the threshold.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bitmatrix import (
    PackedMatrix,
    WeightedSampler,
    build_z,
    interaction_strengths,
    sign_transform,
    unbiased_transform_sample,
)
from .pairs import CandidateBudgetExceeded, InteractionHit, equal_pairs, filter_strong
from .projection import MAX_M, SubsampleDraw, draw_subsample, project_keys

logger = logging.getLogger(__name__)

MODES = ("binary", "continuous-y", "continuous-xy")
TRANSFORMS = ("sign", "unbiased")

# cap on n * (pairs per chunk) for dense strength evaluation
_DENSE_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class SearchConfig:
    M: int
    L: int
    gamma: float
    mode: str = "binary"
    transform: str | None = None
    search_negatives: bool = True
    seed: int = 0
    max_candidates_per_rep: int | None = None  # None: 16 * p
    threads: int = 1

    def __post_init__(self):
        if not 1 <= self.M <= MAX_M:
            raise ValueError(f"M must lie in [1, {MAX_M}]")
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "continuous-xy":
            if self.transform not in TRANSFORMS:
                raise ValueError(f"continuous-xy needs transform in {TRANSFORMS}")
        elif self.transform is not None:
            raise ValueError("a transform only applies in continuous-xy mode")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass(frozen=True)
class StrengthSample:
    values: np.ndarray

    def __post_init__(self):
        if self.values.size and (self.values.min() < 0 or self.values.max() > 1):
            raise ValueError("strengths must lie in [0, 1]")

    @property
    def size(self) -> int:
        return int(self.values.size)

    def moment(self, M: int) -> float:
        """Sample mean of ``strength ** M``."""
        if self.size == 0:
            raise ValueError("empty strength sample")
        return float(np.mean(self.values ** M))


@dataclass
class SearchReport:
    hits: list[InteractionHit]
    repetitions_run: int
    candidates_checked: int
    wall_time: float
    estimated_C: float
    M: int
    L: int
    gamma0: float
    candidates_per_rep: list[int] = field(default_factory=list)
    checked_per_rep: list[int] = field(default_factory=list)
    aborted_repetitions: list[tuple[int, int]] = field(default_factory=list)

    def pairs(self, sign: int | None = None) -> set[tuple[int, int]]:
        return {(h.j, h.k) for h in self.hits if sign is None or h.sign == sign}


# ---------------------------------------------------------------- formulas

def discovery_probability(gamma: float, M: int, L: int) -> float:
    """Probability that a pair of strength gamma survives at least one of L repetitions."""
    if not 0 < gamma <= 1 or M < 1 or L < 1:
        raise ValueError("need gamma in (0, 1], M >= 1, L >= 1")
    q = gamma ** M
    if q >= 1.0:
        return 1.0
    return float(-math.expm1(L * math.log1p(-q)))


def choose_L(M: int, gamma: float, eta: float) -> int:
    """Smallest L with ``discovery_probability(gamma, M, L) >= eta``."""
    if not 0.5 <= eta < 1:
        raise ValueError("eta must lie in [0.5, 1)")
    q = gamma ** M
    if q <= 0.0:
        raise ValueError(f"gamma**M underflows for M={M}; use a smaller M")
    if q >= 1.0:
        return 1
    L = max(1, math.ceil(math.log1p(-eta) / math.log1p(-q)))
    while L > 1 and discovery_probability(gamma, M, L - 1) >= eta:
        L -= 1
    while discovery_probability(gamma, M, L) < eta:
        L += 1
    return L


def runtime_exponent(gamma: float, gamma0: float) -> float:
    """Exponent ``1 + log(gamma) / log(gamma0)`` of the dominant cost ``n p^alpha``."""
    if not 0 < gamma0 < gamma <= 1:
        raise ValueError("need 0 < gamma0 < gamma <= 1")
    return 1.0 + math.log(gamma) / math.log(gamma0)


def expected_candidates(M: int, sample: StrengthSample, p: int) -> float:
    """Plug-in estimate of ``sum_{j,k} gamma_jk^M`` over all p^2 ordered pairs."""
    return p * p * sample.moment(M)


def expected_complexity(M: int, L: int, sample: StrengthSample, n: int, p: int) -> float:
    """Operation count ``np + L (Mp + p log p + n E|E_1|)`` without constant factors."""
    if L < 1 or M < 1:
        raise ValueError("M and L must be positive")
    return n * p + L * (M * p + p * math.log(p) + n * expected_candidates(M, sample, p))


def m_objective(M, gamma: float, sample: StrengthSample, n: int, p: int):
    """Cost per unit of ``-log(miss probability)``; minimized by the Pareto-optimal M."""
    M = np.asarray(M, dtype=float)
    moments = np.array([sample.moment(int(m)) for m in np.atleast_1d(M)]).reshape(M.shape)
    per_rep = M * p + p * math.log(p) + n * p * p * moments
    with np.errstate(divide="ignore"):
        return per_rep / -np.log1p(-(gamma ** M))


def optimal_M(gamma: float, sample: StrengthSample, n: int, p: int, M_range=(1, MAX_M)) -> int:
    """Minimize :func:`m_objective` over an integer range; ties go to the smaller M."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if sample.size == 0:
        raise ValueError("empty strength sample")
    lo, hi = M_range
    lo, hi = max(1, int(lo)), min(MAX_M, int(hi))
    Ms = np.arange(lo, hi + 1)
    obj = m_objective(Ms, gamma, sample, n, p)
    best = int(Ms[int(np.argmin(obj))])
    if best == hi and hi == MAX_M:
        warnings.warn(
            f"optimal M reached the one-word key limit {MAX_M}; larger M would cut "
            "candidate checks further at the price of more repetitions",
            stacklevel=2,
        )
    return best


@dataclass(frozen=True)
class ParameterChoice:
    M: int
    L: int
    gamma0: float
    exponent: float | None
    objective: float
    objective_rel_error: float


def choose_parameters(
    gamma: float,
    eta: float,
    sample: StrengthSample,
    n: int,
    p: int,
    M: int | None = None,
    L: int | None = None,
) -> ParameterChoice:
    """Fill in whichever of M, L is missing from the strength sample and the target eta."""
    if M is None:
        if gamma >= 1:
            # every repetition retains a perfect pair: largest M minimizes candidates
            M = MAX_M
        else:
            M = optimal_M(gamma, sample, n, p)
    if L is None:
        L = choose_L(M, gamma, eta)
    gamma0 = p ** (-1.0 / M)
    exponent = runtime_exponent(gamma, gamma0) if gamma0 < gamma else None
    vals = sample.values ** M
    cand = n * p * p * vals.mean()
    se = n * p * p * vals.std(ddof=1) / math.sqrt(sample.size) if sample.size > 1 else 0.0
    per_rep = M * p + p * math.log(p) + cand
    obj = float(m_objective(M, gamma, sample, n, p)) if gamma < 1 else per_rep
    return ParameterChoice(M, L, gamma0, exponent, obj, float(se / per_rep))


# ---------------------------------------------------------------- problem setup

def _as_packed(X) -> PackedMatrix:
    if isinstance(X, PackedMatrix):
        return X
    return PackedMatrix.from_signs(np.asarray(X))


def _dense_weighted_strength(E: np.ndarray, y: np.ndarray):
    """Strength ``1/2 + sum_i y_i E_ij E_ik / (2 ||y||_1)`` for candidate arrays."""
    l1 = np.abs(y).sum()
    n = E.shape[0]
    step = max(1, _DENSE_CHUNK_CELLS // n)

    def fn(js, ks):
        out = np.empty(js.size)
        for s in range(0, js.size, step):
            a, b = js[s:s + step], ks[s:s + step]
            out[s:s + step] = 0.5 + (y @ (E[:, a] * E[:, b])) / (2.0 * l1)
        return out

    return fn


class _Problem:
    """Per-pass state: the data, how to draw keys, and how to score pairs."""

    def __init__(self, X, y, config: SearchConfig):
        self.config = config
        mode = config.mode
        if mode == "binary":
            self.X = _as_packed(X)
            y = np.asarray(y)
            if y.shape != (self.X.n_rows,):
                raise ValueError("y length must equal the number of rows of X")
            if not np.all((y == 1) | (y == -1)):
                raise ValueError("binary mode needs y in {-1, +1}")
            self.n, self.p = self.X.shape
            self.Z = build_z(self.X, y)
            self.sampler = None
            X_, Z_ = self.X, self.Z
            self.strength = lambda js, ks: interaction_strengths(X_, Z_, js, ks)
            return

        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise ValueError("y must be finite")
        if not np.abs(y).sum() > 0:
            raise ValueError("response vector is identically zero")
        self.sign_y = np.where(y < 0, -1, 1)
        self.sampler = WeightedSampler(np.abs(y))
        if mode == "continuous-y":
            self.X = _as_packed(X)
            if y.shape != (self.X.n_rows,):
                raise ValueError("y length must equal the number of rows of X")
            self.n, self.p = self.X.shape
            self.Z = build_z(self.X, self.sign_y)
            self.strength = _dense_weighted_strength(self.X.to_signs().astype(float), y)
        else:
            Xr = np.asarray(X, dtype=float)
            if Xr.ndim != 2 or y.shape != (Xr.shape[0],):
                raise ValueError("X must be (n, p) with len(y) == n")
            if not np.all(np.isfinite(Xr)):
                raise ValueError("X must be finite")
            if config.transform == "unbiased" and np.any(np.abs(Xr) > 1):
                raise ValueError("unbiased transform needs X in [-1, 1]; use rescale_rows or cap_entries")
            self.Xr = Xr
            self.n, self.p = Xr.shape
            expected = Xr if config.transform == "unbiased" else np.sign(Xr)
            self.strength = _dense_weighted_strength(expected, y)

    def keys(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        draw = draw_subsample(self.n, self.config.M, rng, self.sampler)
        if self.config.mode != "continuous-xy":
            return project_keys(self.X, draw), project_keys(self.Z, draw)
        # fresh binarization of the subsampled rows, independently per position
        rows = self.Xr[draw.indices]
        if self.config.transform == "unbiased":
            Xt = unbiased_transform_sample(rows, rng)
        else:
            Xt = sign_transform(rows, rng)
        Zt = build_z(Xt, self.sign_y[draw.indices])
        local = SubsampleDraw(np.arange(draw.M, dtype=np.int64))
        return project_keys(Xt, local), project_keys(Zt, local)


def _rep_rng(seed: int, pass_idx: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(pass_idx, rep)))


def _run_pass(problem: _Problem, pass_idx: int, sign: int, report: SearchReport) -> None:
    cfg = problem.config
    budget = cfg.max_candidates_per_rep
    if budget is None:
        budget = 16 * problem.p

    def candidates(rep):
        kx, kz = problem.keys(_rep_rng(cfg.seed, pass_idx, rep))
        return equal_pairs(kx, kz)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            cand_sets = pool.map(candidates, range(cfg.L))
            _filter_all(problem, cand_sets, budget, sign, report)
    else:
        _filter_all(problem, (candidates(r) for r in range(cfg.L)), budget, sign, report)


def _filter_all(problem, cand_sets, budget, sign, report) -> None:
    seen: set = set()
    for rep, E in enumerate(cand_sets):
        report.repetitions_run += 1
        report.candidates_per_rep.append(E.total_pairs)
        try:
            hits, checked = filter_strong(
                E, problem.strength, problem.config.gamma, seen, rep,
                symmetric=True, drop_diagonal=True, max_candidates=budget, sign=sign,
            )
        except CandidateBudgetExceeded as exc:
            logger.warning("repetition %d aborted: %s", rep, exc)
            report.aborted_repetitions.append((rep, exc.total_pairs))
            report.checked_per_rep.append(0)
            continue
        report.checked_per_rep.append(checked)
        report.candidates_checked += checked
        report.hits.extend(hits)


def xyz_search(X, y, config: SearchConfig) -> SearchReport:
    """Find pairs whose interaction with y has strength at least ``config.gamma``.

    ``X`` is a :class:`PackedMatrix` or +/-1 array in the binary and
    continuous-y modes and a real ``(n, p)`` array in continuous-xy mode. With
    ``search_negatives`` a second pass runs on ``-y``; its hits carry
    ``sign=-1`` and their strength is measured against ``-y``.
    """
    t0 = time.perf_counter()
    problem = _Problem(X, y, config)
    n, p = problem.n, problem.p
    report = SearchReport([], 0, 0, 0.0, 0.0, config.M, config.L, p ** (-1.0 / config.M))
    _run_pass(problem, 0, 1, report)
    if config.search_negatives:
        neg_y = -np.asarray(y) if config.mode == "binary" else -np.asarray(y, dtype=float)
        _run_pass(_Problem(X, neg_y, config), 1, -1, report)
    report.wall_time = time.perf_counter() - t0
    mean_cand = float(np.mean(report.candidates_per_rep)) if report.candidates_per_rep else 0.0
    report.estimated_C = n * p + report.repetitions_run * (
        config.M * p + p * math.log(p) + n * mean_cand
    )
    return report


# ---------------------------------------------------------------- strength sampling

def pair_strength_function(X, y, mode: str = "binary", transform: str | None = None):
    """Exact strength of pairs ``(js, ks)`` as used by the search in ``mode``."""
    cfg = SearchConfig(M=1, L=1, gamma=1.0, mode=mode, transform=transform)
    problem = _Problem(X, y, cfg)
    return problem.strength, problem.p


def sample_strengths(X, y, n_samples: int, rng: np.random.Generator, mode: str = "binary",
                     transform: str | None = None) -> StrengthSample:
    """Strengths of ``n_samples`` uniformly drawn pairs ``j != k`` (with replacement)."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    fn, p = pair_strength_function(X, y, mode, transform)
    if p < 2:
        raise ValueError("need at least two columns")
    js = rng.integers(0, p, size=n_samples)
    ks = rng.integers(0, p - 1, size=n_samples)
    ks = ks + (ks >= js)
    return StrengthSample(np.clip(fn(js, ks), 0.0, 1.0))


def default_sample_size(p: int) -> int:
    return int(min(100_000, 10 * p))


def match_frequency(X, y, j: int, k: int, n_draws: int, rng: np.random.Generator,
                    transform: str = "unbiased", weighted: bool = True) -> float:
    """Empirical one-row match rate ``P(sgn(y_i) = X~_ij X~_ik)``.

    With ``weighted`` rows are drawn with probability proportional to
    ``|y_i|``, which is the per-row survival probability of pair (j, k) in
    continuous search. Without it rows are uniform, giving the plain sign
    agreement that binary search on ``sgn(y)`` would see.
    """
    Xr = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if weighted:
        rows = WeightedSampler(np.abs(y)).sample(n_draws, rng)
    else:
        rows = rng.integers(0, y.size, size=n_draws)
    sub = Xr[rows][:, [j, k]]
    t = unbiased_transform_sample(sub, rng) if transform == "unbiased" else sign_transform(sub, rng)
    s = t.to_signs()
    return float(np.mean(np.where(y[rows] < 0, -1, 1) == s[:, 0] * s[:, 1]))
