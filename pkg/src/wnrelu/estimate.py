"""Monte-Carlo empirical Rademacher complexity estimation over
norm-constrained ReLU classes, by projected gradient ascent on the layer
parameters, plus the norm-ball projection operators and the
constant-function divergence demonstration.

The estimator is a heuristic lower bound: each inner maximization explores
only what gradient ascent reaches, so reported values sit below the analytic
upper bounds up to Monte-Carlo noise. Sign-vector expectations are exact
(full enumeration) for n <= 12; beyond that they are sampled.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .capacity import bound_auto
from .netcore import INF, AffineMap, ClassSpec, NormSpec, WnNetwork, layer_norms
from .transform import constant_network

ENUMERATION_LIMIT = 12
DIVERGENCE_ENUMERATION_LIMIT = 15
DIVERGENCE_HARD_LIMIT = 25

_SUPPORTED = {(1.0, INF): (1, True), (2.0, INF): (2, True), (2.0, 2.0): (2, False)}


class UnsupportedNormError(ValueError):
    """Projection onto the requested (p, q) ball is not implemented."""


@dataclass(frozen=True)
class Sample:
    """n input points from the unit cube, one row per point."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("sample must be a nonempty (n, input_dim) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample entries must be finite")
        if np.max(np.abs(pts)) > 1 + 1e-12:
            raise ValueError("sample entries must lie in [-1, 1]")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def input_dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class EstimateConfig:
    epsilon_draws: int = 64
    restarts: int = 16
    steps: int = 500
    step_size: float = 0.05
    step_decay: float = 0.5
    decay_every: int = 100
    seed: int = 0

    def __post_init__(self):
        if min(self.epsilon_draws, self.restarts, self.steps, self.decay_every) < 1:
            raise ValueError("all iteration counts must be at least 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")


@dataclass(frozen=True)
class EstimateReport:
    """Estimator output: the mean of the per-sign-vector inner maxima divided
    by n, with a standard error (0 when the expectation was enumerated
    exactly) and an optional analytic-bound comparison."""

    estimate: float
    stderr: float
    per_draw: tuple[float, ...]
    exact_expectation: bool
    spec: ClassSpec
    n: int
    config: EstimateConfig
    backend: str
    analytic_bound: float | None = None
    soundness_margin: float | None = None

    def to_json_dict(self) -> dict:
        doc = {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "per_draw_maxima": list(self.per_draw),
            "exact_expectation": self.exact_expectation,
            "lower_bound_heuristic": True,
            "spec": self.spec.to_json_dict(),
            "n": self.n,
            "config": {
                "epsilon_draws": self.config.epsilon_draws,
                "restarts": self.config.restarts,
                "steps": self.config.steps,
                "step_size": self.config.step_size,
                "step_decay": self.config.step_decay,
                "decay_every": self.config.decay_every,
                "seed": self.config.seed,
            },
            "backend": self.backend,
        }
        if self.analytic_bound is not None:
            doc["analytic_bound"] = self.analytic_bound
            doc["soundness_margin"] = self.soundness_margin
        return doc


def _norm_codes(ns: NormSpec) -> tuple[int, bool]:
    key = (ns.p, ns.q)
    if key not in _SUPPORTED:
        raise UnsupportedNormError(
            f"projection supports (p, q) in {{(1, inf), (2, inf), (2, 2)}}, got ({ns.p}, {ns.q})"
        )
    return _SUPPORTED[key]


def project_l1(v, radius: float) -> np.ndarray:
    """Euclidean projection of a vector onto the L1 ball of the given radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    v = np.ascontiguousarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a 1-D vector")
    return kernels.l1_ball_project(v, float(radius))


def project_lpq(m, ns: NormSpec, radius: float) -> np.ndarray:
    """Projection of a matrix into the mixed-norm ball: per-column L1
    projection for (1, inf), per-column L2 rescale for (2, inf), Frobenius
    rescale for (2, 2)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    p_code, q_is_inf = _norm_codes(ns)
    out = np.array(m, dtype=float, order="C")
    if out.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    kernels.matrix_ball_project(out, p_code, q_is_inf, float(radius))
    return out


def _layer_shapes(spec: ClassSpec):
    rows = np.array([d + 1 for d in spec.dims[:-1]], dtype=np.int64)
    cols = np.array(list(spec.dims[1:]), dtype=np.int64)
    offs = np.zeros(len(rows), dtype=np.int64)
    np.cumsum(rows[:-1] * cols[:-1], out=offs[1:])
    total = int(offs[-1] + rows[-1] * cols[-1])
    return offs, rows, cols, total


def theta_to_network(spec: ClassSpec, theta: np.ndarray) -> WnNetwork:
    """Reassemble a flat ascent parameter vector into a network."""
    offs, rows, cols, total = _layer_shapes(spec)
    if theta.shape != (total,):
        raise ValueError(f"theta must have {total} entries")
    layers = [
        AffineMap(theta[offs[i]: offs[i] + rows[i] * cols[i]].reshape(rows[i], cols[i]))
        for i in range(len(rows))
    ]
    return WnNetwork(layers)


def _sign_vectors(n: int, cfg: EstimateConfig) -> tuple[np.ndarray, bool]:
    if n <= ENUMERATION_LIMIT:
        idx = np.arange(2 ** n, dtype=np.uint64)
        bits = (idx[:, None] >> np.arange(n, dtype=np.uint64)) & 1
        return np.where(bits == 1, 1.0, -1.0), True
    draws = np.empty((cfg.epsilon_draws, n))
    for d in range(cfg.epsilon_draws):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0, d)))
        draws[d] = rng.integers(0, 2, size=n) * 2.0 - 1.0
    return draws, False


def empirical_rademacher(spec: ClassSpec, sample: Sample,
                         cfg: EstimateConfig = EstimateConfig(),
                         compare_bound: bool = False) -> EstimateReport:
    """Estimate the empirical Rademacher complexity of the class over the
    sample: for each sign vector, maximize sum_i eps_i f(x_i) by projected
    gradient ascent (hidden layers pinned to norm exactly c, output layer kept
    inside the c_out ball), take the best restart, and average.

    Restart and draw random streams are derived from (seed, draw, restart)
    alone, so reports are bit-identical regardless of execution order.
    """
    p_code, q_is_inf = _norm_codes(spec.norm)
    if sample.input_dim != spec.input_dim:
        raise ValueError(
            f"sample dimension {sample.input_dim} != class input dimension {spec.input_dim}"
        )
    if spec.output_dim != 1:
        raise ValueError("estimation requires a scalar-output class")
    offs, rows, cols, total = _layer_shapes(spec)
    xs = sample.points
    n = sample.n
    signs, exact = _sign_vectors(n, cfg)
    per_draw = np.zeros(len(signs))
    for d, eps in enumerate(signs):
        eps = np.ascontiguousarray(eps)
        inner = 0.0
        for r in range(cfg.restarts):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=cfg.seed, spawn_key=(1, d, r))
            )
            theta = rng.uniform(-1.0, 1.0, total)
            best, _ = kernels.ascent_maximize(
                theta, xs, eps, offs, rows, cols, p_code, q_is_inf,
                float(spec.c), float(spec.c_out), cfg.steps, cfg.step_size,
                cfg.decay_every, cfg.step_decay,
            )
            if best > inner:
                inner = best
        per_draw[d] = inner
    scaled = per_draw / n
    estimate = float(np.mean(scaled))
    if exact or len(scaled) < 2:
        stderr = 0.0
    else:
        stderr = float(np.std(scaled, ddof=1) / math.sqrt(len(scaled)))
    bound = margin = None
    if compare_bound:
        bound = bound_auto(spec, n).value
        margin = bound - estimate
    return EstimateReport(estimate, stderr, tuple(float(v) for v in per_draw), exact,
                          spec, n, cfg, kernels.backend_name(), bound, margin)


def expected_abs_sign_sum(n: int, seed: int = 0, mc_draws: int | None = None) -> float:
    """E|eps_1 + ... + eps_n| for independent signs: full enumeration for
    small n, the binomial closed form up to the enumeration cap, Monte Carlo
    (with ``mc_draws``) beyond it."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n <= DIVERGENCE_ENUMERATION_LIMIT:
        idx = np.arange(2 ** n, dtype=np.uint64)
        ones = np.bitwise_count(idx).astype(np.int64)
        return float(np.mean(np.abs(n - 2 * ones)))
    if n <= DIVERGENCE_HARD_LIMIT:
        total = sum(math.comb(n, j) * abs(n - 2 * j) for j in range(n + 1))
        return total / 2.0 ** n
    if mc_draws is None:
        raise ValueError(
            f"n = {n} exceeds the enumeration cap {DIVERGENCE_HARD_LIMIT}; pass mc_draws"
        )
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2,)))
    sums = rng.integers(0, 2, size=(mc_draws, n)).sum(axis=1) * 2 - n
    return float(np.mean(np.abs(sums)))


@dataclass(frozen=True)
class DivergenceRow:
    value: float
    witness: float
    norm_product: float


def divergence_table(values, product_budget: float, n: int, seed: int = 0,
                     mc_draws: int | None = None) -> list[DivergenceRow]:
    """For each constant level C, build the constant-C network whose product
    of layer norms stays within ``product_budget`` and report the witness
    C * E|sum eps| / n, the empirical Rademacher mass the constant class
    already achieves. The witness grows without bound in C while the norm
    product never moves, so no product budget can control the class."""
    if product_budget <= 0:
        raise ValueError("product_budget must be positive")
    mean_abs = expected_abs_sign_sum(n, seed=seed, mc_draws=mc_draws)
    ns = NormSpec(1.0, INF)
    rows = []
    for value in values:
        if value < 0:
            raise ValueError("constant levels must be nonnegative")
        if value == 0:
            rows.append(DivergenceRow(0.0, 0.0, 0.0))
            continue
        net = constant_network(value, product_budget, 1, (1, 2, 1), ns)
        product = float(np.prod(layer_norms(net, ns)))
        rows.append(DivergenceRow(float(value), float(value) * mean_abs / n, product))
    return rows
