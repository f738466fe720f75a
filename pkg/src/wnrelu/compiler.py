"""Exact re-expression of a one-hidden-layer network as a deep, narrow,
norm-bounded network.

The input sum(c_i * relu(w_i . x + b_i)) is split into its positive- and
negative-coefficient halves, each half's units are partitioned into k blocks,
and block j is materialized in hidden layer j from relu(x)/relu(-x)
pass-through units. A running normalized cumulative sum of each half is
carried forward one layer behind the blocks, so the output layer only has to
combine the two final sums. Every hidden column then has L1 norm at most 1,
making the whole network (1, inf)-normalized with budget 1.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .netcore import AffineMap, ClassSpec, NormSpec, WnNetwork

_FILE_VERSION = 1


class ShallowFormatError(ValueError):
    """Raised for malformed shallow-network files."""


class DegenerateUnitError(ValueError):
    """A unit with zero weights and bias but a nonzero coefficient."""


class CompileRangeError(ValueError):
    """Requested depth outside 1..r (after dropping zero-coefficient units)."""


class CoefficientBudgetError(ValueError):
    """sum(|c_i|) exceeds the declared output budget."""


@dataclass(frozen=True)
class ShallowNet:
    """One-hidden-layer network sum(c_i * relu(w_i . x + b_i)), stored as
    parallel arrays: coefs (r,), weights (r, input_dim), biases (r,)."""

    input_dim: int
    coefs: np.ndarray
    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        coefs = np.atleast_1d(np.asarray(self.coefs, dtype=float))
        biases = np.atleast_1d(np.asarray(self.biases, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim == 1:
            weights = weights.reshape(len(coefs), -1)
        if weights.shape != (len(coefs), self.input_dim) or biases.shape != (len(coefs),):
            raise ValueError("coefs, weights, and biases disagree on unit count or input_dim")
        for arr in (coefs, weights, biases):
            if not np.all(np.isfinite(arr)):
                raise ValueError("shallow network entries must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def r(self) -> int:
        return len(self.coefs)

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x) -> np.ndarray:
        """Direct evaluation at a point (input_dim,) or batch (n, input_dim)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        hidden = np.maximum(x @ self.weights.T + self.biases, 0.0)
        out = hidden @ self.coefs
        return float(out[0]) if single else out

    def total_coef(self) -> float:
        return float(np.sum(np.abs(self.coefs)))

    def drop_zero_units(self) -> "ShallowNet":
        keep = self.coefs != 0.0
        return ShallowNet(self.input_dim, self.coefs[keep], self.weights[keep], self.biases[keep])


def unit_normalize(s: ShallowNet) -> ShallowNet:
    """Rescale each unit so that |b_i| + 2*||w_i||_1 == 1, folding the removed
    factor into the coefficient (ReLU homogeneity keeps the function intact).
    The total |coefficient| mass at most doubles."""
    scales = np.abs(s.biases) + 2.0 * np.sum(np.abs(s.weights), axis=1)
    degenerate = (scales == 0.0) & (s.coefs != 0.0)
    if np.any(degenerate):
        raise DegenerateUnitError(
            f"unit {int(np.argmax(degenerate))} has zero weights and bias but coefficient "
            f"{s.coefs[np.argmax(degenerate)]:.6g}"
        )
    safe = np.where(scales == 0.0, 1.0, scales)
    return ShallowNet(s.input_dim, s.coefs * scales, s.weights / safe[:, None],
                      s.biases / safe)


def split_signs(s: ShallowNet) -> tuple[ShallowNet, ShallowNet, float, float]:
    """Partition units by coefficient sign and normalize each part to total
    coefficient 1, so that g = S_plus * g_plus - S_minus * g_minus. Returns
    (g_plus, g_minus, S_plus, S_minus); an empty part is the zero function
    with total 0."""
    pos = s.coefs > 0.0
    neg = s.coefs < 0.0
    s_plus = float(np.sum(s.coefs[pos]))
    s_minus = float(-np.sum(s.coefs[neg]))

    def part(mask, total):
        coefs = np.abs(s.coefs[mask])
        if total > 0:
            coefs = coefs / total
        return ShallowNet(s.input_dim, coefs, s.weights[mask], s.biases[mask])

    return part(pos, s_plus), part(neg, s_minus), s_plus, s_minus


def _balanced_blocks(r: int, k: int) -> list[range]:
    """Split indices 0..r-1 into k contiguous blocks whose sizes differ by at
    most one, with earlier blocks taking the extra unit."""
    base, extra = divmod(r, k)
    blocks, start = [], 0
    for j in range(k):
        size = base + (1 if j < extra else 0)
        blocks.append(range(start, start + size))
        start += size
    return blocks


@dataclass(frozen=True)
class LayerLayout:
    """Column positions of the pieces inside one hidden layer: the carried
    cumulative-sum units, the fresh block units, and the +-x pass-throughs."""

    sum_pos: int | None
    sum_neg: int | None
    block_pos: tuple[int, int]
    block_neg: tuple[int, int]
    pass_pos: int | None
    pass_neg: int | None
    width: int


@dataclass(frozen=True)
class CompilePlan:
    """How a shallow net was laid out across k hidden layers, plus the class
    the result lands in after re-normalization."""

    k: int
    input_dim: int
    r: int
    r_pos: int
    r_neg: int
    pos_blocks: tuple[tuple[int, int], ...]
    neg_blocks: tuple[tuple[int, int], ...]
    pos_prefix: tuple[float, ...]
    neg_prefix: tuple[float, ...]
    widths: tuple[int, ...]
    width_cap_stated: int
    width_cap_proof: int
    layouts: tuple[LayerLayout, ...] = field(repr=False)
    class_spec: ClassSpec | None = None


def compile_to_depth(s: ShallowNet, k: int, ns: NormSpec,
                     c_out: float) -> tuple[WnNetwork, CompilePlan]:
    """Compile a shallow network into an equivalent depth-k network whose
    hidden layers all have (1, inf) norm at most 1 and whose output layer has
    L1 norm at most 2 * sum(|c_i|) <= 2 * c_out.

    Requires 1 <= k <= r (counting only nonzero-coefficient units),
    sum(|c_i|) <= c_out, and every unit to satisfy the normalization
    hypothesis ||(b_i, w_i)||_1 <= 1. Equivalence is exact on all of R^m, not
    just the unit cube.
    """
    s = s.drop_zero_units()
    r, m1 = s.r, s.input_dim
    if r == 0 or k < 1 or k > r:
        raise CompileRangeError(f"k must lie in 1..{r}, got {k}")
    total = s.total_coef()
    if total > c_out * (1 + 1e-12):
        raise CoefficientBudgetError(f"sum |c_i| = {total:.6g} exceeds c_out = {c_out:.6g}")
    unit_norms = np.abs(s.biases) + np.sum(np.abs(s.weights), axis=1)
    if np.any(unit_norms > 1 + 1e-9):
        bad = int(np.argmax(unit_norms))
        raise ValueError(
            f"unit {bad} has ||(b, w)||_1 = {unit_norms[bad]:.6g} > 1; "
            "normalize units before compiling"
        )

    norm = unit_normalize(s)
    gp, gn, s_plus, s_minus = split_signs(norm)
    ap = gp.coefs * s_plus
    an = gn.coefs * s_minus
    r1, r2 = gp.r, gn.r
    pos_blocks = _balanced_blocks(r1, k)
    neg_blocks = _balanced_blocks(r2, k)
    pos_prefix = np.concatenate([[0.0], np.cumsum(ap)]) if r1 else np.zeros(1)
    neg_prefix = np.concatenate([[0.0], np.cumsum(an)]) if r2 else np.zeros(1)

    def prefix_at(prefix, blocks, j):
        # total coefficient mass of blocks 0..j-1
        if j == 0 or len(prefix) == 1:
            return 0.0
        return float(prefix[blocks[j - 1].stop])

    def block_column(col, w_row, b_val, x_pos, x_neg):
        # fresh unit from pass-throughs: w.(relu x - relu -x) + b
        col[0] = b_val
        col[1 + x_pos: 1 + x_pos + m1] = w_row
        col[1 + x_neg: 1 + x_neg + m1] = -w_row

    layers: list[AffineMap] = []
    layouts: list[LayerLayout] = []
    widths: list[int] = []

    if k == 1:
        width = r1 + r2
        params = np.zeros((m1 + 1, width))
        for idx in range(r1):
            params[0, idx] = gp.biases[idx]
            params[1:, idx] = gp.weights[idx]
        for idx in range(r2):
            params[0, r1 + idx] = gn.biases[idx]
            params[1:, r1 + idx] = gn.weights[idx]
        layers.append(AffineMap(params))
        layouts.append(LayerLayout(None, None, (0, r1), (r1, r2), None, None, width))
        widths.append(width)
        out = np.zeros((width + 1, 1))
        out[1: 1 + r1, 0] = ap
        out[1 + r1: 1 + r1 + r2, 0] = -an
        layers.append(AffineMap(out))
    else:
        prev_layout: LayerLayout | None = None
        prev_width = m1
        for j in range(1, k + 1):
            bp = pos_blocks[j - 1]
            bn = neg_blocks[j - 1]
            has_sum_pos = r1 > 0 and j >= 2
            has_sum_neg = r2 > 0 and j >= 2
            has_pass = j < k
            pos_count, neg_count = len(bp), len(bn)
            width = int(has_sum_pos) + int(has_sum_neg) + pos_count + neg_count
            if has_pass:
                width += 2 * m1
            params = np.zeros((prev_width + 1, width))
            col = 0
            sum_pos_at = sum_neg_at = None
            if has_sum_pos:
                sum_pos_at = col
                prev_bp = pos_blocks[j - 2]
                carried = prefix_at(pos_prefix, pos_blocks, j - 2)
                new_total = prefix_at(pos_prefix, pos_blocks, j - 1)
                if prev_layout.sum_pos is not None:
                    params[1 + prev_layout.sum_pos, col] = carried / new_total
                start, _ = prev_layout.block_pos
                for off, idx in enumerate(prev_bp):
                    params[1 + start + off, col] = ap[idx] / new_total
                col += 1
            if has_sum_neg:
                sum_neg_at = col
                prev_bn = neg_blocks[j - 2]
                carried = prefix_at(neg_prefix, neg_blocks, j - 2)
                new_total = prefix_at(neg_prefix, neg_blocks, j - 1)
                if prev_layout.sum_neg is not None:
                    params[1 + prev_layout.sum_neg, col] = carried / new_total
                start, _ = prev_layout.block_neg
                for off, idx in enumerate(prev_bn):
                    params[1 + start + off, col] = an[idx] / new_total
                col += 1
            block_pos_start = col
            for idx in bp:
                if j == 1:
                    params[0, col] = gp.biases[idx]
                    params[1:, col] = gp.weights[idx]
                else:
                    block_column(params[:, col], gp.weights[idx], gp.biases[idx],
                                 prev_layout.pass_pos, prev_layout.pass_neg)
                col += 1
            block_neg_start = col
            for idx in bn:
                if j == 1:
                    params[0, col] = gn.biases[idx]
                    params[1:, col] = gn.weights[idx]
                else:
                    block_column(params[:, col], gn.weights[idx], gn.biases[idx],
                                 prev_layout.pass_pos, prev_layout.pass_neg)
                col += 1
            pass_pos_at = pass_neg_at = None
            if has_pass:
                pass_pos_at = col
                pass_neg_at = col + m1
                if j == 1:
                    for i in range(m1):
                        params[1 + i, pass_pos_at + i] = 1.0
                        params[1 + i, pass_neg_at + i] = -1.0
                else:
                    for i in range(m1):
                        params[1 + prev_layout.pass_pos + i, pass_pos_at + i] = 1.0
                        params[1 + prev_layout.pass_neg + i, pass_neg_at + i] = 1.0
                col += 2 * m1
            layout = LayerLayout(sum_pos_at, sum_neg_at,
                                 (block_pos_start, pos_count),
                                 (block_neg_start, neg_count),
                                 pass_pos_at, pass_neg_at, width)
            layers.append(AffineMap(params))
            layouts.append(layout)
            widths.append(width)
            prev_layout = layout
            prev_width = width

        out = np.zeros((prev_width + 1, 1))
        if r1 > 0:
            out[1 + prev_layout.sum_pos, 0] = prefix_at(pos_prefix, pos_blocks, k - 1)
            start, _ = prev_layout.block_pos
            for off, idx in enumerate(pos_blocks[k - 1]):
                out[1 + start + off, 0] = ap[idx]
        if r2 > 0:
            out[1 + prev_layout.sum_neg, 0] = -prefix_at(neg_prefix, neg_blocks, k - 1)
            start, _ = prev_layout.block_neg
            for off, idx in enumerate(neg_blocks[k - 1]):
                out[1 + start + off, 0] = -an[idx]
        layers.append(AffineMap(out))

    wid_stated = math.ceil(r / k) + 2 * m1 + 3
    wid_proof = math.ceil(r1 / k) + math.ceil(r2 / k) + 2 * m1 + 3
    q_exp = 0.0 if ns.q_is_inf else 1.0 / ns.q
    class_spec = ClassSpec(ns, float(wid_stated) ** q_exp, 2 * c_out, k,
                           (m1,) + (wid_stated,) * k + (1,))
    plan = CompilePlan(
        k=k, input_dim=m1, r=r, r_pos=r1, r_neg=r2,
        pos_blocks=tuple((blk.start, blk.stop) for blk in pos_blocks),
        neg_blocks=tuple((blk.start, blk.stop) for blk in neg_blocks),
        pos_prefix=tuple(float(v) for v in pos_prefix),
        neg_prefix=tuple(float(v) for v in neg_prefix),
        widths=tuple(widths),
        width_cap_stated=wid_stated,
        width_cap_proof=wid_proof,
        layouts=tuple(layouts),
        class_spec=class_spec,
    )
    return WnNetwork(layers), plan


def shallow_to_json_dict(s: ShallowNet) -> dict:
    return {
        "version": _FILE_VERSION,
        "input_dim": s.input_dim,
        "units": [
            {"coef": float(c), "weights": w.tolist(), "bias": float(b)}
            for c, w, b in zip(s.coefs, s.weights, s.biases)
        ],
    }


def shallow_from_json_dict(doc: dict) -> ShallowNet:
    if not isinstance(doc, dict):
        raise ShallowFormatError("shallow file must contain a JSON object")
    if doc.get("version") != _FILE_VERSION:
        raise ShallowFormatError(f"unsupported or missing version: {doc.get('version')!r}")
    try:
        m1 = int(doc["input_dim"])
        units = doc["units"]
        coefs = [float(u["coef"]) for u in units]
        weights = [list(map(float, u["weights"])) for u in units]
        biases = [float(u["bias"]) for u in units]
    except (KeyError, TypeError, ValueError) as exc:
        raise ShallowFormatError(f"missing or invalid field: {exc}") from exc
    if not units:
        raise ShallowFormatError("shallow file lists no units")
    try:
        return ShallowNet(m1, np.array(coefs), np.array(weights), np.array(biases))
    except ValueError as exc:
        raise ShallowFormatError(str(exc)) from exc


def save_shallow(s: ShallowNet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(shallow_to_json_dict(s), fh, indent=1)
        fh.write("\n")


def load_shallow(path) -> ShallowNet:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ShallowFormatError(f"invalid JSON: {exc}") from exc
    return shallow_from_json_dict(doc)
