"""Exact, function-preserving rewriting passes.

Every pass here exploits positive homogeneity of ReLU (relu(s*u) = s*relu(u)
for s > 0): scaling a hidden layer up and dividing the next layer's weight
rows (never its bias) by the same factor leaves the computed function
unchanged, bit-for-bit up to floating point rounding.
"""

from dataclasses import dataclass

import numpy as np

from .netcore import (
    AffineMap,
    Certificate,
    ClassSpec,
    NormSpec,
    WnNetwork,
    evaluate,
    layer_norms,
    lpq_norm,
)


class BudgetExceededError(ValueError):
    """A layer norm violates the requested budget; the message names it."""

    def __init__(self, layer_index: int, norm: float, budget: float, kind: str = "hidden"):
        self.layer_index = layer_index
        self.norm = norm
        self.budget = budget
        super().__init__(
            f"{kind} layer {layer_index} has norm {norm:.6g}, exceeding budget {budget:.6g}"
        )


class ConstantNotRepresentableError(ValueError):
    """A constant induced by a zero-norm hidden layer exceeds the output budget."""


@dataclass(frozen=True)
class RewriteReport:
    """What a rewriting pass did: the class the input was assumed to sit in,
    the class the output is certified for, and the per-hidden-layer scale
    factors that were applied (all >= 1 on success)."""

    input_spec: ClassSpec
    output_spec: ClassSpec
    scale_factors: tuple[float, ...]
    function_preserving: bool = True
    folded_constant: tuple[float, ...] | None = None


def _scaled_layer(layer: AffineMap, factor: float) -> AffineMap:
    return AffineMap(layer.params * factor)


def _weights_divided(layer: AffineMap, divisor: float) -> AffineMap:
    params = layer.params.copy()
    params[1:] /= divisor
    return AffineMap(params)


def _constant_embedding(value: np.ndarray, dims, ns: NormSpec, c: float) -> list[AffineMap]:
    """Layers computing the constant ``value`` on any input: every hidden layer
    is a single bias entry of size c (norm exactly c), the output layer holds
    the constant in its bias row with zero weights."""
    layers = []
    for i in range(len(dims) - 2):
        params = np.zeros((dims[i] + 1, dims[i + 1]))
        params[0, 0] = c
        layers.append(AffineMap(params))
    out = np.zeros((dims[-2] + 1, dims[-1]))
    out[0, :] = value
    layers.append(AffineMap(out))
    return layers


def canonicalize(net: WnNetwork, ns: NormSpec, c: float, c_out: float,
                 tol: float = 1e-9) -> tuple[WnNetwork, RewriteReport]:
    """Rescale every hidden layer to norm exactly ``c`` without changing the
    computed function.

    Requires each hidden norm <= c and the output norm <= c_out (up to
    relative ``tol``); raises BudgetExceededError otherwise. Layer i is
    multiplied by s_i = c / norm_i and layer i+1's weight rows are divided by
    s_i, proceeding from the first hidden layer upward so every s_i >= 1.

    A hidden layer with norm exactly 0 makes the function constant from that
    point on; the constant is re-expressed through bias entries (raising
    ConstantNotRepresentableError if it exceeds the output budget) instead of
    being silently treated as the zero function.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    norms = layer_norms(net, ns)
    k = net.hidden_depth
    for i in range(k):
        if norms[i] > c * (1 + tol):
            raise BudgetExceededError(i + 1, norms[i], c)
    if norms[-1] > c_out * (1 + tol) + 1e-15:
        raise BudgetExceededError(k + 1, norms[-1], c_out, kind="output")

    spec = ClassSpec(ns, c, c_out, k, net.dims)

    if k > 0 and np.min(norms[:-1]) == 0.0:
        value = np.atleast_1d(evaluate(net, np.zeros(net.input_dim)))
        out_matrix = np.zeros((net.dims[-2] + 1, net.output_dim))
        out_matrix[0, :] = value
        if lpq_norm(out_matrix, ns) > c_out * (1 + tol):
            raise ConstantNotRepresentableError(
                f"constant {value} needs output norm {lpq_norm(out_matrix, ns):.6g} > {c_out:.6g}"
            )
        layers = _constant_embedding(value, net.dims, ns, c)
        result = WnNetwork(layers, Certificate(ns, c, c_out))
        report = RewriteReport(spec, spec, (1.0,) * k,
                               folded_constant=tuple(float(v) for v in value))
        return result, report

    layers = list(net.layers)
    factors = []
    for i in range(k):
        norm_i = lpq_norm(layers[i].params, ns)
        s = c / norm_i
        factors.append(s)
        layers[i] = _scaled_layer(layers[i], s)
        layers[i + 1] = _weights_divided(layers[i + 1], s)
    result = WnNetwork(layers, Certificate(ns, c, c_out))
    return result, RewriteReport(spec, spec, tuple(factors))


def scale_output(net: WnNetwork, a: float) -> WnNetwork:
    """Multiply the final layer (bias and weights) by ``a``; the computed
    function and the output norm scale by ``a``, hidden layers are untouched."""
    layers = list(net.layers)
    layers[-1] = AffineMap(layers[-1].params * a)
    cert = net.certificate
    if cert is not None:
        cert = Certificate(cert.norm, cert.c, cert.c_out * abs(a))
    return WnNetwork(layers, cert)


def convert_norm_budget(spec: ClassSpec, target: NormSpec) -> ClassSpec:
    """Budgets under which a (p, inf)-certified class is contained in a
    (p, q)-class with finite q: the hidden budget picks up a factor of
    max_width^(1/q) and the output budget a factor of output_dim^(1/q)."""
    if not spec.norm.q_is_inf:
        raise ValueError("source spec must have q == inf")
    if target.p != spec.norm.p:
        raise ValueError("target must keep the same p")
    if target.q_is_inf:
        raise ValueError("target q must be finite")
    max_hidden = max(spec.hidden_dims) if spec.hidden_dims else 1
    c_tilde = spec.c * max_hidden ** (1.0 / target.q)
    c_out_tilde = spec.c_out * spec.output_dim ** (1.0 / target.q)
    return ClassSpec(target, c_tilde, c_out_tilde, spec.k, spec.dims)


def widen(net: WnNetwork, target_dims) -> WnNetwork:
    """Grow hidden widths to ``target_dims`` by appending dead units (zero
    fan-in and fan-out). The function and every layer norm are unchanged."""
    target_dims = tuple(int(d) for d in target_dims)
    dims = net.dims
    if len(target_dims) != len(dims):
        raise ValueError("target_dims must match the network depth")
    if target_dims[0] != dims[0] or target_dims[-1] != dims[-1]:
        raise ValueError("input and output dimensions cannot change")
    for cur, tgt in zip(dims[1:-1], target_dims[1:-1]):
        if tgt < cur:
            raise ValueError(f"cannot shrink a hidden layer from {cur} to {tgt}")
    if target_dims == dims:
        return net
    layers = []
    for i, layer in enumerate(net.layers):
        rows = target_dims[i] + 1
        cols = target_dims[i + 1]
        params = np.zeros((rows, cols))
        params[: layer.params.shape[0], : layer.params.shape[1]] = layer.params
        layers.append(AffineMap(params))
    return WnNetwork(layers, net.certificate)


def deepen(net: WnNetwork, target_depth: int, ns: NormSpec) -> WnNetwork:
    """Append pass-through layers to reach ``target_depth`` hidden layers,
    without changing the scalar function.

    ReLU is not the identity on negatives, so the scalar output u rides
    through the added layers as the pair (relu(u), relu(-u)) and is
    reassembled by the new output layer as u = relu(u) - relu(-u). Every
    inserted hidden layer has (p, inf) norm exactly 1 (its norm under a
    finite q is 2^(1/q)).
    """
    k = net.hidden_depth
    if target_depth < k:
        raise ValueError(f"target depth {target_depth} is below current depth {k}")
    if target_depth == k:
        return net
    if net.output_dim != 1:
        raise ValueError("deepen requires a scalar-output network")

    old_out = net.layers[-1].params[:, 0]
    t = lpq_norm(old_out[:, None], ns)
    if t > 0:
        pair = np.stack([old_out / t, -old_out / t], axis=1)
        restore = t
    else:
        pair = np.zeros((net.dims[-2] + 1, 2))
        pair[1, 0] = 1.0
        pair[1, 1] = -1.0
        restore = 0.0
    layers = list(net.layers[:-1])
    layers.append(AffineMap(pair))
    identity = np.zeros((3, 2))
    identity[1, 0] = 1.0
    identity[2, 1] = 1.0
    for _ in range(target_depth - k - 1):
        layers.append(AffineMap(identity))
    combiner = np.zeros((3, 1))
    combiner[1, 0] = restore
    combiner[2, 0] = -restore
    layers.append(AffineMap(combiner))

    cert = net.certificate
    new_cert = None
    if cert is not None and cert.norm.q_is_inf and cert.c == 1.0:
        # Inserted layers have (p, inf) norm 1 == c, so the certificate
        # survives with the output budget widened by the pair recombination.
        new_cert = Certificate(cert.norm, 1.0, cert.c_out * 2 ** (1.0 / cert.norm.p))
    return WnNetwork(layers, new_cert)


def constant_network(value: float, product_budget: float, k: int, dims,
                     ns: NormSpec) -> WnNetwork:
    """A network computing the constant ``value`` everywhere whose product of
    layer norms stays within ``product_budget``.

    The first layer carries a single bias entry sized so its norm equals
    product_budget / (a0 * value) where a0 is the norm of a lone unit entry;
    middle layers have norm 1; the output layer is the bare constant.
    """
    if value <= 0 or product_budget <= 0:
        raise ValueError("value and product_budget must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    dims = tuple(int(d) for d in dims)
    if len(dims) != k + 2:
        raise ValueError(f"dims must have length k+2={k + 2}")
    pattern = np.zeros((dims[0] + 1, 1))
    pattern[0, 0] = 1.0
    a0 = lpq_norm(pattern, ns)
    layers = []
    first = np.zeros((dims[0] + 1, dims[1]))
    first[0, 0] = product_budget / (a0 * value)
    layers.append(AffineMap(first))
    for i in range(1, k):
        mid = np.zeros((dims[i] + 1, dims[i + 1]))
        mid[0, 0] = 1.0
        layers.append(AffineMap(mid))
    out = np.zeros((dims[k] + 1, dims[k + 1]))
    out[0, :] = value
    layers.append(AffineMap(out))
    return WnNetwork(layers)


def motivating_networks() -> tuple[WnNetwork, WnNetwork]:
    """The two-layer scalar example net f(x) = 1 - relu(1-x) - relu(-1-x) and
    its rescaled twin f' = 100 * T2 o relu o (T1 / 100), which computes
    99 + f(x) while keeping the same product of layer norms."""
    t1 = AffineMap(np.array([[1.0, -1.0], [-1.0, -1.0]]))
    t2 = AffineMap(np.array([[1.0], [-1.0], [-1.0]]))
    f = WnNetwork([t1, t2])
    f_prime = WnNetwork([AffineMap(t1.params / 100.0), AffineMap(t2.params * 100.0)])
    return f, f_prime


def motivating_table(lo: float = -2.0, hi: float = 2.0, points: int = 201) -> np.ndarray:
    """Grid table (x, f(x), f'(x), f'(x) - f(x)) for the rescaling demo; the
    last column equals 99 everywhere."""
    f, f_prime = motivating_networks()
    xs = np.linspace(lo, hi, points)
    fx = evaluate(f, xs[:, None])[:, 0]
    gx = evaluate(f_prime, xs[:, None])[:, 0]
    return np.column_stack([xs, fx, gx, gx - fx])
