"""Network data model: affine layers, exact ReLU evaluation, mixed matrix norms,
class membership checks, and JSON serialization.

A network with k hidden layers is a list of k+1 affine maps. Each map stores a
single combined matrix whose row 0 is the bias vector and whose remaining rows
are the weights; column j therefore holds the full fan-in (bias included) of
output unit j. ReLU is applied between maps but not after the last one.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

INF = math.inf

_FILE_VERSION = 1


class NetworkFormatError(ValueError):
    """Raised for malformed network files: bad JSON shape, inconsistent
    dimensions, or non-finite entries."""


@dataclass(frozen=True)
class NormSpec:
    """A mixed-norm index pair. ``p`` is the within-column exponent, ``q`` the
    across-column exponent; ``q == INF`` selects the max over columns."""

    p: float
    q: float

    def __post_init__(self):
        if not (1 <= self.p < INF):
            raise ValueError(f"p must lie in [1, inf), got {self.p}")
        if not (1 <= self.q):
            raise ValueError(f"q must lie in [1, inf], got {self.q}")

    @property
    def p_star(self) -> float:
        """Holder conjugate of p (INF when p == 1)."""
        return INF if self.p == 1 else self.p / (self.p - 1)

    @property
    def q_is_inf(self) -> bool:
        return self.q == INF


def lpq_norm(m: np.ndarray, ns: NormSpec) -> float:
    """Column-wise mixed norm of a matrix: p-norm within each column, q-norm
    across columns (max over columns when q is INF).

    All-zero columns contribute 0; p == q == 2 coincides with the Frobenius
    norm.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("expected a nonempty 2-D matrix")
    if m.shape[0] == 1:
        col = np.abs(m[0])
    elif ns.p == 1:
        col = np.sum(np.abs(m), axis=0)
    elif ns.p == 2:
        col = np.sqrt(np.sum(m * m, axis=0))
    else:
        col = np.sum(np.abs(m) ** ns.p, axis=0) ** (1.0 / ns.p)
    if ns.q_is_inf:
        return float(np.max(col))
    if ns.q == 1:
        return float(np.sum(col))
    return float(np.sum(col ** ns.q) ** (1.0 / ns.q))


class AffineMap:
    """One layer's affine transformation, stored as a single (in_dim+1) x out_dim
    matrix: row 0 is the bias, rows 1..in_dim are the weights.

    Instances are immutable; the parameter array is marked read-only.
    """

    __slots__ = ("params",)

    def __init__(self, params: np.ndarray):
        params = np.array(params, dtype=float, order="C")
        if params.ndim != 2 or params.shape[0] < 2 or params.shape[1] < 1:
            raise ValueError("params must be a 2-D matrix with at least 2 rows")
        if not np.all(np.isfinite(params)):
            raise ValueError("params must be finite")
        params.setflags(write=False)
        object.__setattr__(self, "params", params)

    def __setattr__(self, name, value):
        raise AttributeError("AffineMap is immutable")

    @classmethod
    def from_bias_weights(cls, bias, weights) -> "AffineMap":
        """Build from a bias vector (out_dim,) and a weight matrix
        (out_dim, in_dim) whose row j is the fan-in of output unit j."""
        bias = np.asarray(bias, dtype=float).reshape(1, -1)
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 2 or weights.shape[0] != bias.shape[1]:
            raise ValueError("weights must have one row per output unit")
        return cls(np.vstack([bias, weights.T]))

    @property
    def in_dim(self) -> int:
        return self.params.shape[0] - 1

    @property
    def out_dim(self) -> int:
        return self.params.shape[1]

    @property
    def bias(self) -> np.ndarray:
        return self.params[0]

    @property
    def weights(self) -> np.ndarray:
        """Weight matrix of shape (in_dim, out_dim); column j feeds unit j."""
        return self.params[1:]

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Affine action on a point (in_dim,) or a batch (n, in_dim)."""
        return u @ self.params[1:] + self.params[0]

    def __eq__(self, other):
        return isinstance(other, AffineMap) and np.array_equal(self.params, other.params)

    def __repr__(self):
        return f"AffineMap(in_dim={self.in_dim}, out_dim={self.out_dim})"


@dataclass(frozen=True)
class Certificate:
    """Asserted norm budget of a network: every hidden layer norm equals ``c``,
    output layer norm at most ``c_out``, under ``norm``."""

    norm: NormSpec
    c: float
    c_out: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("certificate c must be positive")
        if self.c_out < 0:
            raise ValueError("certificate c_out must be nonnegative")


class WnNetwork:
    """An evaluable ReLU network: ordered affine maps with an optional norm
    certificate. ReLU runs after every map except the last."""

    __slots__ = ("input_dim", "layers", "certificate")

    def __init__(self, layers, certificate: Certificate | None = None):
        layers = tuple(layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValueError(
                    f"layer chain mismatch: out_dim {prev.out_dim} feeds in_dim {nxt.in_dim}"
                )
        object.__setattr__(self, "input_dim", layers[0].in_dim)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "certificate", certificate)

    def __setattr__(self, name, value):
        raise AttributeError("WnNetwork is immutable")

    @property
    def hidden_depth(self) -> int:
        """Number of hidden layers (k); the network has k+1 affine maps."""
        return len(self.layers) - 1

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim,) + tuple(layer.out_dim for layer in self.layers)

    def with_certificate(self, certificate: Certificate | None) -> "WnNetwork":
        return WnNetwork(self.layers, certificate)

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return f"WnNetwork(dims={self.dims}, certificate={self.certificate})"


def evaluate(net: WnNetwork, x) -> np.ndarray:
    """Forward pass. Accepts a single point (input_dim,) or a batch
    (n, input_dim); returns the matching shape. No ReLU after the last layer."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ValueError(f"input has {x.shape[-1]} components, network expects {net.input_dim}")
    h = x
    for layer in net.layers[:-1]:
        h = np.maximum(layer.apply(h), 0.0)
    out = net.layers[-1].apply(h)
    return out[0] if single else out


def preactivations(net: WnNetwork, x) -> list[np.ndarray]:
    """Per-layer pre-activation values at a single point, in layer order.
    The last entry is the network output."""
    x = np.asarray(x, dtype=float)
    h = x[None, :]
    zs = []
    for layer in net.layers:
        z = layer.apply(h)
        zs.append(z[0])
        h = np.maximum(z, 0.0)
    return zs


def layer_norms(net: WnNetwork, ns: NormSpec) -> np.ndarray:
    """Mixed norms of every layer's combined bias+weight matrix, in order."""
    return np.array([lpq_norm(layer.params, ns) for layer in net.layers])


@dataclass(frozen=True)
class ClassSpec:
    """A network class: norm indices, hidden budget ``c`` (exact), output
    budget ``c_out`` (upper bound), depth ``k``, and the dimension vector
    (input, hidden widths..., output) of length k+2."""

    norm: NormSpec
    c: float
    c_out: float
    k: int
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if len(self.dims) != self.k + 2:
            raise ValueError(f"dims must have length k+2={self.k + 2}, got {len(self.dims)}")
        if any(d < 1 for d in self.dims):
            raise ValueError("all dimensions must be at least 1")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.c_out < 0:
            raise ValueError("c_out must be nonnegative")

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    @property
    def hidden_dims(self) -> tuple[int, ...]:
        return self.dims[1:-1]

    @property
    def output_dim(self) -> int:
        return self.dims[-1]

    def to_json_dict(self) -> dict:
        return {
            "p": self.norm.p,
            "q": "inf" if self.norm.q_is_inf else self.norm.q,
            "c": self.c,
            "c_out": self.c_out,
            "k": self.k,
            "dims": list(self.dims),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ClassSpec":
        q = d["q"]
        if isinstance(q, str):
            if q.lower() != "inf":
                raise ValueError(f"unrecognized q value {q!r}")
            q = INF
        return cls(NormSpec(float(d["p"]), float(q)), float(d["c"]), float(d["c_out"]),
                   int(d["k"]), tuple(d["dims"]))


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of checking a network against a ClassSpec. ``passed`` is the
    conjunction of the four component checks."""

    dims_ok: bool
    depth_ok: bool
    hidden_norms_ok: bool
    output_norm_ok: bool
    norms: tuple[float, ...]
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.dims_ok and self.depth_ok and self.hidden_norms_ok and self.output_norm_ok


def class_check(net: WnNetwork, spec: ClassSpec, tol: float = 1e-9) -> MembershipReport:
    """Check class membership: dimensions and depth match, every hidden layer
    norm equals ``c`` within relative ``tol``, output norm at most
    ``c_out * (1 + tol)``. Failures are reported, never raised."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    norms = layer_norms(net, spec.norm)
    dims_ok = net.dims == spec.dims
    depth_ok = net.hidden_depth == spec.k
    hidden = norms[:-1]
    hidden_ok = bool(np.all(np.abs(hidden - spec.c) <= tol * abs(spec.c) + 1e-12))
    output_ok = bool(norms[-1] <= spec.c_out * (1 + tol) + 1e-12)
    notes = []
    if not dims_ok:
        notes.append(f"dims {net.dims} != {spec.dims}")
    if not depth_ok:
        notes.append(f"depth {net.hidden_depth} != {spec.k}")
    if not hidden_ok:
        bad = int(np.argmax(np.abs(hidden - spec.c))) + 1
        notes.append(f"hidden layer {bad} norm {hidden[bad - 1]:.6g} != c {spec.c:.6g}")
    if not output_ok:
        notes.append(f"output norm {norms[-1]:.6g} > c_out {spec.c_out:.6g}")
    return MembershipReport(dims_ok, depth_ok, hidden_ok, output_ok,
                            tuple(float(v) for v in norms), "; ".join(notes))


def _reject_nonfinite_constant(token):
    raise NetworkFormatError(f"non-finite entry {token!r} in network file")


def network_to_json_dict(net: WnNetwork) -> dict:
    doc = {
        "version": _FILE_VERSION,
        "input_dim": net.input_dim,
        "layers": [
            {
                "in_dim": layer.in_dim,
                "out_dim": layer.out_dim,
                "bias": layer.bias.tolist(),
                "weights": layer.weights.T.tolist(),
            }
            for layer in net.layers
        ],
    }
    if net.certificate is not None:
        cert = net.certificate
        doc["certificate"] = {
            "p": cert.norm.p,
            "q": "inf" if cert.norm.q_is_inf else cert.norm.q,
            "c": cert.c,
            "c_out": cert.c_out,
        }
    return doc


def network_from_json_dict(doc: dict) -> WnNetwork:
    if not isinstance(doc, dict):
        raise NetworkFormatError("network file must contain a JSON object")
    if doc.get("version") != _FILE_VERSION:
        raise NetworkFormatError(f"unsupported or missing version: {doc.get('version')!r}")
    try:
        input_dim = int(doc["input_dim"])
        raw_layers = doc["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkFormatError(f"missing or invalid field: {exc}") from exc
    if not raw_layers:
        raise NetworkFormatError("network file lists no layers")
    layers = []
    for idx, entry in enumerate(raw_layers):
        try:
            in_dim = int(entry["in_dim"])
            out_dim = int(entry["out_dim"])
            bias = np.asarray(entry["bias"], dtype=float)
            weights = np.asarray(entry["weights"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkFormatError(f"layer {idx}: {exc}") from exc
        if bias.shape != (out_dim,) or weights.shape != (out_dim, in_dim):
            raise NetworkFormatError(f"layer {idx}: bias/weight shapes disagree with dims")
        if not (np.all(np.isfinite(bias)) and np.all(np.isfinite(weights))):
            raise NetworkFormatError(f"layer {idx}: non-finite entries")
        layers.append(AffineMap.from_bias_weights(bias, weights))
    expected = input_dim
    for idx, layer in enumerate(layers):
        if layer.in_dim != expected:
            raise NetworkFormatError(
                f"layer {idx}: in_dim {layer.in_dim} inconsistent with preceding width {expected}"
            )
        expected = layer.out_dim
    certificate = None
    if "certificate" in doc:
        raw = doc["certificate"]
        try:
            q = raw["q"]
            if isinstance(q, str):
                if q.lower() != "inf":
                    raise ValueError(f"unrecognized q value {q!r}")
                q = INF
            certificate = Certificate(NormSpec(float(raw["p"]), float(q)),
                                      float(raw["c"]), float(raw["c_out"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkFormatError(f"invalid certificate: {exc}") from exc
    try:
        return WnNetwork(layers, certificate)
    except ValueError as exc:
        raise NetworkFormatError(str(exc)) from exc


def save_network(net: WnNetwork, path) -> None:
    """Write a network as JSON. Floats use the shortest exact decimal form
    (at most 17 significant digits), so a save/load round trip is bit-exact."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_json_dict(net), fh, indent=1)
        fh.write("\n")


def load_network(path) -> WnNetwork:
    """Read a network written by :func:`save_network`, validating version,
    dimension consistency, and finiteness."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh, parse_constant=_reject_nonfinite_constant)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"invalid JSON: {exc}") from exc
    return network_from_json_dict(doc)
