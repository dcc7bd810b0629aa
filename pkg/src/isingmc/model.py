"""Ising model representation, energy evaluation, and random model generators.

A model is an undirected graph with a bias h_i on every vertex and a
symmetric coupling J_ij on every edge, defining the energy

    E(x) = -sum_i h_i x_i - sum_(i,j) J_ij x_i x_j,   x_i in {-1,+1}.

Couplings are stored keyed on the unordered pair, so J_ij == J_ji always.
Models are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .rng import as_rng


@dataclass
class IsingModel:
    """Spin model on an undirected graph.

    Attributes:
        n: number of vertices.
        edges: list of (i, j) pairs with i < j, no duplicates, no self-edges.
        bias: per-vertex field h_i, shape (n,).
        coupling: per-edge J_ij aligned with ``edges``, shape (len(edges),).
        layers: optional (n0, n1) for bipartite models; vertices 0..n0-1 form
            layer 0, the rest layer 1, and every edge must cross layers.
    """

    n: int
    edges: list[tuple[int, int]]
    bias: np.ndarray
    coupling: np.ndarray
    layers: Optional[tuple[int, int]] = None

    # derived adjacency, built once at construction
    _edge_index: dict = field(init=False, repr=False, compare=False)
    _nbr_ptr: np.ndarray = field(init=False, repr=False, compare=False)
    _nbr_idx: np.ndarray = field(init=False, repr=False, compare=False)
    _nbr_cpl: np.ndarray = field(init=False, repr=False, compare=False)
    _edge_i: np.ndarray = field(init=False, repr=False, compare=False)
    _edge_j: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be >= 1, got {self.n}")
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        self.coupling = np.ascontiguousarray(self.coupling, dtype=np.float64)
        if self.bias.shape != (self.n,):
            raise ValueError(f"bias must have shape ({self.n},), got {self.bias.shape}")
        if self.coupling.shape != (len(self.edges),):
            raise ValueError(
                f"coupling must have one entry per edge, got {self.coupling.shape}"
            )
        if not np.all(np.isfinite(self.bias)) or not np.all(np.isfinite(self.coupling)):
            raise ValueError("model parameters must be finite")

        norm_edges = []
        index = {}
        for e, (i, j) in enumerate(self.edges):
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-edge ({i},{j}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            key = (min(i, j), max(i, j))
            if key in index:
                raise ValueError(f"duplicate edge {key}")
            index[key] = e
            norm_edges.append(key)
        self.edges = norm_edges
        self._edge_index = index

        if self.layers is not None:
            n0, n1 = self.layers
            if n0 < 1 or n1 < 1 or n0 + n1 != self.n:
                raise ValueError(f"layers {self.layers} inconsistent with n={self.n}")
            for i, j in self.edges:
                if (i < n0) == (j < n0):
                    raise ValueError(f"edge ({i},{j}) does not cross layers")
            self.layers = (int(n0), int(n1))

        # CSR-style neighbor lists for O(deg) local fields and Gibbs updates
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=ptr[1:])
        idx = np.zeros(2 * len(self.edges), dtype=np.int64)
        cpl = np.zeros(2 * len(self.edges), dtype=np.float64)
        fill = ptr[:-1].copy()
        for (i, j), w in zip(self.edges, self.coupling):
            idx[fill[i]], cpl[fill[i]] = j, w
            fill[i] += 1
            idx[fill[j]], cpl[fill[j]] = i, w
            fill[j] += 1
        self._nbr_ptr, self._nbr_idx, self._nbr_cpl = ptr, idx, cpl
        self._edge_i = np.array([i for i, _ in self.edges], dtype=np.int64)
        self._edge_j = np.array([j for _, j in self.edges], dtype=np.int64)
        for arr in (self.bias, self.coupling, ptr, idx, cpl, self._edge_i, self._edge_j):
            arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def coupling_of(self, i: int, j: int) -> float:
        """J for the unordered pair (i, j); 0.0 when no edge exists."""
        e = self._edge_index.get((min(i, j), max(i, j)))
        return 0.0 if e is None else float(self.coupling[e])

    def edge_id(self, i: int, j: int) -> int:
        """Position of edge (i, j) in the edge arrays; KeyError when absent."""
        return self._edge_index[(min(i, j), max(i, j))]

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(neighbor indices, couplings) of vertex i."""
        lo, hi = self._nbr_ptr[i], self._nbr_ptr[i + 1]
        return self._nbr_idx[lo:hi], self._nbr_cpl[lo:hi]

    def dense_coupling(self) -> np.ndarray:
        """Symmetric (n, n) coupling matrix with zero diagonal."""
        w = np.zeros((self.n, self.n))
        w[self._edge_i, self._edge_j] = self.coupling
        w[self._edge_j, self._edge_i] = self.coupling
        return w

    def hash_hex(self) -> str:
        """Short content hash of the canonical JSON form."""
        return hashlib.sha256(model_to_json(self).encode()).hexdigest()[:16]


def validate_spins(model: IsingModel, x: np.ndarray) -> np.ndarray:
    """Check x is a length-n vector of exactly +-1 and return it as int8."""
    x = np.asarray(x)
    if x.shape != (model.n,):
        raise ValueError(f"spin config must have shape ({model.n},), got {x.shape}")
    if not np.all(np.abs(x) == 1):
        raise ValueError("spin entries must be exactly -1 or +1")
    return x.astype(np.int8)


def energy(model: IsingModel, x: np.ndarray) -> float:
    """E(x) = -sum_i h_i x_i - sum_(i,j) J_ij x_i x_j."""
    s = validate_spins(model, x).astype(np.float64)
    return float(-s @ model.bias - (s[model._edge_i] * s[model._edge_j]) @ model.coupling)


def energies(model: IsingModel, spins: np.ndarray) -> np.ndarray:
    """Energy of each row of an (N, n) batch of spin configurations."""
    s = np.asarray(spins, dtype=np.float64)
    return -s @ model.bias - (s[:, model._edge_i] * s[:, model._edge_j]) @ model.coupling


def local_field(model: IsingModel, beta: float, i: int, x: np.ndarray) -> float:
    """Scaled field beta*(h_i + sum_{j in neighbors(i)} J_ij x_j)."""
    if not (0 <= i < model.n):
        raise ValueError(f"vertex {i} out of range for n={model.n}")
    s = validate_spins(model, x)
    nbr, cpl = model.neighbors(i)
    return float(beta * (model.bias[i] + cpl @ s[nbr].astype(np.float64)))


def _check_param_range(param_range: Sequence[float]) -> tuple[float, float]:
    lo, hi = float(param_range[0]), float(param_range[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
        raise ValueError(f"bad parameter range {param_range}")
    return lo, hi


def generate_random_graph_model(
    n: int,
    p: float,
    param_range: Sequence[float] = (-1.0, 1.0),
    rng=0,
) -> IsingModel:
    """Erdos-Renyi graph: each of the n(n-1)/2 pairs is an edge w.p. p.

    Biases and couplings are i.i.d. uniform on param_range. Draw order is
    fixed (biases, then one inclusion coin per pair in lexicographic order,
    then couplings for the included edges) so a seed fully determines the
    model. Isolated vertices are kept as-is.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"connection probability must be in [0,1], got {p}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lo, hi = _check_param_range(param_range)
    rng = as_rng(rng)
    bias = rng.uniform(lo, hi, size=n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    coins = rng.random(len(pairs))
    edges = [pair for pair, u in zip(pairs, coins) if u < p]
    coupling = rng.uniform(lo, hi, size=len(edges))
    return IsingModel(n=n, edges=edges, bias=bias, coupling=coupling)


def generate_hopfield_model(n: int, m: int, rng=0) -> IsingModel:
    """Complete graph with J_ij = (1/n) sum_k xi_ik xi_jk, zero biases.

    The m patterns xi_.k are i.i.d. uniform on {-1,+1}, drawn as one
    (n, m) block so the seed determines them.
    """
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    rng = as_rng(rng)
    xi = 2 * rng.integers(0, 2, size=(n, m)) - 1
    j_full = (xi @ xi.T).astype(np.float64) / n
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    coupling = np.array([j_full[i, j] for i, j in edges])
    return IsingModel(n=n, edges=edges, bias=np.zeros(n), coupling=coupling)


def generate_bipartite_model(
    n0: int,
    n1: int,
    p: float,
    param_range: Sequence[float] = (-1.0, 1.0),
    rng=0,
) -> IsingModel:
    """Two-layer model: vertices 0..n0-1 and n0..n0+n1-1, edges only across.

    Each cross-layer pair is an edge with probability p; parameters are
    uniform on param_range (biases first, then inclusion coins in
    lexicographic (i, j) order, then couplings). The returned model carries
    layer metadata for blocked sampling and the analytic oracle.
    """
    if n0 < 1 or n1 < 1:
        raise ValueError(f"layer sizes must be >= 1, got {n0}, {n1}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"connection probability must be in [0,1], got {p}")
    lo, hi = _check_param_range(param_range)
    rng = as_rng(rng)
    n = n0 + n1
    bias = rng.uniform(lo, hi, size=n)
    pairs = [(i, j) for i in range(n0) for j in range(n0, n)]
    coins = rng.random(len(pairs))
    edges = [pair for pair, u in zip(pairs, coins) if u < p]
    coupling = rng.uniform(lo, hi, size=len(edges))
    return IsingModel(n=n, edges=edges, bias=bias, coupling=coupling, layers=(n0, n1))


def _fmt(x: float) -> str:
    """Decimal float with 17 significant digits (round-trips float64 exactly)."""
    return format(float(x), ".17g")


def model_to_json(model: IsingModel) -> str:
    """Canonical JSON text for a model; numeric fields use 17 significant digits."""
    biases = ", ".join(_fmt(h) for h in model.bias)
    edge_rows = ", ".join(
        f"[{i}, {j}, {_fmt(w)}]" for (i, j), w in zip(model.edges, model.coupling)
    )
    parts = [f'"n": {model.n}', f'"biases": [{biases}]', f'"edges": [{edge_rows}]']
    if model.layers is not None:
        parts.append(f'"layers": [{model.layers[0]}, {model.layers[1]}]')
    return "{" + ", ".join(parts) + "}"


def model_from_json(text: str) -> IsingModel:
    doc = json.loads(text)
    edges = [(int(i), int(j)) for i, j, _ in doc["edges"]]
    coupling = np.array([float(w) for _, _, w in doc["edges"]])
    layers = tuple(doc["layers"]) if "layers" in doc else None
    return IsingModel(
        n=int(doc["n"]),
        edges=edges,
        bias=np.array(doc["biases"], dtype=np.float64),
        coupling=coupling,
        layers=layers,
    )


def save_model(model: IsingModel, path) -> None:
    with open(path, "w") as f:
        f.write(model_to_json(model) + "\n")


def load_model(path) -> IsingModel:
    with open(path) as f:
        return model_from_json(f.read())
