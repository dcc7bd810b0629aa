"""Independent reference implementations used only by the tests.

Everything here is written the slow, literal way (explicit loops,
itertools enumeration, math.fsum) on purpose: these functions must not
share code paths with the library they check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_energy(model, x) -> float:
    """Term-by-term energy sum straight from the definition."""
    total = 0.0
    for i in range(model.n):
        total -= model.bias[i] * x[i]
    for (i, j), w in zip(model.edges, model.coupling):
        total -= w * x[i] * x[j]
    return total


def brute_local_field(model, beta, i, x) -> float:
    phi = model.bias[i]
    for (a, b), w in zip(model.edges, model.coupling):
        if a == i:
            phi += w * x[b]
        elif b == i:
            phi += w * x[a]
    return beta * phi


def all_configs(n):
    """All 2^n spin vectors as +-1 tuples."""
    return [np.array(c, dtype=np.int8) for c in itertools.product((1, -1), repeat=n)]


def brute_solution(model, beta):
    """Full enumeration with fsum accumulation; independent of exact_solve.

    Returns (log_z, magnetization, pair_moment, covariance).
    """
    configs = all_configs(model.n)
    log_ws = [-beta * brute_energy(model, c) for c in configs]
    shift = max(log_ws)
    ws = [math.exp(lw - shift) for lw in log_ws]
    z = math.fsum(ws)
    log_z = shift + math.log(z)
    mag = np.array(
        [math.fsum(w * c[i] for w, c in zip(ws, configs)) / z for i in range(model.n)]
    )
    pair = np.array(
        [
            math.fsum(w * c[i] * c[j] for w, c in zip(ws, configs)) / z
            for i, j in model.edges
        ]
    )
    cov = np.array([pm - mag[i] * mag[j] for (i, j), pm in zip(model.edges, pair)])
    return log_z, mag, pair, cov


def brute_conditional_magnetization(model, beta, i, sample) -> float:
    """Two-term conditional sum: sum_{x_i} x_i P(x_i | sampled neighbors)."""
    num = 0.0
    den = 0.0
    for xi in (+1, -1):
        phi = model.bias[i]
        for (a, b), w in zip(model.edges, model.coupling):
            if a == i:
                phi += w * sample[b]
            elif b == i:
                phi += w * sample[a]
        weight = math.exp(beta * phi * xi)
        num += xi * weight
        den += weight
    return num / den


def brute_conditional_pair(model, beta, i, j, sample) -> float:
    """Four-term conditional sum over (x_i, x_j) given sampled surroundings."""
    coupling_ij = model.coupling_of(i, j)
    terms = []
    for xi, xj in itertools.product((+1, -1), repeat=2):
        expo = model.bias[i] * xi + model.bias[j] * xj + coupling_ij * xi * xj
        for (a, b), w in zip(model.edges, model.coupling):
            for u, v in ((a, b), (b, a)):
                if u == i and v != j:
                    expo += w * xi * sample[v]
                elif u == j and v != i:
                    expo += w * xj * sample[v]
        terms.append((xi * xj, beta * expo))
    shift = max(e for _, e in terms)
    num = math.fsum(s * math.exp(e - shift) for s, e in terms)
    den = math.fsum(math.exp(e - shift) for _, e in terms)
    return num / den


def boltzmann_vector(model, beta, configs) -> np.ndarray:
    """Exact probabilities of the given configuration list."""
    log_w = np.array([-beta * brute_energy(model, c) for c in configs])
    w = np.exp(log_w - log_w.max())
    return w / w.sum()


def site_update_matrix(model, beta, site, configs) -> np.ndarray:
    """Dense transition matrix of one single-site heat-bath update."""
    index = {tuple(c): a for a, c in enumerate(configs)}
    size = len(configs)
    t = np.zeros((size, size))
    for a, c in enumerate(configs):
        phi = brute_local_field(model, beta, site, c)
        p_up = 0.5 * (1.0 + math.tanh(phi))
        for xi, prob in ((1, p_up), (-1, 1.0 - p_up)):
            c2 = c.copy()
            c2[site] = xi
            t[index[tuple(c2)], a] += prob
    return t


def gibbs_sweep_matrix(model, beta, configs) -> np.ndarray:
    """Composite matrix of a full sweep, site 0 applied first."""
    t = np.eye(len(configs))
    for site in range(model.n):
        t = site_update_matrix(model, beta, site, configs) @ t
    return t


def blocked_sweep_matrix(model, beta, configs) -> np.ndarray:
    """T(x'|x) = P(x'_layer1 | x'_layer0) P(x'_layer0 | x_layer1)."""
    n0, _ = model.layers
    size = len(configs)
    t = np.zeros((size, size))
    for a, c in enumerate(configs):
        for b, c2 in enumerate(configs):
            prob = 1.0
            # layer 0 given old layer 1
            for i in range(n0):
                phi = brute_local_field(model, beta, i, c)
                p_up = 0.5 * (1.0 + math.tanh(phi))
                prob *= p_up if c2[i] == 1 else 1.0 - p_up
            # layer 1 given new layer 0
            mixed = c.copy()
            mixed[:n0] = c2[:n0]
            for j in range(n0, model.n):
                phi = brute_local_field(model, beta, j, mixed)
                p_up = 0.5 * (1.0 + math.tanh(phi))
                prob *= p_up if c2[j] == 1 else 1.0 - p_up
            t[b, a] = prob
    return t


def swap_move_matrix(model, beta_a, beta_b, configs) -> np.ndarray:
    """Replica-exchange move on the product space of two replicas."""
    size = len(configs)
    t = np.zeros((size * size, size * size))
    for a, ca in enumerate(configs):
        for b, cb in enumerate(configs):
            src = a * size + b
            delta = (beta_a - beta_b) * (brute_energy(model, ca) - brute_energy(model, cb))
            accept = 1.0 if delta >= 0 else math.exp(delta)
            t[b * size + a, src] += accept
            t[src, src] += 1.0 - accept
    return t
