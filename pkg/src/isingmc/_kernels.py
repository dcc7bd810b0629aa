"""Compiled inner loops for the Markov chain samplers.

The single kernel advances N independent chains through a block of full
Gibbs sweeps. Chains are independent, each reads only its own uniform
stream and writes only its own row, so the prange parallelization is
bit-reproducible regardless of thread count.
"""

import numba as nb
import numpy as np


@nb.njit(parallel=True, cache=True)
def sweep_block(spins, betas, u, bias, nbr_ptr, nbr_idx, nbr_cpl,
                edge_i, edge_j, edge_cpl, energies, record_energy):
    """Run B full sweeps on N chains.

    spins: (N, n) float64 state, entries +-1, updated in place.
    betas: (N, B) effective inverse temperature per chain per sweep.
    u: (N, B, n) uniforms, consumed in site order 0..n-1 within each sweep.
    energies: (N, B) output, written only when record_energy is True with
        the energy of chain c after sweep b.

    Each site is resampled from P(x_i = +1 | rest) = (1 + tanh(phi_i))/2
    with phi_i the local field at that chain's current sweep temperature;
    sites are visited in the fixed order 0..n-1.
    """
    num_chains, n = spins.shape
    num_sweeps = betas.shape[1]
    num_e = edge_i.shape[0]
    for c in nb.prange(num_chains):
        for b in range(num_sweeps):
            beta = betas[c, b]
            for i in range(n):
                phi = bias[i]
                for t in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    phi += nbr_cpl[t] * spins[c, nbr_idx[t]]
                phi *= beta
                if u[c, b, i] < 0.5 * (1.0 + np.tanh(phi)):
                    spins[c, i] = 1.0
                else:
                    spins[c, i] = -1.0
            if record_energy:
                e = 0.0
                for i in range(n):
                    e -= bias[i] * spins[c, i]
                for t in range(num_e):
                    e -= edge_cpl[t] * spins[c, edge_i[t]] * spins[c, edge_j[t]]
                energies[c, b] = e
