"""Independent reference implementations the fast code is checked against.

Everything here trades speed for obviousness: explicit loops, probability
domain, no shared code with the package internals.
"""

import itertools
import math

import numpy as np

from emospeaker.hmm import GaussianMixture, HmmModel


def mixture_density(state: GaussianMixture, x) -> float:
    """Plain probability-domain diagonal-Gaussian mixture density."""
    density = 0.0
    for m in range(state.n_components):
        component = 1.0
        for d in range(state.dim):
            var = state.variances[m, d]
            diff = x[d] - state.means[m, d]
            component *= math.exp(-0.5 * diff * diff / var) / math.sqrt(2.0 * math.pi * var)
        density += state.weights[m] * component
    return density


def brute_force_log_likelihood(model: HmmModel, obs) -> float:
    """Sum P(path) * P(obs | path) over every state path, then log."""
    obs = np.atleast_2d(obs)
    total = 0.0
    for path in itertools.product(range(model.n_states), repeat=len(obs)):
        p = model.pi[path[0]]
        for t in range(1, len(obs)):
            p *= model.transitions[path[t - 1], path[t]]
        for t, j in enumerate(path):
            p *= mixture_density(model.states[j], obs[t])
        total += p
    return math.log(total)


def brute_force_viterbi(model: HmmModel, obs):
    """Best path by exhaustive enumeration: (path tuple, log joint prob)."""
    obs = np.atleast_2d(obs)
    best_path, best_log = None, -math.inf
    for path in itertools.product(range(model.n_states), repeat=len(obs)):
        p = model.pi[path[0]]
        for t in range(1, len(obs)):
            p *= model.transitions[path[t - 1], path[t]]
        for t, j in enumerate(path):
            p *= mixture_density(model.states[j], obs[t])
        if p > 0 and math.log(p) > best_log:
            best_path, best_log = path, math.log(p)
    return best_path, best_log


def random_model(rng: np.random.Generator, n_states: int, n_mixtures: int, dim: int) -> HmmModel:
    """Fully random valid model: Dirichlet distributions, spread-out means."""
    states = []
    for _ in range(n_states):
        states.append(
            GaussianMixture(
                weights=rng.dirichlet(np.ones(n_mixtures)),
                means=rng.normal(0.0, 2.0, (n_mixtures, dim)),
                variances=rng.uniform(0.2, 2.0, (n_mixtures, dim)),
            )
        )
    model = HmmModel(
        pi=rng.dirichlet(np.ones(n_states)),
        transitions=np.stack([rng.dirichlet(np.ones(n_states)) for _ in range(n_states)]),
        states=states,
    )
    model.validate()
    return model


def naive_frame_slices(signal, frame_length: int, hop: int):
    """Framing by explicit slicing, the obvious way."""
    frames = []
    start = 0
    while start + frame_length <= len(signal):
        frames.append(np.asarray(signal[start : start + frame_length], dtype=float))
        start += hop
    return frames


def direct_band_power(power_row, lo: int, hi: int) -> float:
    """Sum of spectral power over inclusive bin range, plain loop."""
    total = 0.0
    for b in range(lo, hi + 1):
        total += float(power_row[b])
    return total
