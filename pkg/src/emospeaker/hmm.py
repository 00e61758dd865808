"""Ergodic hidden Markov models with diagonal-covariance Gaussian mixture states.

All inference runs in the log domain (log-sum-exp), so likelihoods of long
observation sequences never underflow. Training is multi-sequence
expectation-maximization with parameter floors; initialization is a
deterministic seeded k-means over pooled frames. Models serialize to a
versioned text format whose floats round-trip exactly.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

_LOG_2PI = math.log(2.0 * math.pi)

VARIANCE_FLOOR = 1e-6
TRANSITION_FLOOR = 1e-8
WEIGHT_FLOOR = 1e-8


class ModelError(ValueError):
    """Invalid model parameters."""


class ModelFormatError(ModelError):
    """Unreadable or corrupt serialized model."""


class TrainingError(RuntimeError):
    """Training could not proceed (empty data, non-finite likelihood, ...)."""


@dataclass
class GaussianMixture:
    """Diagonal-covariance Gaussian mixture emission density for one state."""

    weights: np.ndarray    # (M,)
    means: np.ndarray      # (M, D)
    variances: np.ndarray  # (M, D)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        self.variances = np.atleast_2d(np.asarray(self.variances, dtype=np.float64))

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def validate(self) -> None:
        if self.weights.ndim != 1:
            raise ModelError("mixture weights must be 1-D")
        if self.means.shape != (self.n_components, self.dim):
            raise ModelError("means shape mismatch")
        if self.variances.shape != self.means.shape:
            raise ModelError("variances shape mismatch")
        if np.any(self.weights < 0) or not math.isclose(
            self.weights.sum(), 1.0, rel_tol=0, abs_tol=1e-8
        ):
            raise ModelError(f"mixture weights must be a distribution, got sum {self.weights.sum()}")
        if np.any(self.variances <= 0):
            raise ModelError("variances must be positive")
        if not (np.all(np.isfinite(self.means)) and np.all(np.isfinite(self.variances))):
            raise ModelError("non-finite mixture parameters")

    def component_log_pdf(self, obs: np.ndarray) -> np.ndarray:
        """log(w_m * N(x_t; mu_m, var_m)) for every frame/component: (T, M)."""
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        diff = obs[:, None, :] - self.means[None, :, :]
        quad = np.sum(diff * diff / self.variances[None, :, :], axis=2)
        log_norm = -0.5 * (self.dim * _LOG_2PI + np.sum(np.log(self.variances), axis=1))
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        return log_w[None, :] + log_norm[None, :] - 0.5 * quad

    def log_pdf(self, obs: np.ndarray) -> np.ndarray:
        """Mixture log density per frame: (T,)."""
        return logsumexp(self.component_log_pdf(obs), axis=1)


@dataclass
class HmmModel:
    """Ergodic HMM: start distribution, dense transitions, one mixture per state."""

    pi: np.ndarray           # (N,)
    transitions: np.ndarray  # (N, N)
    states: list[GaussianMixture] = field(default_factory=list)

    def __post_init__(self):
        self.pi = np.asarray(self.pi, dtype=np.float64)
        self.transitions = np.atleast_2d(np.asarray(self.transitions, dtype=np.float64))

    @property
    def n_states(self) -> int:
        return len(self.pi)

    @property
    def n_mixtures(self) -> int:
        return self.states[0].n_components

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def validate(self) -> None:
        n = self.n_states
        if n < 1 or len(self.states) != n:
            raise ModelError(f"need one emission mixture per state ({len(self.states)} != {n})")
        if self.transitions.shape != (n, n):
            raise ModelError("transition matrix must be (n_states, n_states)")
        if np.any(self.pi < 0) or not math.isclose(self.pi.sum(), 1.0, rel_tol=0, abs_tol=1e-8):
            raise ModelError(f"start probabilities must be a distribution, got sum {self.pi.sum()}")
        row_sums = self.transitions.sum(axis=1)
        if np.any(self.transitions < 0) or not np.allclose(row_sums, 1.0, rtol=0, atol=1e-8):
            raise ModelError(f"transition rows must be distributions, got sums {row_sums}")
        dims = {s.dim for s in self.states}
        comps = {s.n_components for s in self.states}
        if len(dims) != 1 or len(comps) != 1:
            raise ModelError("all states must share dimension and component count")
        for s in self.states:
            s.validate()

    def log_emissions(self, obs: np.ndarray) -> np.ndarray:
        """State-conditional log densities: (T, N)."""
        return np.stack([s.log_pdf(obs) for s in self.states], axis=1)


def _check_obs(model: HmmModel, obs: np.ndarray) -> np.ndarray:
    obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
    if obs.shape[0] == 0:
        raise ModelError("empty observation sequence")
    if obs.shape[1] != model.dim:
        raise ModelError(f"observation dim {obs.shape[1]} != model dim {model.dim}")
    return obs


def log_forward(model: HmmModel, obs: np.ndarray) -> tuple[float, np.ndarray]:
    """Forward recursion. Returns (log P(obs | model), log alpha matrix (T, N))."""
    obs = _check_obs(model, obs)
    log_b = model.log_emissions(obs)
    with np.errstate(divide="ignore"):
        log_pi = np.log(model.pi)
        log_a = np.log(model.transitions)

    log_alpha = np.empty_like(log_b)
    log_alpha[0] = log_pi + log_b[0]
    for t in range(1, len(obs)):
        log_alpha[t] = logsumexp(log_alpha[t - 1][:, None] + log_a, axis=0) + log_b[t]
    return float(logsumexp(log_alpha[-1])), log_alpha


def log_backward(model: HmmModel, obs: np.ndarray, log_b: np.ndarray | None = None) -> np.ndarray:
    """Backward recursion: log beta matrix (T, N)."""
    obs = _check_obs(model, obs)
    if log_b is None:
        log_b = model.log_emissions(obs)
    with np.errstate(divide="ignore"):
        log_a = np.log(model.transitions)
    log_beta = np.zeros_like(log_b)
    for t in range(len(obs) - 2, -1, -1):
        log_beta[t] = logsumexp(log_a + (log_b[t + 1] + log_beta[t + 1])[None, :], axis=1)
    return log_beta


def log_likelihood(model: HmmModel, obs: np.ndarray) -> float:
    return log_forward(model, obs)[0]


def viterbi(model: HmmModel, obs: np.ndarray) -> tuple[np.ndarray, float]:
    """Most likely state path and its joint log probability."""
    obs = _check_obs(model, obs)
    log_b = model.log_emissions(obs)
    with np.errstate(divide="ignore"):
        log_pi = np.log(model.pi)
        log_a = np.log(model.transitions)

    delta = log_pi + log_b[0]
    back = np.zeros((len(obs), model.n_states), dtype=int)
    for t in range(1, len(obs)):
        scores = delta[:, None] + log_a
        back[t] = np.argmax(scores, axis=0)
        delta = scores[back[t], np.arange(model.n_states)] + log_b[t]

    path = np.empty(len(obs), dtype=int)
    path[-1] = int(np.argmax(delta))
    for t in range(len(obs) - 2, -1, -1):
        path[t] = back[t + 1][path[t + 1]]
    return path, float(np.max(delta))


# --- initialization ---------------------------------------------------------------

def _pairwise_sq_dist(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(points * points, axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_seed(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(len(points))]
    min_d2 = _pairwise_sq_dist(points, centroids[:1])[:, 0]
    for j in range(1, k):
        total = min_d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(len(points)))
        else:
            idx = int(rng.choice(len(points), p=min_d2 / total))
        centroids[j] = points[idx]
        min_d2 = np.minimum(min_d2, _pairwise_sq_dist(points, centroids[j : j + 1])[:, 0])
    return centroids


def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator, n_iter: int = 10):
    """Seeded Lloyd iterations; empty clusters reseed to the worst-fit point."""
    n = len(points)
    if n >= k:
        centroids = _kmeans_pp_seed(points, k, rng)
    else:
        spread = points.std(axis=0) + 1e-6
        centroids = points[np.arange(k) % n] + 1e-3 * spread * rng.standard_normal(
            (k, points.shape[1])
        )
    assign = np.zeros(n, dtype=int)
    for _ in range(n_iter):
        d2 = _pairwise_sq_dist(points, centroids)
        assign = np.argmin(d2, axis=1)
        new_centroids = centroids.copy()
        for j in range(k):
            mask = assign == j
            if mask.any():
                new_centroids[j] = points[mask].mean(axis=0)
            else:
                new_centroids[j] = points[np.argmax(d2[np.arange(n), assign])]
        if np.array_equal(new_centroids, centroids):
            break
        centroids = new_centroids
    assign = np.argmin(_pairwise_sq_dist(points, centroids), axis=1)
    return centroids, assign


def init_model(
    sequences: list[np.ndarray],
    n_states: int,
    n_mixtures: int,
    seed: int = 0,
    variance_floor: float = VARIANCE_FLOOR,
) -> HmmModel:
    """Deterministic starting model: k-means clusters dealt to states in blocks.

    Pooled frames are clustered into n_states * n_mixtures groups (k-means++
    seeding from ``seed``); clusters are ordered by centroid coordinate sum and
    assigned to states contiguously. Start and transition distributions begin
    uniform (fully ergodic).
    """
    if not sequences:
        raise TrainingError("no training sequences")
    arrays = [np.atleast_2d(np.asarray(s, dtype=np.float64)) for s in sequences]
    dims = {a.shape[1] for a in arrays}
    if len(dims) != 1:
        raise TrainingError(f"sequences disagree on dimension: {sorted(dims)}")
    points = np.concatenate(arrays, axis=0)
    if not np.all(np.isfinite(points)):
        raise TrainingError("non-finite values in training data")

    rng = np.random.default_rng(seed)
    k = n_states * n_mixtures
    centroids, assign = _kmeans(points, k, rng)

    order = np.argsort(centroids.sum(axis=1), kind="stable")
    global_var = np.maximum(points.var(axis=0), variance_floor)

    states = []
    for j in range(n_states):
        cluster_ids = order[j * n_mixtures : (j + 1) * n_mixtures]
        counts = np.array([(assign == c).sum() for c in cluster_ids], dtype=np.float64)
        weights = _floor_distribution(
            counts / counts.sum() if counts.sum() > 0 else np.full(n_mixtures, 1.0 / n_mixtures),
            WEIGHT_FLOOR,
        )
        means = centroids[cluster_ids].copy()
        variances = np.empty_like(means)
        for m, c in enumerate(cluster_ids):
            members = points[assign == c]
            if len(members) >= 2:
                variances[m] = np.maximum(members.var(axis=0), variance_floor)
            else:
                variances[m] = global_var
        states.append(GaussianMixture(weights=weights, means=means, variances=variances))

    model = HmmModel(
        pi=np.full(n_states, 1.0 / n_states),
        transitions=np.full((n_states, n_states), 1.0 / n_states),
        states=states,
    )
    model.validate()
    return model


def _floor_distribution(p: np.ndarray, floor: float) -> np.ndarray:
    """Raise entries below ``floor`` and renormalize; identity when nothing binds."""
    if not np.any(p < floor):
        return p
    p = np.maximum(p, floor)
    return p / p.sum()


# --- training ---------------------------------------------------------------------

@dataclass
class TrainingResult:
    model: HmmModel
    log_likelihoods: list[float]
    converged: bool

    @property
    def n_iterations(self) -> int:
        return len(self.log_likelihoods)


def baum_welch_train(
    model: HmmModel,
    sequences: list[np.ndarray],
    *,
    max_iterations: int = 40,
    tolerance: float = 1e-4,
    variance_floor: float = VARIANCE_FLOOR,
    transition_floor: float = TRANSITION_FLOOR,
    weight_floor: float = WEIGHT_FLOOR,
    on_iteration=None,
) -> TrainingResult:
    """Multi-sequence EM re-estimation of every parameter group.

    Each iteration records the total log-likelihood of the model *entering*
    that iteration, so the recorded sequence is non-decreasing (up to floor
    adjustments). Components or states that receive no responsibility keep
    their previous parameters. Stops early once the relative improvement
    drops below ``tolerance``.
    """
    model.validate()
    obs_list = [_check_obs(model, s) for s in sequences]
    if not obs_list:
        raise TrainingError("no training sequences")

    n, m, d = model.n_states, model.n_mixtures, model.dim
    history: list[float] = []
    converged = False

    for iteration in range(max_iterations):
        with np.errstate(divide="ignore"):
            log_a = np.log(model.transitions)

        pi_acc = np.zeros(n)
        xi_acc = np.zeros((n, n))
        comp_acc = np.zeros((n, m))
        mean_acc = np.zeros((n, m, d))
        sq_acc = np.zeros((n, m, d))
        total_ll = 0.0

        for seq_idx, obs in enumerate(obs_list):
            comp_log = np.stack(
                [s.component_log_pdf(obs) for s in model.states], axis=1
            )                                        # (T, N, M)
            log_b = logsumexp(comp_log, axis=2)      # (T, N)
            ll, log_alpha = _forward_given(model, log_b)
            if not np.isfinite(ll):
                raise TrainingError(
                    f"sequence {seq_idx}: non-finite log-likelihood {ll} "
                    f"(length {len(obs)}) at iteration {iteration}"
                )
            log_beta = _backward_given(log_a, log_b)
            total_ll += ll

            log_gamma = log_alpha + log_beta - ll    # (T, N)
            gamma = np.exp(log_gamma)
            pi_acc += gamma[0]
            for t in range(len(obs) - 1):
                xi_acc += np.exp(
                    log_alpha[t][:, None] + log_a
                    + (log_b[t + 1] + log_beta[t + 1])[None, :] - ll
                )
            resp = np.exp(log_gamma[:, :, None] + comp_log - log_b[:, :, None])
            comp_acc += resp.sum(axis=0)
            mean_acc += np.einsum("tnm,td->nmd", resp, obs)
            sq_acc += np.einsum("tnm,td->nmd", resp, obs * obs)

        history.append(total_ll)
        if on_iteration is not None:
            on_iteration(iteration, total_ll, model)
        if len(history) >= 2:
            prev = history[-2]
            if total_ll - prev < tolerance * max(1.0, abs(prev)):
                converged = True
                break

        model = _reestimate(
            model, pi_acc, xi_acc, comp_acc, mean_acc, sq_acc,
            variance_floor, transition_floor, weight_floor, len(obs_list),
        )

    return TrainingResult(model=model, log_likelihoods=history, converged=converged)


def _forward_given(model: HmmModel, log_b: np.ndarray) -> tuple[float, np.ndarray]:
    with np.errstate(divide="ignore"):
        log_pi = np.log(model.pi)
        log_a = np.log(model.transitions)
    log_alpha = np.empty_like(log_b)
    log_alpha[0] = log_pi + log_b[0]
    for t in range(1, len(log_b)):
        log_alpha[t] = logsumexp(log_alpha[t - 1][:, None] + log_a, axis=0) + log_b[t]
    return float(logsumexp(log_alpha[-1])), log_alpha


def _backward_given(log_a: np.ndarray, log_b: np.ndarray) -> np.ndarray:
    log_beta = np.zeros_like(log_b)
    for t in range(len(log_b) - 2, -1, -1):
        log_beta[t] = logsumexp(log_a + (log_b[t + 1] + log_beta[t + 1])[None, :], axis=1)
    return log_beta


def _reestimate(
    model, pi_acc, xi_acc, comp_acc, mean_acc, sq_acc,
    variance_floor, transition_floor, weight_floor, n_sequences,
) -> HmmModel:
    n, m, _ = model.n_states, model.n_mixtures, model.dim

    pi = _floor_distribution(pi_acc / n_sequences, transition_floor)

    transitions = model.transitions.copy()
    for i in range(n):
        row_total = xi_acc[i].sum()
        if row_total > 0:
            transitions[i] = _floor_distribution(xi_acc[i] / row_total, transition_floor)

    states = []
    for j in range(n):
        old = model.states[j]
        state_total = comp_acc[j].sum()
        weights = old.weights.copy()
        means = old.means.copy()
        variances = old.variances.copy()
        if state_total > 0:
            weights = _floor_distribution(comp_acc[j] / state_total, weight_floor)
            for k in range(m):
                occ = comp_acc[j, k]
                if occ > 0:
                    mu = mean_acc[j, k] / occ
                    var = sq_acc[j, k] / occ - mu * mu
                    means[k] = mu
                    variances[k] = np.maximum(var, variance_floor)
        states.append(GaussianMixture(weights=weights, means=means, variances=variances))

    new_model = HmmModel(pi=pi, transitions=transitions, states=states)
    new_model.validate()
    return new_model


# --- serialization -----------------------------------------------------------------

MODEL_MAGIC = "EMSPHMM"
MODEL_VERSION = 1


def _fmt(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def model_to_text(model: HmmModel) -> str:
    """Serialize with full float precision (``repr`` round-trips exactly)."""
    model.validate()
    lines = [
        f"{MODEL_MAGIC} {MODEL_VERSION}",
        f"states {model.n_states} mixtures {model.n_mixtures} dim {model.dim}",
        f"pi {_fmt(model.pi)}",
    ]
    for i in range(model.n_states):
        lines.append(f"A {i} {_fmt(model.transitions[i])}")
    for j, s in enumerate(model.states):
        lines.append(f"state {j} weights {_fmt(s.weights)}")
        for k in range(s.n_components):
            lines.append(f"state {j} mean {k} {_fmt(s.means[k])}")
            lines.append(f"state {j} var {k} {_fmt(s.variances[k])}")
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> HmmModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    it = iter(lines)

    def take(prefix: str) -> list[str]:
        try:
            line = next(it)
        except StopIteration:
            raise ModelFormatError(f"unexpected end of model file (wanted {prefix!r})") from None
        tokens = line.split()
        want = prefix.split()
        if tokens[: len(want)] != want:
            raise ModelFormatError(f"expected line starting {prefix!r}, got {line!r}")
        return tokens[len(want):]

    header = take(MODEL_MAGIC)
    if header != [str(MODEL_VERSION)]:
        raise ModelFormatError(f"unsupported model version {header}")
    tokens = take("states")
    try:
        n = int(tokens[0])
        m = int(tokens[tokens.index("mixtures") + 1])
        d = int(tokens[tokens.index("dim") + 1])
    except (ValueError, IndexError) as exc:
        raise ModelFormatError(f"bad shape line: {tokens}") from exc

    def floats(tokens: list[str], count: int) -> np.ndarray:
        if len(tokens) != count:
            raise ModelFormatError(f"expected {count} numbers, got {len(tokens)}")
        try:
            return np.array([float(t) for t in tokens])
        except ValueError as exc:
            raise ModelFormatError(str(exc)) from exc

    pi = floats(take("pi"), n)
    transitions = np.stack([floats(take(f"A {i}"), n) for i in range(n)])
    states = []
    for j in range(n):
        weights = floats(take(f"state {j} weights"), m)
        means = np.empty((m, d))
        variances = np.empty((m, d))
        for k in range(m):
            means[k] = floats(take(f"state {j} mean {k}"), d)
            variances[k] = floats(take(f"state {j} var {k}"), d)
        states.append(GaussianMixture(weights=weights, means=means, variances=variances))
    leftover = list(it)
    if leftover:
        raise ModelFormatError(f"{len(leftover)} trailing line(s) in model file")

    model = HmmModel(pi=pi, transitions=transitions, states=states)
    try:
        model.validate()
    except ModelError as exc:
        raise ModelFormatError(f"deserialized model invalid: {exc}") from exc
    return model


def save_model(model: HmmModel, path: str | Path) -> None:
    Path(path).write_text(model_to_text(model), encoding="utf-8")


def load_model(path: str | Path) -> HmmModel:
    path = Path(path)
    if not path.exists():
        raise ModelFormatError(f"model file not found: {path}")
    return model_from_text(path.read_text(encoding="utf-8"))
