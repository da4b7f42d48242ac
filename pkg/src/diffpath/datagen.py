"""Synthetic benchmark protocol: paired scale-free precision structures that
differ in a controlled edge set, and heterogeneous rank-transformed sampling.

All generators are pure functions of their seed; identical seeds give
bit-identical outputs.
"""

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .covariance import Dataset, DatasetCollection
from .validation import check_symmetric

__all__ = [
    "GraphStructure",
    "PrecisionPair",
    "SyntheticInstance",
    "TRANSFORM_TAGS",
    "apply_transforms",
    "scale_free_graph",
    "perturb_graph",
    "build_precision_pair",
    "precision_to_correlation",
    "random_transform_set",
    "sample_npn",
    "sample_collection",
    "synthetic_instance",
]


def seed_sequence(seed):
    """Normalize ints / None / SeedSequence into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass(frozen=True)
class GraphStructure:
    """Undirected simple graph on [0, d); edges as (i, j) with i < j."""

    dim: int
    edges: frozenset

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < j < self.dim):
                raise ValueError(f"bad edge ({i}, {j}) for dimension {self.dim}")

    @property
    def n_edges(self):
        return len(self.edges)

    def degrees(self):
        deg = np.zeros(self.dim, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(frozen=True)
class PrecisionPair:
    omega: np.ndarray
    omega_prime: np.ndarray
    true_delta_support: frozenset  # upper-triangle pairs where the matrices differ


def scale_free_graph(d, attach_m=1, seed=None):
    """Preferential-attachment graph: each arriving node brings `attach_m` edges."""
    if d < 3:
        raise ValueError("d must be >= 3")
    if not 1 <= attach_m < d:
        raise ValueError(f"attach_m must be in [1, {d - 1}), got {attach_m}")
    g = nx.barabasi_albert_graph(d, attach_m, seed=seed)
    edges = frozenset((min(i, j), max(i, j)) for i, j in g.edges())
    return GraphStructure(d, edges)


def perturb_graph(g, k_delete, k_insert=None, seed=None):
    """Delete `k_delete` random edges and insert `k_insert` random non-edges.

    With the one-argument form ``perturb_graph(g, k)``, k must be even and is
    split as k/2 deletions + k/2 insertions, so the symmetric difference of
    the edge sets has size exactly k and the edge count is preserved.
    """
    if k_insert is None:
        if k_delete % 2:
            raise ValueError("total change count must be even (k/2 delete + k/2 insert)")
        k_delete = k_insert = k_delete // 2
    d = g.dim
    existing = sorted(g.edges)
    absent = [
        (i, j) for i in range(d) for j in range(i + 1, d) if (i, j) not in g.edges
    ]
    if k_delete > len(existing):
        raise ValueError(f"cannot delete {k_delete} of {len(existing)} edges")
    if k_insert > len(absent):
        raise ValueError(f"cannot insert {k_insert} edges into {len(absent)} vacancies")
    rng = np.random.default_rng(seed)
    drop = {existing[i] for i in rng.choice(len(existing), size=k_delete, replace=False)}
    add = {absent[i] for i in rng.choice(len(absent), size=k_insert, replace=False)}
    return GraphStructure(d, (g.edges - drop) | add)


def build_precision_pair(g, g_prime, gamma_margin=0.05, seed=None):
    """Edge-weighted precision matrices whose difference lives exactly on the
    perturbed edges.

    Weights are sign(v) + v with v standard normal; an edge present in both
    graphs gets the same draw in both matrices, so shared structure cancels
    in the difference. One common (1 + gamma) I diagonal boost, with
    gamma = max(0, -min eigenvalue) + `gamma_margin` over both weight
    matrices, makes both positive definite without touching the difference.
    """
    if g.dim != g_prime.dim:
        raise ValueError("graphs must share the dimension")
    if gamma_margin <= 0:
        raise ValueError("gamma_margin must be > 0")
    d = g.dim
    rng = np.random.default_rng(seed)
    all_edges = sorted(g.edges | g_prime.edges)
    raw = rng.standard_normal(len(all_edges))
    weights = np.sign(raw) + raw

    base = np.zeros((d, d))
    base_prime = np.zeros((d, d))
    for (i, j), w in zip(all_edges, weights):
        if (i, j) in g.edges:
            base[i, j] = base[j, i] = w
        if (i, j) in g_prime.edges:
            base_prime[i, j] = base_prime[j, i] = w

    smallest = min(np.linalg.eigvalsh(base)[0], np.linalg.eigvalsh(base_prime)[0])
    gamma = max(0.0, -smallest) + gamma_margin
    boost = (1.0 + gamma) * np.eye(d)
    support = frozenset(g.edges ^ g_prime.edges)
    return PrecisionPair(base + boost, base_prime + boost, support)


def precision_to_correlation(omega):
    """Invert a positive definite matrix and rescale to unit diagonal."""
    w = check_symmetric(omega, name="omega")
    eigvals = np.linalg.eigvalsh(w)
    if eigvals[0] <= 0:
        raise ValueError(f"omega must be positive definite (min eigenvalue {eigvals[0]:.3g})")
    cov = np.linalg.inv(w)
    scale = np.sqrt(np.diag(cov))
    corr = cov / np.outer(scale, scale)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return corr


# Observation maps x = f^{-1}(z) for a latent Gaussian coordinate z, keyed by
# the strictly increasing f they invert. "exp2" (f = 2**x) cannot transport a
# Gaussian coordinate onto the real line (its range is positive), and over
# ranks it is indistinguishable from the identity, which is what it maps to.
TRANSFORM_TAGS = {
    "shift2": lambda z: z - 2.0,  # f(x) = 2 + x
    "scale2": lambda z: 0.5 * z,  # f(x) = 2 x
    "exp2": lambda z: z,  # f(x) = 2**x, rank-equivalent to identity
    "cube": np.cbrt,  # f(x) = x**3
    "cbrt": lambda z: z**3,  # f(x) = x**(1/3)
}

_FORWARD = {
    "shift2": lambda x: 2.0 + x,
    "scale2": lambda x: 2.0 * x,
    "exp2": lambda x: x,
    "cube": lambda x: x**3,
    "cbrt": np.cbrt,
}


def random_transform_set(d, seed=None):
    """d transform tags drawn uniformly from the available set."""
    rng = np.random.default_rng(seed)
    tags = sorted(TRANSFORM_TAGS)
    return tuple(tags[i] for i in rng.integers(0, len(tags), size=d))


def apply_transforms(x, tags):
    """Apply the forward (strictly increasing) maps columnwise."""
    x = np.asarray(x, dtype=float)
    if x.shape[1] != len(tags):
        raise ValueError("one tag per column required")
    out = np.empty_like(x)
    for j, tag in enumerate(tags):
        out[:, j] = _FORWARD[tag](x[:, j])
    return out


def sample_npn(sigma, transforms, m, seed=None, source_id=""):
    """Draw m rank-transformed samples whose latent copula is N(0, sigma).

    The latent vector z ~ N(0, sigma) comes from a symmetric eigenvalue
    factorization (valid for singular PSD inputs); each observed coordinate
    is x_j = f_j^{-1}(z_j), so f_j(x_j) recovers the Gaussian coordinate.
    """
    s = check_symmetric(sigma, name="sigma")
    d = s.shape[0]
    if len(transforms) != d:
        raise ValueError(f"need {d} transform tags, got {len(transforms)}")
    unknown = [t for t in transforms if t not in TRANSFORM_TAGS]
    if unknown:
        raise ValueError(f"unknown transform tags: {unknown}")
    if m < 2:
        raise ValueError("m must be >= 2")
    w, vecs = np.linalg.eigh(s)
    factor = vecs * np.sqrt(np.maximum(w, 0.0))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((m, d)) @ factor.T
    x = np.empty_like(z)
    for j, tag in enumerate(transforms):
        x[:, j] = TRANSFORM_TAGS[tag](z[:, j])
    return Dataset(x, source_id=source_id)


def sample_collection(sigma, n_datasets, m_per_dataset, seed=None, prefix="src"):
    """Heterogeneous collection: each dataset gets its own transform set."""
    d = np.asarray(sigma).shape[0]
    children = seed_sequence(seed).spawn(2 * n_datasets)
    datasets = []
    for s in range(n_datasets):
        tags = random_transform_set(d, seed=children[2 * s])
        datasets.append(
            sample_npn(sigma, tags, m_per_dataset, seed=children[2 * s + 1], source_id=f"{prefix}{s}")
        )
    return DatasetCollection(tuple(datasets))


@dataclass(frozen=True)
class SyntheticInstance:
    """One benchmark instance: structure pair, correlations, edge ground truth."""

    pair: PrecisionPair
    sigma: np.ndarray
    sigma_prime: np.ndarray
    truth: frozenset
    graph: GraphStructure
    graph_prime: GraphStructure


def synthetic_instance(d, k_changes=20, attach_m=1, gamma_margin=0.05, seed=None):
    """Scale-free structure, `k_changes` edge perturbations, latent correlations."""
    children = seed_sequence(seed).spawn(3)
    graph = scale_free_graph(d, attach_m, seed=int(children[0].generate_state(1)[0]))
    graph_prime = perturb_graph(graph, k_changes, seed=children[1])
    pair = build_precision_pair(graph, graph_prime, gamma_margin, seed=children[2])
    return SyntheticInstance(
        pair=pair,
        sigma=precision_to_correlation(pair.omega),
        sigma_prime=precision_to_correlation(pair.omega_prime),
        truth=pair.true_delta_support,
        graph=graph,
        graph_prime=graph_prime,
    )
