"""Scenario generators for the FDR/power experiments.

Each scenario draws per-hypothesis null probabilities from a distribution
whose spread encodes how informative the prior ordering is, sorts them to
define the ranking, draws truths and z-values, and converts to p-values via
``p = 1 - Phi(z)``. Robustness knobs: a skewed (noncentral-gamma) alternative,
block-correlated z-values, partial or full shuffling of the ranking, and
contaminated alternative/null p-values.

Reproducibility: all randomness flows through numpy's counter-based Philox
generator seeded by ``SeedSequence``; a scenario plus a seed pins the dataset
bit-for-bit, and replicate substreams are independent of execution order.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigError, InputError
from .mixture import TestData

__all__ = [
    "ScenarioConfig",
    "SimulatedData",
    "gen_pi0",
    "gen_truth_and_pvalues",
    "shuffle_covariate",
    "apply_variant",
    "simulate_scenario",
    "gaussian_alternative_density",
    "write_tsv",
]

INFORMATIVENESS_LEVELS = ("weak", "moderate", "high")
ALTERNATIVES = ("normal", "noncentral-gamma")
DEPENDENCE_KINDS = ("independent", "block")
VARIANTS = ("none", "varying_f1", "varying_f0")
DENSITY_TARGETS = (0.0, 0.01, 0.05, 0.10, 0.20)

NUM_BLOCKS = 100  # block-dependence layout: 100 blocks, two equal sub-blocks each

# Per-(informativeness, signal density) generator parameters, calibrated so
# the expected alternative fraction mean(1 - pi0) hits the density target;
# regenerate/verify with scripts/calibrate_scenarios.py.
_NARROW_SIGMA = 0.005

_WEAK_MU = {0.01: 0.99, 0.05: 0.95, 0.10: 0.90, 0.20: 0.80}

_MODERATE_AB = {
    0.01: (9.9, 0.1),
    0.05: (9.5, 0.5),
    0.10: (9.0, 1.0),
    0.20: (8.0, 2.0),
}

_HIGH_PARAMS = {
    # pi_h: weight of the alternative-rich group N_C(mu1, sigma1^2);
    # the null-rich group is N_C(mu2, 0.005^2).
    0.01: {"pi_h": 0.004520, "mu1": 0.2, "sigma1": 0.1, "mu2": 0.995},
    0.05: {"pi_h": 0.038735, "mu1": 0.2, "sigma1": 0.1, "mu2": 0.98},
    0.10: {"pi_h": 0.103295, "mu1": 0.2, "sigma1": 0.1, "mu2": 0.98},
    0.20: {"pi_h": 0.232415, "mu1": 0.2, "sigma1": 0.1, "mu2": 0.98},
}


@dataclass(frozen=True)
class ScenarioConfig:
    """One cell of the experiment grid; JSON-serializable via to/from_dict."""

    m: int = 10_000
    informativeness: str = "high"
    density_target: float = 0.10
    ks: float = 2.5
    alternative: str = "normal"
    dependence: str = "independent"
    covariate_noise: float = 0.0
    variant: str = "none"
    seed: int = 0

    def validate(self) -> "ScenarioConfig":
        if not isinstance(self.m, int) or self.m < 1:
            raise ConfigError(f"m: must be a positive integer, got {self.m!r}")
        if self.informativeness not in INFORMATIVENESS_LEVELS:
            raise ConfigError(f"informativeness: must be one of {INFORMATIVENESS_LEVELS}, got {self.informativeness!r}")
        if self.density_target not in DENSITY_TARGETS:
            raise ConfigError(
                f"density_target: no calibrated parameters for {self.density_target!r}; "
                f"supported values: {DENSITY_TARGETS}"
            )
        if not self.ks > 0:
            raise ConfigError(f"ks: must be positive, got {self.ks!r}")
        if self.alternative not in ALTERNATIVES:
            raise ConfigError(f"alternative: must be one of {ALTERNATIVES}, got {self.alternative!r}")
        if self.alternative == "noncentral-gamma" and self.ks * self.ks <= 2.0:
            raise ConfigError("ks: shape-2 noncentral-gamma moment match needs ks > sqrt(2)")
        if self.dependence not in DEPENDENCE_KINDS:
            raise ConfigError(f"dependence: must be one of {DEPENDENCE_KINDS}, got {self.dependence!r}")
        if self.dependence == "block" and self.m % (2 * NUM_BLOCKS) != 0:
            raise ConfigError(f"m: block dependence needs m divisible by {2 * NUM_BLOCKS}, got {self.m}")
        if self.dependence == "block" and self.alternative != "normal":
            raise ConfigError("dependence: block design is defined for the normal alternative only")
        if self.covariate_noise not in (0.0, 0.5, 1.0):
            raise ConfigError(f"covariate_noise: must be 0, 0.5 or 1, got {self.covariate_noise!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant: must be one of {VARIANTS}, got {self.variant!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed: must be a nonnegative integer, got {self.seed!r}")
        return self

    def label(self) -> str:
        parts = [self.informativeness, f"d{self.density_target:g}", f"ks{self.ks:g}"]
        if self.alternative != "normal":
            parts.append("gamma")
        if self.dependence != "independent":
            parts.append("block")
        if self.covariate_noise:
            parts.append(f"noise{self.covariate_noise:g}")
        if self.variant != "none":
            parts.append(self.variant)
        return "-".join(parts)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scenario field(s): {sorted(unknown)}")
        cfg = cls(**d)
        return cfg.validate()


@dataclass(frozen=True)
class SimulatedData:
    """Ground-truth-aware dataset: ranked p-values plus generator state."""

    data: TestData
    pi0_true: np.ndarray
    z: np.ndarray
    config: ScenarioConfig

    @property
    def pvalues(self) -> np.ndarray:
        return self.data.pvalues

    @property
    def truth(self) -> np.ndarray:
        return self.data.truth


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def _truncnorm01(rng, mu, sigma, size):
    """N(mu, sigma^2) truncated to [0, 1] by rejection."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        draw = rng.normal(mu, sigma, size=2 * (size - filled) + 16)
        keep = draw[(draw >= 0.0) & (draw <= 1.0)]
        take = min(keep.size, size - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def _ncgamma_params(ks):
    """Scale and mixing rate of the shape-2 noncentral gamma matching
    mean ks and variance 1 (theta*(2+delta)=ks, theta^2*(2+2*delta)=1)."""
    c = 2.0 * ks * ks
    if c <= 4.0:
        raise ConfigError("ks: shape-2 noncentral-gamma moment match needs ks > sqrt(2)")
    delta = ((c - 4.0) + np.sqrt((c - 4.0) * c)) / 2.0
    theta = ks / (2.0 + delta)
    return theta, delta


def _ncgamma(rng, ks, size):
    """Shape-2 noncentral gamma draws (Poisson-mixed gamma shapes)."""
    theta, delta = _ncgamma_params(ks)
    extra = rng.poisson(delta, size=size)
    return rng.gamma(2.0 + extra, theta)


def _block_noise(m, rng):
    """Unit-variance noise: +0.5 within sub-blocks, -0.5 across the two
    sub-blocks of a block, independent across the NUM_BLOCKS blocks."""
    block = m // NUM_BLOCKS
    half = block // 2
    eps = rng.standard_normal(m)
    shared = np.repeat(rng.standard_normal(NUM_BLOCKS), block)
    sign = np.tile(np.repeat([1.0, -1.0], half), NUM_BLOCKS)
    return np.sqrt(0.5) * eps + np.sqrt(0.5) * sign * shared


def gen_pi0(config: ScenarioConfig, rng) -> np.ndarray:
    """Draw the per-hypothesis null probabilities, sorted ascending.

    The sort defines the prior order (most promising first). Expected
    alternative fraction matches the density target by calibration; the
    realized mean is a random quantity checked distributionally in tests.
    """
    config.validate()
    rng = _as_generator(rng)
    t = config.density_target
    if t == 0.0:
        return np.ones(config.m)
    m = config.m
    if config.informativeness == "weak":
        draws = _truncnorm01(rng, _WEAK_MU[t], _NARROW_SIGMA, m)
    elif config.informativeness == "moderate":
        a, b = _MODERATE_AB[t]
        draws = rng.beta(a, b, size=m)
    else:
        par = _HIGH_PARAMS[t]
        rich = rng.random(m) < par["pi_h"]
        draws = np.empty(m)
        draws[rich] = _truncnorm01(rng, par["mu1"], par["sigma1"], int(rich.sum()))
        draws[~rich] = _truncnorm01(rng, par["mu2"], _NARROW_SIGMA, int(m - rich.sum()))
    return np.sort(draws)


def gen_truth_and_pvalues(pi0, config: ScenarioConfig, rng) -> SimulatedData:
    """Draw truths and z-values given the sorted priors; convert to p-values.

    theta_i ~ Bernoulli(1 - pi0_i); z_i ~ N(ks * theta_i, 1) (independent) or
    the moment-matched shape-2 noncentral gamma for alternatives, or the
    block-correlated normal design with block membership randomized against
    the prior order. p_i = 1 - Phi(z_i).
    """
    config.validate()
    rng = _as_generator(rng)
    pi0 = np.asarray(pi0, dtype=np.float64)
    m = pi0.size
    theta = rng.random(m) < 1.0 - pi0
    if config.dependence == "block":
        if m % (2 * NUM_BLOCKS) != 0:
            raise InputError(f"block dependence needs m divisible by {2 * NUM_BLOCKS}, got {m}")
        noise = _block_noise(m, rng)
        z = config.ks * theta + noise[rng.permutation(m)]
    elif config.alternative == "noncentral-gamma":
        z = rng.standard_normal(m)
        z[theta] = _ncgamma(rng, config.ks, int(theta.sum()))
    else:
        z = rng.standard_normal(m) + config.ks * theta
    pvals = ndtr(-z)
    data = TestData(pvals, order_source="covariate", truth=theta)
    return SimulatedData(data=data, pi0_true=pi0, z=z, config=config)


def shuffle_covariate(sim: SimulatedData, fraction, seed) -> SimulatedData:
    """Permute a random fraction of prior-order positions uniformly.

    Whole rows move together (p-value, truth, true prior, z), degrading the
    ranking without touching the marginal mixture. Fraction 1 destroys the
    order information entirely; fraction 0 is the identity.
    """
    if fraction not in (0.0, 0.5, 1.0):
        raise InputError(f"fraction must be 0, 0.5 or 1, got {fraction!r}")
    if fraction == 0.0:
        return sim
    rng = _as_generator(seed)
    m = sim.data.m
    k = int(round(fraction * m))
    pos = rng.choice(m, size=k, replace=False)
    idx = np.arange(m)
    idx[pos] = pos[rng.permutation(k)]
    data = TestData(sim.pvalues[idx], order_source="covariate", truth=sim.truth[idx])
    return SimulatedData(data=data, pi0_true=sim.pi0_true[idx], z=sim.z[idx], config=sim.config)


def apply_variant(sim: SimulatedData, variant, seed) -> SimulatedData:
    """Contaminate a designated 20% subset's p-values.

    ``varying_f1``: the most promising fifth of the alternatives (lowest prior
    order) get p ~ Unif(0, 0.02). ``varying_f0``: the fifth of the nulls with
    the highest prior order get p ~ Unif(0.5, 1). z is re-derived for affected
    rows so p = 1 - Phi(z) keeps holding; all other rows are untouched.
    """
    if variant not in ("varying_f1", "varying_f0"):
        raise InputError(f"variant must be 'varying_f1' or 'varying_f0', got {variant!r}")
    rng = _as_generator(seed)
    p = sim.pvalues.copy()
    z = sim.z.copy()
    truth = sim.truth
    if truth is None:
        raise InputError("variant contamination needs truth labels")
    if variant == "varying_f1":
        alt = np.flatnonzero(truth)
        sel = alt[: int(round(0.2 * alt.size))]
        p[sel] = rng.uniform(0.0, 0.02, size=sel.size)
    else:
        nul = np.flatnonzero(~truth)
        n_aff = int(round(0.2 * nul.size))
        sel = nul[nul.size - n_aff:]
        p[sel] = rng.uniform(0.5, 1.0, size=sel.size)
    z[sel] = -ndtri(p[sel])
    data = TestData(p, order_source="covariate", truth=truth)
    return SimulatedData(data=data, pi0_true=sim.pi0_true, z=z, config=sim.config)


def simulate_scenario(config: ScenarioConfig, seed=None) -> SimulatedData:
    """Generate one full dataset for a scenario (all knobs applied).

    ``seed`` (int or SeedSequence) overrides ``config.seed``. Four independent
    substreams drive prior draws, truth/z draws, covariate shuffling, and
    variant contamination, so toggling one knob leaves the others' draws
    unchanged.
    """
    config.validate()
    entropy = config.seed if seed is None else seed
    ss = entropy if isinstance(entropy, np.random.SeedSequence) else np.random.SeedSequence(entropy)
    sub = ss.spawn(4)
    pi0 = gen_pi0(config, sub[0])
    sim = gen_truth_and_pvalues(pi0, config, sub[1])
    if config.covariate_noise:
        sim = shuffle_covariate(sim, config.covariate_noise, sub[2])
    if config.variant != "none":
        sim = apply_variant(sim, config.variant, sub[3])
    return sim


def gaussian_alternative_density(pvalues, ks):
    """Density of p = 1 - Phi(z), z ~ N(ks, 1): exp(ks * z(p) - ks^2 / 2)."""
    z = -ndtri(np.asarray(pvalues, dtype=np.float64))
    return np.exp(ks * z - 0.5 * ks * ks)


def write_tsv(sim: SimulatedData, path) -> None:
    """Export as TSV: index (1-based prior order), pvalue, pi0_true, theta, z."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index\tpvalue\tpi0_true\ttheta\tz\n")
        theta = sim.truth.astype(int)
        for i in range(sim.data.m):
            fh.write(
                f"{i + 1}\t{sim.pvalues[i]:.17g}\t{sim.pi0_true[i]:.17g}\t{theta[i]}\t{sim.z[i]:.17g}\n"
            )
