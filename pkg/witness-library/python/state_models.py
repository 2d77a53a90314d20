"""
State Models - analytic state families with closed-form displaced photon-number correlations.

Key Features:
- Coherent-state superpositions (Bell-like two-mode states, four-mode cats) evaluated from
  coherent-state overlaps
- Two-mode squeezed vacuum and its coherently photon-subtracted variant
- Gaussian amplitude noise integrated with a two-dimensional Gauss-Hermite rule
- Expectation of a witness test operator dispatched to the fastest evaluator per family
- JSON (de)serialization of states, complex numbers written as {"re": ..., "im": ...}

Conventions:
    |xi> = exp[-xi a^dag b^dag + xi^* a b]|0,0> expands as
    sum_n (-e^{i arg xi} tanh|xi|)^n / cosh|xi| |n,n>, so <ab> = -sinh|2xi| e^{i arg xi} / 2.
"""

import functools
import json
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DegenerateNorm, ImaginaryResidual, ModelMismatch, QuadratureNotConverged, SchemaError
from fock_oracle import DensityMatrix, FockCutoff, make_density, witness_expectation

logger = logging.getLogger(__name__)

NORM_FLOOR = 1e-12
IMAGINARY_TOLERANCE = 1e-10
DEFAULT_QUADRATURE_ORDER = 20
MAX_QUADRATURE_ORDER = 160
QUADRATURE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class CoherentSuperposition:
    """
    Superposition sum_t c_t |gamma_t1> x ... x |gamma_tN> of multimode coherent states.

    The stored coefficients are unnormalized; every evaluator normalizes with the norm
    computed from coherent-state overlaps.

    Attributes:
        n_modes (int): Number of modes
        terms (tuple): Pairs (coeff, amplitudes) with one complex amplitude per mode
    """
    n_modes: int
    terms: Tuple[Tuple[complex, Tuple[complex, ...]], ...]

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("A coherent superposition needs at least one mode")
        if not self.terms:
            raise ValueError("A coherent superposition needs at least one term")
        for coeff, amplitudes in self.terms:
            if len(amplitudes) != self.n_modes:
                raise ModelMismatch(f"Term has {len(amplitudes)} amplitudes, expected {self.n_modes}")
        if superposition_norm(self) < NORM_FLOOR:
            raise DegenerateNorm("Coherent superposition has vanishing norm")

    def coefficient_array(self) -> np.ndarray:
        return np.array([complex(c) for c, _ in self.terms])

    def amplitude_array(self) -> np.ndarray:
        return np.array([[complex(a) for a in amps] for _, amps in self.terms])


@dataclass(frozen=True)
class Tmsv:
    """Two-mode squeezed vacuum with complex squeezing parameter xi."""
    xi: complex

    @property
    def n_modes(self) -> int:
        return 2


@dataclass(frozen=True)
class PhotonSubtractedTmsv:
    """
    Squeezed vacuum after the coherent subtraction (sqrt(kappa) a + sqrt(1-kappa) b)|xi>.

    Attributes:
        xi (complex): Squeezing parameter, nonzero
        kappa (float): Share of the subtraction taken from the first mode, in [0, 1]
    """
    xi: complex
    kappa: float

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")
        if photon_subtracted_norm(self.xi) < NORM_FLOOR:
            raise DegenerateNorm("Photon subtraction from the vacuum has vanishing norm")

    @property
    def n_modes(self) -> int:
        return 2


@dataclass(frozen=True)
class NoisyFourModeCat:
    """
    Four-mode cat (|g,g,g,g> + |-g,-g,-g,-g>) with a Gaussian-distributed amplitude g.

    The amplitude has mean gamma and standard deviation sigma in each quadrature;
    sigma = 0 is the pure cat.
    """
    gamma: complex
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")

    @property
    def n_modes(self) -> int:
        return 4

    def pure_component(self, gamma: complex) -> CoherentSuperposition:
        """Return the pure cat at amplitude gamma."""
        gamma = complex(gamma)
        return CoherentSuperposition(n_modes=4, terms=((1.0, (gamma,) * 4), (1.0, (-gamma,) * 4)))


@dataclass(frozen=True)
class FockDensity:
    """Raw truncated density matrix, evaluated with the Fock oracle."""
    matrix: DensityMatrix

    @property
    def n_modes(self) -> int:
        return self.matrix.n_modes


StateModel = Union[CoherentSuperposition, Tmsv, PhotonSubtractedTmsv, NoisyFourModeCat, FockDensity]


@dataclass(frozen=True)
class QuadratureRule:
    """
    Tensor-product Gauss-Hermite rule for integrals against a 2D Gaussian.

    Attributes:
        order (int): Nodes per axis
        nodes (np.ndarray): One-dimensional Gauss-Hermite nodes
        weights (np.ndarray): Matching positive weights (summing to sqrt(pi))
    """
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    @functools.lru_cache(maxsize=16)
    def of_order(cls, order: int) -> "QuadratureRule":
        if order < 1:
            raise ValueError(f"Quadrature order must be positive, got {order}")
        nodes, weights = np.polynomial.hermite.hermgauss(order)
        nodes.flags.writeable = False
        weights.flags.writeable = False
        return cls(order=order, nodes=nodes, weights=weights)

    def points(self, gamma: complex, sigma: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Nodes and weights for the density exp(-|g - gamma|^2 / (2 sigma^2)) / (2 pi sigma^2).

        Returns:
            tuple: Complex amplitudes and probability weights summing to 1, both flattened
        """
        shift = sigma * math.sqrt(2.0)
        re, im = np.meshgrid(self.nodes, self.nodes, indexing="ij")
        gammas = complex(gamma) + shift * (re + 1j * im)
        weights = np.outer(self.weights, self.weights) / math.pi
        return gammas.reshape(-1), weights.reshape(-1)


def _overlap_exponent(amps: np.ndarray) -> np.ndarray:
    # log <a_s|a_t> summed over modes; amps has shape (..., T, N)
    left = amps[..., :, None, :]
    right = amps[..., None, :, :]
    return np.sum(-0.5 * np.abs(left) ** 2 - 0.5 * np.abs(right) ** 2 + np.conj(left) * right, axis=-1)


def _superposition_correlation(coeffs: np.ndarray, amps: np.ndarray,
                               displacements: Sequence[Optional[complex]]) -> np.ndarray:
    gram = np.conj(coeffs)[..., :, None] * coeffs[..., None, :] * np.exp(_overlap_exponent(amps))
    norm = np.sum(gram, axis=(-2, -1)).real
    if np.any(norm < NORM_FLOOR):
        raise DegenerateNorm("Coherent superposition norm underflows")
    factor = np.ones(gram.shape, dtype=complex)
    for j, alpha in enumerate(displacements):
        if alpha is None:
            continue
        shifted = amps[..., j] - complex(alpha)
        factor = factor * np.conj(shifted)[..., :, None] * shifted[..., None, :]
    value = np.sum(gram * factor, axis=(-2, -1)) / norm
    if np.max(np.abs(value.imag), initial=0.0) > IMAGINARY_TOLERANCE * max(1.0, np.max(np.abs(value))):
        raise ImaginaryResidual(f"Correlation has imaginary part {np.max(np.abs(value.imag))}")
    return value.real


def superposition_norm(state: CoherentSuperposition) -> float:
    """Squared norm sum_{s,t} c_s^* c_t <gamma_s|gamma_t> of the unnormalized superposition."""
    coeffs = state.coefficient_array()
    gram = np.conj(coeffs)[:, None] * coeffs[None, :] * np.exp(_overlap_exponent(state.amplitude_array()))
    return float(np.sum(gram).real)


def coherent_superposition_correlation(state: CoherentSuperposition,
                                       displacements: Sequence[Optional[complex]]) -> float:
    """
    Closed-form < x_j n(alpha_j) > of a normalized coherent superposition.

    Uses <d|(a-alpha)^dag (a-alpha)|g> = (d^* - alpha^*)(g - alpha)<d|g> with
    <d|g> = exp(-|d|^2/2 - |g|^2/2 + d^* g).

    Args:
        state: The superposition
        displacements: One amplitude per mode; None leaves the mode unmeasured (identity)

    Returns:
        float: The correlation, real and nonnegative

    Raises:
        DegenerateNorm: If the superposition norm underflows
    """
    if len(displacements) != state.n_modes:
        raise ModelMismatch(f"Expected {state.n_modes} displacements, got {len(displacements)}")
    return float(_superposition_correlation(state.coefficient_array(), state.amplitude_array(), displacements))


def tmsv_schmidt_coefficients(xi: complex, n_max: int) -> np.ndarray:
    """Amplitudes of |n,n> in |xi> for n = 0..n_max."""
    r = abs(xi)
    ratio = -np.exp(1j * _arg(xi)) * math.tanh(r)
    return ratio ** np.arange(n_max + 1) / math.cosh(r)


def photon_subtracted_norm(xi: complex) -> float:
    """Squared norm sinh^2|xi| of the unnormalized photon-subtracted state."""
    return math.sinh(abs(xi)) ** 2


def _arg(xi: complex) -> float:
    return 0.0 if xi == 0 else float(np.angle(xi))


def tmsv_correlation(xi: complex, alpha: complex, beta: complex) -> float:
    """
    <xi| n(alpha) x n(beta) |xi> for the two-mode squeezed vacuum.

    Returns:
        float: (s+|alpha|^2)(s+|beta|^2) + |c e^{i arg xi} - alpha beta|^2 - |alpha|^2|beta|^2
        with s = sinh^2|xi| and c = sinh|2xi| / 2
    """
    r = abs(xi)
    s = math.sinh(r) ** 2
    c = 0.5 * math.sinh(2 * r) * np.exp(1j * _arg(xi))
    a2, b2 = abs(alpha) ** 2, abs(beta) ** 2
    return float((s + a2) * (s + b2) + abs(c - alpha * beta) ** 2 - a2 * b2)


def photon_subtracted_correlation(xi: complex, kappa: float, alpha: complex, beta: complex) -> float:
    """
    <psi_-| n(alpha) x n(beta) |psi_-> for the coherently photon-subtracted squeezed vacuum.

    For real xi this is the six-term expression
    6s^2 + 2s(|a|^2+|b|^2+2) + |a|^2|b|^2 + kappa|a|^2 + (1-kappa)|b|^2
    - 2 sinh|2xi| Re(ab) + 2 sqrt(kappa(1-kappa)) Re(a b^*)(1+2s);
    for complex xi the Re(ab) term carries the phase as Re(e^{-i arg xi} ab).
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    r = abs(xi)
    s = math.sinh(r) ** 2
    a2, b2 = abs(alpha) ** 2, abs(beta) ** 2
    value = (6 * s ** 2 + 2 * s * (a2 + b2 + 2) + a2 * b2 + kappa * a2 + (1 - kappa) * b2
             - 2 * math.sinh(2 * r) * (np.exp(-1j * _arg(xi)) * alpha * beta).real
             + 2 * math.sqrt(kappa * (1 - kappa)) * (alpha * np.conj(beta)).real * (1 + 2 * s))
    return float(value)


def _tmsv_term(xi: complex, row: Sequence[Optional[complex]]) -> float:
    alpha, beta = row
    s = math.sinh(abs(xi)) ** 2
    if alpha is not None and beta is not None:
        return tmsv_correlation(xi, alpha, beta)
    if alpha is None and beta is None:
        return 1.0
    single = alpha if alpha is not None else beta
    return s + abs(single) ** 2


def _subtracted_term(state: PhotonSubtractedTmsv, row: Sequence[Optional[complex]]) -> float:
    alpha, beta = row
    s = math.sinh(abs(state.xi)) ** 2
    if alpha is not None and beta is not None:
        return photon_subtracted_correlation(state.xi, state.kappa, alpha, beta)
    if alpha is None and beta is None:
        return 1.0
    if alpha is not None:
        return 2 * s + 1 - state.kappa + abs(alpha) ** 2
    return 2 * s + state.kappa + abs(beta) ** 2


def mixture_expectation(gamma: complex, sigma: float, inner: Callable, rule: Optional[QuadratureRule] = None,
                        vectorized: bool = False) -> float:
    """
    Average inner(g) over g ~ P_gamma with a 2D Gauss-Hermite rule, doubling the order until stable.

    Args:
        gamma: Mean amplitude
        sigma: Standard deviation per quadrature, >= 0
        inner: Pure-state evaluator g -> <psi_g|L|psi_g>
        rule: Starting rule (order 20 by default)
        vectorized: inner accepts an array of amplitudes and returns an array

    Returns:
        float: The mixture expectation

    Raises:
        QuadratureNotConverged: If doubling the order keeps changing the result by more than 1e-6
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        return float(inner(np.array([complex(gamma)]))[0]) if vectorized else float(inner(complex(gamma)))
    rule = rule or QuadratureRule.of_order(DEFAULT_QUADRATURE_ORDER)

    def integrate(current: QuadratureRule) -> float:
        gammas, weights = current.points(gamma, sigma)
        values = inner(gammas) if vectorized else np.array([inner(g) for g in gammas])
        return float(np.dot(weights, values))

    value = integrate(rule)
    order = rule.order
    while 2 * order <= MAX_QUADRATURE_ORDER:
        refined = integrate(QuadratureRule.of_order(2 * order))
        logger.debug("Quadrature order %d -> %d: %.12g -> %.12g", order, 2 * order, value, refined)
        if abs(refined - value) <= QUADRATURE_TOLERANCE:
            return refined
        value, order = refined, 2 * order
    raise QuadratureNotConverged(f"Mixture integral not stable up to order {MAX_QUADRATURE_ORDER} "
                                 f"(gamma={gamma}, sigma={sigma})")


def _cat_batch_expectation(gammas: np.ndarray, witness) -> np.ndarray:
    gammas = np.asarray(gammas, dtype=complex)
    coeffs = np.ones((gammas.size, 2), dtype=complex)
    amps = np.stack([np.repeat(gammas[:, None], 4, axis=1), np.repeat(-gammas[:, None], 4, axis=1)], axis=1)
    total = np.zeros(gammas.size)
    for _, weight, row in witness.correlation_terms():
        total += weight * _superposition_correlation(coeffs, amps, row)
    return total


def expectation_L(state: StateModel, witness) -> float:
    """
    Expectation of the witness test operator L = scale * sum_k lambda_k prod_l N^(l)(alpha_k).

    Each subsystem sum N^(l) = sum_{j in block l} q_j n_j(alpha_kj) is expanded into
    single-mode correlation terms; each family uses its closed form and FockDensity
    falls back to the Fock oracle.

    Args:
        state: Any StateModel
        witness: WitnessSpec with the same number of modes

    Returns:
        float: <L>

    Raises:
        ModelMismatch: If the mode counts differ
    """
    if witness.n_modes != state.n_modes:
        raise ModelMismatch(f"Witness has {witness.n_modes} modes but the state has {state.n_modes}")
    if isinstance(state, FockDensity):
        return witness_expectation(state.matrix, witness)
    if isinstance(state, NoisyFourModeCat):
        return mixture_expectation(state.gamma, state.sigma, lambda g: _cat_batch_expectation(g, witness),
                                   vectorized=True)
    if isinstance(state, CoherentSuperposition):
        evaluate_term = functools.partial(coherent_superposition_correlation, state)
    elif isinstance(state, Tmsv):
        evaluate_term = functools.partial(_tmsv_term, state.xi)
    elif isinstance(state, PhotonSubtractedTmsv):
        evaluate_term = functools.partial(_subtracted_term, state)
    else:
        raise TypeError(f"Unsupported state model {type(state).__name__}")
    return float(sum(weight * evaluate_term(row) for _, weight, row in witness.correlation_terms()))


def rotate_phases(state: StateModel, phases: Sequence[float], cutoff: Optional[FockCutoff] = None) -> StateModel:
    """
    Apply the local phase rotations exp(i phi_j a_j^dag a_j) to a state.

    Coherent superpositions and squeezed vacua stay in their family. Other families are
    rotated in the Fock basis, which needs a cutoff.

    Args:
        state: Any StateModel
        phases: One angle per mode
        cutoff: Truncation used when the family is not closed under the rotation

    Returns:
        StateModel: The rotated state
    """
    if len(phases) != state.n_modes:
        raise ModelMismatch(f"Expected {state.n_modes} phases, got {len(phases)}")
    rotation = np.exp(1j * np.asarray(phases, dtype=float))
    if isinstance(state, CoherentSuperposition):
        terms = tuple((c, tuple(a * u for a, u in zip(amps, rotation))) for c, amps in state.terms)
        return CoherentSuperposition(n_modes=state.n_modes, terms=terms)
    if isinstance(state, Tmsv):
        return Tmsv(xi=state.xi * rotation[0] * rotation[1])
    if isinstance(state, NoisyFourModeCat) and np.allclose(rotation, rotation[0]):
        return NoisyFourModeCat(gamma=state.gamma * rotation[0], sigma=state.sigma)
    if isinstance(state, FockDensity):
        rho = state.matrix
    else:
        if cutoff is None:
            raise ValueError(f"Rotating a {type(state).__name__} requires a Fock cutoff")
        from fock_oracle import state_to_fock
        rho = state_to_fock(state, cutoff)
    diagonal = np.ones(1, dtype=complex)
    for u in rotation:
        diagonal = np.kron(diagonal, u ** np.arange(rho.cutoff.dim))
    data = diagonal[:, None] * rho.data * np.conj(diagonal)[None, :]
    return FockDensity(matrix=make_density(data, rho.n_modes, rho.cutoff, rho.truncation_deficit,
                                           check_positive=False))


def parse_complex(value, field: str) -> complex:
    """
    Read a complex number written as {"re": float, "im": float} (a bare number is accepted as real).

    Raises:
        SchemaError: Naming the field when the value is malformed
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if not isinstance(value, dict) or set(value) - {"re", "im"} or "re" not in value:
        raise SchemaError(f"{field}: expected a complex number {{\"re\": ..., \"im\": ...}}, got {value!r}")
    try:
        return complex(float(value["re"]), float(value.get("im", 0.0)))
    except (TypeError, ValueError):
        raise SchemaError(f"{field}: complex parts must be numbers, got {value!r}")


def complex_to_json(value: complex) -> dict:
    value = complex(value)
    return {"re": value.real, "im": value.imag}


def _require(data: dict, key: str, context: str):
    if not isinstance(data, dict):
        raise SchemaError(f"{context}: expected a JSON object, got {data!r}")
    if key not in data:
        raise SchemaError(f"{context}: missing field \"{key}\"")
    return data[key]


def _parse_real(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{field}: expected a number, got {value!r}")
    return float(value)


def state_from_json(data: dict) -> StateModel:
    """
    Build a StateModel from its JSON form, tagged by "type".

    Raises:
        SchemaError: Naming the first offending field
    """
    if not isinstance(data, dict):
        raise SchemaError("state: expected a JSON object")
    kind = _require(data, "type", "state")
    try:
        if kind == "coherent_superposition":
            modes = int(_require(data, "modes", "state"))
            terms = []
            for t, term in enumerate(_require(data, "terms", "state")):
                context = f"state.terms[{t}]"
                coeff = parse_complex(_require(term, "coeff", context), f"{context}.coeff")
                amplitudes = [parse_complex(a, f"{context}.amplitudes[{j}]")
                              for j, a in enumerate(_require(term, "amplitudes", context))]
                if len(amplitudes) != modes:
                    raise SchemaError(f"{context}.amplitudes: {len(amplitudes)} amplitudes for {modes} modes")
                terms.append((coeff, tuple(amplitudes)))
            return CoherentSuperposition(n_modes=modes, terms=tuple(terms))
        if kind == "tmsv":
            return Tmsv(xi=parse_complex(_require(data, "xi", "state"), "state.xi"))
        if kind == "photon_subtracted_tmsv":
            return PhotonSubtractedTmsv(xi=parse_complex(_require(data, "xi", "state"), "state.xi"),
                                        kappa=_parse_real(_require(data, "kappa", "state"), "state.kappa"))
        if kind == "noisy_fourmode_cat":
            return NoisyFourModeCat(gamma=parse_complex(_require(data, "gamma", "state"), "state.gamma"),
                                    sigma=_parse_real(data.get("sigma", 0.0), "state.sigma"))
        if kind == "fock_density":
            modes = int(_require(data, "modes", "state"))
            cutoff = FockCutoff(int(_require(data, "n_max", "state")))
            rows = _require(data, "matrix", "state")
            matrix = np.array([[parse_complex(v, f"state.matrix[{i}][{j}]") for j, v in enumerate(row)]
                               for i, row in enumerate(rows)])
            dim = cutoff.dim ** modes
            if matrix.shape != (dim, dim):
                raise SchemaError(f"state.matrix: expected {dim}x{dim} for {modes} modes, got {matrix.shape}")
            return FockDensity(matrix=make_density(matrix, modes, cutoff))
    except SchemaError:
        raise
    except (TypeError, ValueError) as e:
        raise SchemaError(f"state: {e}")
    raise SchemaError(f"state.type: unknown state type {kind!r}")


def state_to_json(state: StateModel) -> dict:
    """Serialize a StateModel to its JSON form."""
    if isinstance(state, CoherentSuperposition):
        return {"type": "coherent_superposition", "modes": state.n_modes,
                "terms": [{"coeff": complex_to_json(c), "amplitudes": [complex_to_json(a) for a in amps]}
                          for c, amps in state.terms]}
    if isinstance(state, Tmsv):
        return {"type": "tmsv", "xi": complex_to_json(state.xi)}
    if isinstance(state, PhotonSubtractedTmsv):
        return {"type": "photon_subtracted_tmsv", "xi": complex_to_json(state.xi), "kappa": state.kappa}
    if isinstance(state, NoisyFourModeCat):
        return {"type": "noisy_fourmode_cat", "gamma": complex_to_json(state.gamma), "sigma": state.sigma}
    if isinstance(state, FockDensity):
        rho = state.matrix
        return {"type": "fock_density", "modes": rho.n_modes, "n_max": rho.cutoff.n_max,
                "matrix": [[complex_to_json(v) for v in row] for row in rho.data]}
    raise TypeError(f"Unsupported state model {type(state).__name__}")


def load_state(path: str) -> StateModel:
    """Read a state JSON file."""
    with open(path, "r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}")
    return state_from_json(data)
