"""
Fock Oracle - truncated Fock-space brute-force engine.

This module builds bosonic operator matrices in a truncated number basis,
turns the analytic state families into density matrices, and evaluates
expectation values, covariance matrices and joint displaced photon-number
distributions. It is the independent reference every closed-form formula in
state_models is checked against.

Key Features:
- Ladder and displaced photon-number operators
- Displacement matrix elements from generalized Laguerre polynomials
- Multimode expectation values without building Kronecker products
- Covariance matrices in the x=(a+a^dag)/sqrt(2) convention (vacuum variance 1/2)
- Joint displaced photon-number distributions and the constant-loss channel
- The truncation policy used to pick a cutoff per state
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import comb, eval_genlaguerre, gammaln

from errors import CutoffTooSmall, ImaginaryResidual, InvalidCovariance, ModelMismatch

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-8
POSITIVITY_TOLERANCE = -1e-8
IMAGINARY_TOLERANCE = 1e-8
STATE_DEFICIT_LIMIT = 1e-6
DISTRIBUTION_DEFICIT_LIMIT = 1e-4
NEGATIVE_PROBABILITY_LIMIT = -1e-10
CONVERGED_DEFICIT = 1e-8
CONVERGED_CHANGE = 1e-12


@dataclass(frozen=True)
class FockCutoff:
    """
    Truncation of a single mode to the number states {0, ..., n_max}.

    Attributes:
        n_max (int): Largest photon number kept per mode
    """
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"Fock cutoff requires an integer n_max >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class ModeOperator:
    """
    Single-mode operator represented in a truncated number basis.

    Attributes:
        cutoff (FockCutoff): Truncation of the mode
        data (np.ndarray): (n_max+1) x (n_max+1) complex matrix
    """
    cutoff: FockCutoff
    data: np.ndarray


@dataclass(frozen=True)
class DensityMatrix:
    """
    Multimode density matrix in a truncated number basis.

    The basis is the Kronecker product of the single-mode bases with mode 1 as the
    slowest index, so `data` reshapes to (d,)*n_modes + (d,)*n_modes.

    Attributes:
        n_modes (int): Number of modes
        cutoff (FockCutoff): Common truncation of every mode
        data (np.ndarray): Complex matrix of dimension (n_max+1)^n_modes squared
        truncation_deficit (float): Probability lost to the cutoff before normalization
    """
    n_modes: int
    cutoff: FockCutoff
    data: np.ndarray
    truncation_deficit: float = 0.0

    def __post_init__(self):
        dim = self.cutoff.dim ** self.n_modes
        if self.data.shape != (dim, dim):
            raise ValueError(f"Density matrix for {self.n_modes} modes at n_max={self.cutoff.n_max} "
                             f"must be {dim}x{dim}, got {self.data.shape}")
        if np.max(np.abs(self.data - self.data.conj().T), initial=0.0) > HERMITIAN_TOLERANCE:
            raise ValueError("Density matrix is not Hermitian")
        trace = np.trace(self.data).real
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise ValueError(f"Density matrix trace is {trace}, expected 1")

    def tensor(self) -> np.ndarray:
        """Return the data reshaped to one axis per mode index, rows first then columns."""
        return self.data.reshape((self.cutoff.dim,) * (2 * self.n_modes))

    def check_positive(self):
        """
        Verify positive semidefiniteness.

        Raises:
            ValueError: If the smallest eigenvalue is below the positivity tolerance
        """
        smallest = np.linalg.eigvalsh(self.data)[0]
        if smallest < POSITIVITY_TOLERANCE:
            raise ValueError(f"Density matrix has negative eigenvalue {smallest}")


def make_density(data: np.ndarray, n_modes: int, cutoff: FockCutoff, truncation_deficit: float = 0.0,
                 check_positive: bool = True) -> DensityMatrix:
    """
    Normalize and symmetrize a raw matrix and wrap it as a DensityMatrix.

    Args:
        data: Unnormalized positive matrix
        n_modes: Number of modes
        cutoff: Common mode truncation
        truncation_deficit: Probability lost to the cutoff, recorded on the result
        check_positive: Run the eigenvalue check (skip for matrices positive by construction)

    Returns:
        DensityMatrix: The normalized state
    """
    data = 0.5 * (data + data.conj().T)
    data = data / np.trace(data).real
    rho = DensityMatrix(n_modes=n_modes, cutoff=cutoff, data=data, truncation_deficit=truncation_deficit)
    if check_positive:
        rho.check_positive()
    return rho


def pure_density(vector: np.ndarray, n_modes: int, cutoff: FockCutoff, truncation_deficit: float = 0.0):
    """Wrap a (possibly unnormalized) state vector as a rank-1 density matrix."""
    vector = vector / np.linalg.norm(vector)
    return make_density(np.outer(vector, vector.conj()), n_modes, cutoff, truncation_deficit,
                        check_positive=False)


def annihilation_matrix(cutoff: FockCutoff) -> ModeOperator:
    """
    Build the truncated annihilation operator with entries <n-1|a|n> = sqrt(n).

    Args:
        cutoff: Mode truncation

    Returns:
        ModeOperator: The ladder operator matrix
    """
    data = np.diag(np.sqrt(np.arange(1, cutoff.dim)), k=1).astype(complex)
    return ModeOperator(cutoff=cutoff, data=data)


@functools.lru_cache(maxsize=512)
def _displaced_number_data(alpha: complex, n_max: int) -> np.ndarray:
    a = annihilation_matrix(FockCutoff(n_max)).data
    shifted = a - alpha * np.eye(n_max + 1)
    data = shifted.conj().T @ shifted
    data.flags.writeable = False
    return data


def displaced_number_matrix(alpha: complex, cutoff: FockCutoff) -> ModeOperator:
    """
    Build n(alpha) = (a - alpha)^dag (a - alpha) from the truncated ladder operator.

    The polynomial form is exact inside the truncated basis, so no matrix exponential
    is involved. Results are memoized per (alpha, n_max) and returned read-only.

    Args:
        alpha: Complex displacement
        cutoff: Mode truncation

    Returns:
        ModeOperator: Hermitian matrix with diagonal n + |alpha|^2
    """
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError(f"Displacement must be finite, got {alpha}")
    return ModeOperator(cutoff=cutoff, data=_displaced_number_data(alpha, cutoff.n_max))


def quadrature_matrices(cutoff: FockCutoff):
    """Return the truncated quadratures x=(a+a^dag)/sqrt(2) and p=(a-a^dag)/(i sqrt(2))."""
    a = annihilation_matrix(cutoff).data
    x = (a + a.conj().T) / math.sqrt(2)
    p = (a - a.conj().T) / (1j * math.sqrt(2))
    return x, p


def displacement_matrix(beta: complex, out_cutoff: FockCutoff, in_cutoff: FockCutoff) -> np.ndarray:
    """
    Matrix elements <n|D(beta)|m> for n <= out_cutoff.n_max and m <= in_cutoff.n_max.

    Uses the closed form sqrt(m!/n!) beta^(n-m) exp(-|beta|^2/2) L_m^(n-m)(|beta|^2) for n >= m
    and its adjoint counterpart for n < m, so the elements are those of the untruncated operator.

    Args:
        beta: Complex displacement
        out_cutoff: Truncation of the row index
        in_cutoff: Truncation of the column index

    Returns:
        np.ndarray: Rectangular complex matrix
    """
    n = np.arange(out_cutoff.dim)[:, None]
    m = np.arange(in_cutoff.dim)[None, :]
    x = abs(beta) ** 2
    low = np.minimum(n, m)
    high = np.maximum(n, m)
    order = high - low
    laguerre = eval_genlaguerre(low, order, x)
    magnitude = np.exp(0.5 * (gammaln(low + 1) - gammaln(high + 1)) - x / 2) * abs(beta) ** order
    angle = np.where(n >= m, np.angle(beta), math.pi - np.angle(beta))
    return magnitude * laguerre * np.exp(1j * order * angle)


def coherent_vector(gamma: complex, cutoff: FockCutoff) -> np.ndarray:
    """Truncated number-basis amplitudes exp(-|gamma|^2/2) gamma^n / sqrt(n!)."""
    n = np.arange(cutoff.dim)
    magnitude = np.exp(-abs(gamma) ** 2 / 2 + n * math.log(abs(gamma)) - 0.5 * gammaln(n + 1)) \
        if gamma != 0 else (n == 0).astype(float)
    return magnitude * np.exp(1j * n * np.angle(gamma))


def _check_operators(rho: DensityMatrix, ops: Sequence[Optional[ModeOperator]]):
    if len(ops) != rho.n_modes:
        raise ModelMismatch(f"Expected {rho.n_modes} mode operators, got {len(ops)}")
    for op in ops:
        if op is not None and op.cutoff != rho.cutoff:
            raise ModelMismatch(f"Operator cutoff n_max={op.cutoff.n_max} does not match "
                                f"state cutoff n_max={rho.cutoff.n_max}")


def tensor_expectation(rho: DensityMatrix, ops: Sequence[Optional[ModeOperator]]) -> float:
    """
    Compute Tr[rho (op_1 x ... x op_N)] by contracting each mode separately.

    Args:
        rho: Multimode density matrix
        ops: One operator per mode; None stands for the identity

    Returns:
        float: The real expectation value

    Raises:
        ImaginaryResidual: If the imaginary part exceeds 1e-8
    """
    _check_operators(rho, ops)
    n = rho.n_modes
    operands = [rho.tensor(), list(range(2 * n))]
    for j, op in enumerate(ops):
        if op is None:
            operands[1][n + j] = j
        else:
            operands += [op.data, [n + j, j]]
    value = np.einsum(*operands, [], optimize=True)
    if abs(value.imag) > IMAGINARY_TOLERANCE:
        raise ImaginaryResidual(f"Expectation value has imaginary part {value.imag}")
    return float(value.real)


def witness_expectation(rho: DensityMatrix, witness) -> float:
    """
    Brute-force <L> of a witness on a Fock density matrix.

    Each subsystem sum N^(l) is expanded into single-mode terms, so every term
    is a product of displaced number operators and identities.

    Args:
        rho: Density matrix
        witness: WitnessSpec with a matching number of modes

    Returns:
        float: The expectation value of the test operator
    """
    if witness.n_modes != rho.n_modes:
        raise ModelMismatch(f"Witness has {witness.n_modes} modes but the state has {rho.n_modes}")
    total = 0.0
    for k, weight, row in witness.correlation_terms():
        ops = [None if alpha is None else displaced_number_matrix(alpha, rho.cutoff) for alpha in row]
        total += weight * tensor_expectation(rho, ops)
    return total


def covariance_matrix(rho: DensityMatrix) -> np.ndarray:
    """
    Symmetrized quadrature covariance matrix, ordered (x_1, p_1, x_2, p_2, ...).

    V_ij = <{R_i, R_j}>/2 - <R_i><R_j>, with vacuum variance 1/2.

    Args:
        rho: Density matrix

    Returns:
        np.ndarray: Real symmetric 2N x 2N matrix
    """
    cutoff = rho.cutoff
    x, p = quadrature_matrices(cutoff)
    quadratures = [(j, q) for j in range(rho.n_modes) for q in (x, p)]

    def mode_op(data):
        return ModeOperator(cutoff=cutoff, data=data)

    def expect(pairs):
        ops: List[Optional[ModeOperator]] = [None] * rho.n_modes
        for j, data in pairs:
            ops[j] = mode_op(data if ops[j] is None else ops[j].data @ data)
        return tensor_expectation(rho, ops)

    means = [expect([(j, q)]) for j, q in quadratures]
    size = len(quadratures)
    cov = np.zeros((size, size))
    for i, (ji, qi) in enumerate(quadratures):
        for k in range(i, size):
            jk, qk = quadratures[k]
            if ji == jk:
                second = expect([(ji, 0.5 * (qi @ qk + qk @ qi))])
            else:
                second = expect([(ji, qi), (jk, qk)])
            cov[i, k] = cov[k, i] = second - means[i] * means[k]
    margin = uncertainty_margin(cov)
    if margin < -1e-6:
        raise InvalidCovariance(f"Covariance matrix violates the uncertainty relation (eigenvalue {margin})")
    return cov


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for the (x_1, p_1, ..., x_N, p_N) ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def uncertainty_margin(cov: np.ndarray) -> float:
    """Smallest eigenvalue of V + (i/2) Omega; nonnegative for every physical state."""
    omega = symplectic_form(cov.shape[0] // 2)
    return float(np.linalg.eigvalsh(cov + 0.5j * omega)[0])


@dataclass(frozen=True)
class NumberDistribution:
    """
    Joint displaced photon-number distribution.

    Attributes:
        probabilities (np.ndarray): Tensor over (n_1, ..., n_N), renormalized to sum 1
        mass_deficit (float): Probability that fell outside the cutoff before renormalization
    """
    probabilities: np.ndarray
    mass_deficit: float


def joint_displaced_number_distribution(rho: DensityMatrix, displacements: Sequence[complex],
                                        cutoff: FockCutoff) -> NumberDistribution:
    """
    Photon-number statistics of every mode after displacing mode j by -alpha_j.

    The entries are <n|D(-alpha) rho D(-alpha)^dag|n>, which are the statistics of the
    displaced number operators n(alpha_j). Only the diagonal is formed: each mode's row
    and column indices are collapsed into one outcome index as soon as it is displaced.

    Args:
        rho: Density matrix
        displacements: One complex displacement per mode
        cutoff: Truncation of the recorded photon numbers

    Returns:
        NumberDistribution: Probabilities and the mass lost to the cutoff

    Raises:
        CutoffTooSmall: If more than 1e-4 of the mass lies above the cutoff
    """
    n = rho.n_modes
    if len(displacements) != n:
        raise ModelMismatch(f"Expected {n} displacements, got {len(displacements)}")
    tensor = rho.tensor()
    labels = list(range(2 * n))
    for j, alpha in enumerate(displacements):
        u = displacement_matrix(-complex(alpha), cutoff, rho.cutoff)
        outcome = 2 * n + j
        out_labels = [outcome if label == j else label for label in labels if label != n + j]
        tensor = np.einsum(u, [outcome, j], tensor, labels, u.conj(), [outcome, n + j], out_labels,
                           optimize=True)
        labels = out_labels
    probabilities = tensor.real
    smallest = probabilities.min()
    if smallest < NEGATIVE_PROBABILITY_LIMIT:
        raise CutoffTooSmall(f"Negative probability {smallest} in displaced distribution")
    probabilities = np.clip(probabilities, 0.0, None)
    total = probabilities.sum()
    deficit = 1.0 - total
    if deficit > DISTRIBUTION_DEFICIT_LIMIT:
        raise CutoffTooSmall(f"Displaced distribution loses {deficit:.3g} of its mass at n_max={cutoff.n_max}")
    return NumberDistribution(probabilities=probabilities / total, mass_deficit=max(deficit, 0.0))


def loss_kraus_operators(eta: float, cutoff: FockCutoff) -> np.ndarray:
    """Kraus operators A_l|m> = sqrt(C(m,l) eta^(m-l) (1-eta)^l)|m-l> of the pure-loss channel."""
    dim = cutoff.dim
    kraus = np.zeros((dim, dim, dim))
    for lost in range(dim):
        m = np.arange(lost, dim)
        kraus[lost, m - lost, m] = np.sqrt(comb(m, lost) * eta ** (m - lost) * (1.0 - eta) ** lost)
    return kraus


def apply_loss_channel(rho: DensityMatrix, etas: Sequence[float]) -> DensityMatrix:
    """
    Send every mode through a beam splitter of transmissivity eta_j (constant detection loss).

    Args:
        rho: Density matrix
        etas: Per-mode efficiencies in (0, 1]

    Returns:
        DensityMatrix: The attenuated state at the same cutoff
    """
    n = rho.n_modes
    if len(etas) != n:
        raise ModelMismatch(f"Expected {n} efficiencies, got {len(etas)}")
    tensor = rho.tensor()
    labels = list(range(2 * n))
    for j, eta in enumerate(etas):
        if eta == 1.0:
            continue
        kraus = loss_kraus_operators(eta, rho.cutoff)
        lost, row, col = 4 * n, 2 * n + j, 3 * n + j
        out_labels = [row if label == j else col if label == n + j else label for label in labels]
        tensor = np.einsum(kraus, [lost, row, j], tensor, labels, kraus, [lost, col, n + j], out_labels,
                           optimize=True)
        labels = out_labels
    dim = rho.cutoff.dim ** n
    return make_density(tensor.reshape(dim, dim), n, rho.cutoff, rho.truncation_deficit, check_positive=False)


def state_to_fock(state, cutoff: FockCutoff) -> DensityMatrix:
    """
    Convert any supported state model into a normalized Fock density matrix.

    Args:
        state: A StateModel from state_models
        cutoff: Mode truncation

    Returns:
        DensityMatrix: The truncated, renormalized state with its truncation deficit

    Raises:
        CutoffTooSmall: If more than 1e-6 of the norm is lost to the cutoff
    """
    import state_models

    if isinstance(state, state_models.FockDensity):
        return _refit_density(state.matrix, cutoff)
    if isinstance(state, state_models.NoisyFourModeCat) and state.sigma > 0:
        rule = state_models.QuadratureRule.of_order(state_models.DEFAULT_QUADRATURE_ORDER)
        gammas, weights = rule.points(state.gamma, state.sigma)
        columns, deficits = [], []
        for gamma in gammas:
            vector, deficit = _state_vector(state.pure_component(gamma), cutoff)
            columns.append(vector / np.linalg.norm(vector))
            deficits.append(deficit)
        deficit = float(np.dot(weights, deficits))
        _check_deficit(deficit, cutoff)
        vectors = np.array(columns).T
        data = (vectors * weights) @ vectors.conj().T
        return make_density(data, state.n_modes, cutoff, deficit, check_positive=False)
    vector, deficit = _state_vector(state, cutoff)
    _check_deficit(deficit, cutoff)
    return pure_density(vector, state.n_modes, cutoff, deficit)


def _check_deficit(deficit: float, cutoff: FockCutoff):
    if deficit > STATE_DEFICIT_LIMIT:
        raise CutoffTooSmall(f"Cutoff n_max={cutoff.n_max} loses {deficit:.3g} of the state norm")


def _state_vector(state, cutoff: FockCutoff):
    import state_models

    if isinstance(state, state_models.NoisyFourModeCat):
        state = state.pure_component(state.gamma)
    if isinstance(state, state_models.CoherentSuperposition):
        vector = np.zeros(cutoff.dim ** state.n_modes, dtype=complex)
        for coeff, amplitudes in state.terms:
            product = np.ones(1, dtype=complex)
            for gamma in amplitudes:
                product = np.kron(product, coherent_vector(gamma, cutoff))
            vector += coeff * product
        exact = state_models.superposition_norm(state)
        return vector, 1.0 - np.vdot(vector, vector).real / exact
    if isinstance(state, state_models.Tmsv):
        coefficients = state_models.tmsv_schmidt_coefficients(state.xi, cutoff.n_max)
        vector = np.diag(coefficients).reshape(-1)
        return vector, 1.0 - np.vdot(coefficients, coefficients).real
    if isinstance(state, state_models.PhotonSubtractedTmsv):
        coefficients = state_models.tmsv_schmidt_coefficients(state.xi, cutoff.n_max)
        amplitudes = np.zeros((cutoff.dim, cutoff.dim), dtype=complex)
        n = np.arange(1, cutoff.dim)
        amplitudes[n - 1, n] += math.sqrt(state.kappa) * coefficients[n] * np.sqrt(n)
        amplitudes[n, n - 1] += math.sqrt(1.0 - state.kappa) * coefficients[n] * np.sqrt(n)
        exact = state_models.photon_subtracted_norm(state.xi)
        vector = amplitudes.reshape(-1)
        return vector, 1.0 - np.vdot(vector, vector).real / exact
    raise TypeError(f"Unsupported state model {type(state).__name__}")


def _refit_density(rho: DensityMatrix, cutoff: FockCutoff) -> DensityMatrix:
    if rho.cutoff == cutoff:
        return rho
    n = rho.n_modes
    keep = min(rho.cutoff.dim, cutoff.dim)
    tensor = rho.tensor()[(slice(0, keep),) * (2 * n)]
    padded = np.zeros((cutoff.dim,) * (2 * n), dtype=complex)
    padded[(slice(0, keep),) * (2 * n)] = tensor
    dim = cutoff.dim ** n
    data = padded.reshape(dim, dim)
    deficit = 1.0 - np.trace(data).real + rho.truncation_deficit
    _check_deficit(deficit, cutoff)
    return make_density(data, n, cutoff, deficit, check_positive=False)


def _tracked_values(rho: DensityMatrix, witness) -> Optional[np.ndarray]:
    if witness is not None:
        return np.array([witness_expectation(rho, witness)])
    try:
        return covariance_matrix(rho)
    except InvalidCovariance:
        # low truncations can break the uncertainty relation
        return None


def choose_cutoff(state, witness=None, start: int = 2, limit: int = 60, max_dim: int = 4096,
                  tolerance: float = CONVERGED_CHANGE) -> FockCutoff:
    """
    Pick the smallest cutoff at which the computed quantity has converged.

    The tracked quantity is <L> of the witness when one is given, otherwise the covariance
    matrix of the state. A cutoff n_max is accepted when its truncation deficit is below 1e-8
    and the tracked values differ from those at n_max - 1 by less than
    tolerance * max(1, largest tracked value).

    Args:
        state: A StateModel
        witness: Optional WitnessSpec whose expectation must be converged
        start: First n_max tried
        limit: Largest n_max tried
        max_dim: Largest Hilbert-space dimension of a tried cutoff
        tolerance: Relative change accepted between consecutive cutoffs

    Returns:
        FockCutoff: The chosen truncation

    Raises:
        CutoffTooSmall: If the limit or max_dim is reached before the values converge
    """
    n_modes = state.n_modes
    previous = None
    for n_max in range(start, limit + 1):
        cutoff = FockCutoff(n_max)
        if cutoff.dim ** n_modes > max_dim:
            raise CutoffTooSmall(f"No converged cutoff within {max_dim} basis states (stopped at n_max={n_max})")
        try:
            rho = state_to_fock(state, cutoff)
        except CutoffTooSmall:
            continue
        values = _tracked_values(rho, witness)
        if values is None:
            previous = None
            continue
        if previous is not None and rho.truncation_deficit < CONVERGED_DEFICIT:
            change = float(np.max(np.abs(values - previous)))
            logger.debug("Cutoff %d: deficit %.3g, change %.3g", n_max, rho.truncation_deficit, change)
            if change < tolerance * max(1.0, float(np.max(np.abs(values)))):
                return cutoff
        previous = values
    raise CutoffTooSmall(f"No cutoff up to n_max={limit} satisfies the truncation policy")
