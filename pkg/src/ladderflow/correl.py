"""Entropic correlations and concurrence of one- and two-qubit states.

All entropies are in bits.  For two-qubit states the side that is measured
when computing classical correlations is named either ``"A"``/``"B"`` (first
or second qubit of the register) or by its qubit label.  ``discord(rho, "B")``
is D_{A B̄}: the measurement acts on B.

The inner minimization over projective measurements works on the Pauli
correlation tensor T[i, j] = tr(rho σ_i ⊗ σ_j).  Projecting B onto the Bloch
direction n̂ leaves A in the state with Bloch vector (a ± T n̂)/(1 ± b·n̂),
reached with probability (1 ± b·n̂)/2, so each evaluation is closed form and
the whole search vectorizes over a batch of states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalFailure
from .qstate import DensityMatrix

EIG_CLAMP = 1e-10
EIG_FAIL = 1e-8
DISCORD_CLAMP = 1e-9
ZERO_BRANCH_TOL = 1e-14

GRID_THETA = 32
GRID_ALPHA = 32
REFINE_ROUNDS = 60
REFINE_SHRINK = 0.5
REFINE_TOL = 1e-9
REFINE_MIN_STEP = 1e-7

_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
_PAULI2 = np.einsum("iab,jcd->ijacbd", _PAULI, _PAULI).reshape(4, 4, 4, 4)
_YY = np.kron(_PAULI[2], _PAULI[2])

# azimuths of the 8-point refinement stencil in the tangent plane
_AZIMUTH_COS = np.cos(np.arange(8) * np.pi / 4)
_AZIMUTH_SIN = np.sin(np.arange(8) * np.pi / 4)


@dataclass(frozen=True)
class MeasurementBasisParams:
    """Bloch direction n̂ = (sinθ cosα, sinθ sinα, cosθ) of the projectors (1 ± n̂·σ)/2."""

    theta: float
    alpha: float

    def __post_init__(self):
        theta, alpha = _normalize_angles(self.theta, self.alpha)
        object.__setattr__(self, "theta", float(theta))
        object.__setattr__(self, "alpha", float(alpha))

    @property
    def direction(self) -> np.ndarray:
        return _direction(np.asarray(self.theta), np.asarray(self.alpha))

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        ns = np.einsum("k,kab->ab", self.direction, _PAULI[1:])
        return (np.eye(2) + ns) / 2, (np.eye(2) - ns) / 2


@dataclass(frozen=True)
class DiscordResult:
    value: float
    optimal_basis: MeasurementBasisParams
    mutual_information: float
    classical_correlations: float


def _normalize_angles(theta, alpha):
    """Map arbitrary (θ, α) onto θ ∈ [0, π], α ∈ [0, 2π) with the same direction."""
    theta = np.mod(theta, 2 * np.pi)
    flip = theta > np.pi
    theta = np.where(flip, 2 * np.pi - theta, theta)
    alpha = np.where(flip, alpha + np.pi, alpha)
    return theta, np.mod(alpha, 2 * np.pi)


def _direction(theta: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    st = np.sin(theta)
    return np.stack([st * np.cos(alpha), st * np.sin(alpha), np.cos(theta)], axis=-1)


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    return np.asarray(rho, dtype=complex)


def _two_qubit(rho) -> np.ndarray:
    m = _as_matrix(rho)
    if m.shape[-2:] != (4, 4):
        raise InputError(f"expected a two-qubit density matrix, got shape {m.shape}")
    return m


def _measured_index(rho, measured) -> int:
    """0 when the first qubit is measured, 1 for the second."""
    if measured in ("A", "a", 0):
        return 0
    if measured in ("B", "b", 1) and not isinstance(measured, bool):
        return 1
    if isinstance(rho, DensityMatrix) and measured in rho.labels:
        return rho.labels.index(measured)
    raise InputError(f"measured side must be 'A', 'B' or a label of the register, got {measured!r}")


def binary_entropy_from_bloch(r: np.ndarray) -> np.ndarray:
    """Entropy (bits) of a qubit whose Bloch vector has length ``r``."""
    r = np.clip(r, 0.0, 1.0)
    p = 0.5 * (1.0 + r)
    q = 0.5 * (1.0 - r)
    with np.errstate(divide="ignore", invalid="ignore"):
        hp = np.where(p > 0, -p * np.log2(p), 0.0)
        hq = np.where(q > 0, -q * np.log2(q), 0.0)
    return hp + hq


def entropy_of_eigenvalues(lam: np.ndarray) -> np.ndarray:
    """Shannon entropy (bits) along the last axis, with the clamping policy for tiny negatives."""
    lam = np.asarray(lam, dtype=float)
    lowest = lam.min() if lam.size else 0.0
    if lowest < -EIG_FAIL:
        raise NumericalFailure(f"density matrix eigenvalue {lowest:.3e} below -{EIG_FAIL:g}")
    lam = np.where(lam < 0, 0.0, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * np.log2(lam), 0.0)
    return terms.sum(axis=-1)


def von_neumann_entropy(rho) -> float:
    lam = np.linalg.eigvalsh(_as_matrix(rho))
    return float(entropy_of_eigenvalues(lam))


def correlation_tensor(rho) -> np.ndarray:
    """T[..., i, j] = tr(rho σ_i ⊗ σ_j) for i, j in {0 (identity), x, y, z}."""
    m = _two_qubit(rho)
    return np.einsum("ijab,...ba->...ij", _PAULI2, m).real


def reduced_states(rho) -> tuple[np.ndarray, np.ndarray]:
    m = _two_qubit(rho)
    m = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    return np.einsum("...ajbj->...ab", m), np.einsum("...jajb->...ab", m)


def _entropies(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S(A), S(B), S(AB) for a batch of two-qubit matrices."""
    m = np.asarray(rho, dtype=complex)
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    s_ab = entropy_of_eigenvalues(np.linalg.eigvalsh(m))
    t = correlation_tensor(m)
    s_a = binary_entropy_from_bloch(np.linalg.norm(t[..., 1:, 0], axis=-1))
    s_b = binary_entropy_from_bloch(np.linalg.norm(t[..., 0, 1:], axis=-1))
    return s_a, s_b, s_ab


def mutual_information(rho_ab) -> float:
    s_a, s_b, s_ab = _entropies(_two_qubit(rho_ab))
    value = float(s_a + s_b - s_ab)
    if value < -DISCORD_CLAMP:
        raise NumericalFailure(f"mutual information {value:.3e} is negative")
    return max(value, 0.0)


def _conditional_entropy(
    unmeasured_bloch: np.ndarray, corr: np.ndarray, measured_bloch: np.ndarray, n: np.ndarray
) -> np.ndarray:
    """Average entropy of the unmeasured qubit after measuring the other along ``n``.

    Shapes: unmeasured_bloch (B, 3), corr (B, 3, 3) with rows indexing the
    unmeasured qubit, measured_bloch (B, 3), n (B, K, 3).  Returns (B, K).
    """
    tn = np.einsum("bij,bkj->bki", corr, n)
    bn = np.einsum("bj,bkj->bk", measured_bloch, n)
    total = np.zeros(bn.shape)
    for sign in (1.0, -1.0):
        p = 0.5 * (1.0 + sign * bn)
        vec = unmeasured_bloch[:, None, :] + sign * tn
        live = p > ZERO_BRANCH_TOL
        safe_p = np.where(live, p, 1.0)
        r = np.linalg.norm(vec, axis=-1) / (2.0 * safe_p)
        total += np.where(live, p * binary_entropy_from_bloch(r), 0.0)
    return total


def _split_tensor(t: np.ndarray, measured: int):
    if measured == 1:
        return t[:, 1:, 0], t[:, 1:, 1:], t[:, 0, 1:]
    return t[:, 0, 1:], np.swapaxes(t[:, 1:, 1:], -1, -2), t[:, 1:, 0]


def coarse_grid(n_theta: int = GRID_THETA, n_alpha: int = GRID_ALPHA) -> tuple[np.ndarray, np.ndarray]:
    """θ on [0, π] inclusive, α on [0, 2π) with uniform spacing."""
    theta = np.linspace(0.0, np.pi, n_theta)
    alpha = np.arange(n_alpha) * (2 * np.pi / n_alpha)
    tt, aa = np.meshgrid(theta, alpha, indexing="ij")
    return tt.ravel(), aa.ravel()


def _tangent_frame(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal e1, e2 perpendicular to unit vectors ``n`` (shape (B, 3))."""
    helper = np.where(np.abs(n[:, 2:3]) < 0.9, [[0.0, 0.0, 1.0]], [[1.0, 0.0, 0.0]])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    return e1, np.cross(n, e1)


def _to_angles(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = np.arccos(np.clip(n[..., 2], -1.0, 1.0))
    alpha = np.mod(np.arctan2(n[..., 1], n[..., 0]), 2 * np.pi)
    return theta, alpha


def min_conditional_entropy_batch(
    rhos: np.ndarray,
    measured: int,
    n_theta: int = GRID_THETA,
    n_alpha: int = GRID_ALPHA,
    rounds: int = REFINE_ROUNDS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid-seeded shrinking-neighbourhood search for the minimal conditional entropy.

    ``measured`` is 0 or 1.  Returns (values, theta, alpha), each of shape (B,).
    The best point of an ``n_theta`` x ``n_alpha`` grid over (θ, α) seeds a
    local search on the sphere: each round tries the 8 directions obtained by
    tilting the current Bloch vector by the step angle towards 8 equally
    spaced azimuths of its tangent plane.  A move is taken when it lowers the
    objective by more than 1e-9, otherwise the step halves.  The search ends
    after ``rounds`` rounds or once the step is below 1e-7 rad.  Tilting in
    the tangent plane keeps the stencil isotropic at the poles, where steps
    in α alone would not move the direction.
    """
    rhos = np.asarray(rhos, dtype=complex).reshape(-1, 4, 4)
    t = correlation_tensor(rhos)
    u_bloch, corr, m_bloch = _split_tensor(t, measured)
    batch = rhos.shape[0]

    g_theta, g_alpha = coarse_grid(n_theta, n_alpha)
    grid_dirs = _direction(g_theta, g_alpha)
    grid_vals = _conditional_entropy(u_bloch, corr, m_bloch, np.broadcast_to(grid_dirs, (batch,) + grid_dirs.shape))
    best = np.argmin(grid_vals, axis=1)
    f = grid_vals[np.arange(batch), best]
    n = grid_dirs[best].copy()

    step = np.full(batch, np.pi / max(n_theta - 1, 1))
    active = np.ones(batch, dtype=bool)
    for _ in range(rounds):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        e1, e2 = _tangent_frame(n[idx])
        tilt = _AZIMUTH_COS[None, :, None] * e1[:, None, :] + _AZIMUTH_SIN[None, :, None] * e2[:, None, :]
        s = step[idx, None, None]
        cand = np.cos(s) * n[idx, None, :] + np.sin(s) * tilt
        cand /= np.linalg.norm(cand, axis=-1, keepdims=True)
        vals = _conditional_entropy(u_bloch[idx], corr[idx], m_bloch[idx], cand)
        k = np.argmin(vals, axis=1)
        new_f = vals[np.arange(idx.size), k]
        improved = f[idx] - new_f > REFINE_TOL
        mv = idx[improved]
        n[mv] = cand[improved, k[improved]]
        f[mv] = new_f[improved]
        shrink = idx[~improved]
        step[shrink] *= REFINE_SHRINK
        active[shrink] = step[shrink] >= REFINE_MIN_STEP
    theta, alpha = _to_angles(n)
    return f, theta, alpha


def min_conditional_entropy(rho_ab, measured) -> tuple[float, MeasurementBasisParams]:
    side = _measured_index(rho_ab, measured)
    vals, theta, alpha = min_conditional_entropy_batch(_two_qubit(rho_ab)[None], side)
    return float(vals[0]), MeasurementBasisParams(float(theta[0]), float(alpha[0]))


def _clamp_discord(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.size and d.min() < -DISCORD_CLAMP:
        raise NumericalFailure(f"discord {d.min():.3e} below -{DISCORD_CLAMP:g}")
    return np.where(d < 0, 0.0, d)


def discord_batch(rhos: np.ndarray, measured: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Discord with measurement on qubit ``measured`` (0 or 1) for a stack of 4x4 matrices.

    Returns (discord, theta, alpha) arrays of shape (B,).
    """
    rhos = np.asarray(rhos, dtype=complex).reshape(-1, 4, 4)
    s_a, s_b, s_ab = _entropies(rhos)
    cond, theta, alpha = min_conditional_entropy_batch(rhos, measured)
    s_measured = s_b if measured == 1 else s_a
    return _clamp_discord(s_measured - s_ab + cond), theta, alpha


def discord(rho_ab, measured) -> DiscordResult:
    side = _measured_index(rho_ab, measured)
    m = _two_qubit(rho_ab)
    s_a, s_b, s_ab = (float(x[0]) for x in _entropies(m[None]))
    cond, basis = min_conditional_entropy(m, side)
    s_unmeasured = s_a if side == 1 else s_b
    mi = max(s_a + s_b - s_ab, 0.0)
    classical = s_unmeasured - cond
    value = float(_clamp_discord(mi - classical))
    return DiscordResult(value, basis, mi, mi - value)


def concurrence_batch(rhos: np.ndarray) -> np.ndarray:
    """Wootters concurrence C = max(0, λ1 - λ2 - λ3 - λ4).

    The λ's (square roots of the spectrum of rho (Y⊗Y) rho* (Y⊗Y)) are taken as the
    singular values of τ = Wᵀ (Y⊗Y) W with rho = W W†.  This avoids square roots of
    round-off-sized eigenvalues, which would otherwise bias pure states by ~1e-8.
    """
    m = np.asarray(rhos, dtype=complex).reshape(-1, 4, 4)
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    w, v = np.linalg.eigh(m)
    if np.any(w < -EIG_FAIL):
        raise NumericalFailure(f"density matrix eigenvalue {w.min():.3e} below -{EIG_FAIL:g}")
    big_w = v * np.sqrt(np.clip(w, 0.0, None))[:, None, :]
    tau = np.swapaxes(big_w, -1, -2) @ _YY @ big_w
    lam = np.linalg.svd(tau, compute_uv=False)
    c = lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3]
    return np.clip(c, 0.0, 1.0)


def concurrence(rho_ab) -> float:
    return float(concurrence_batch(_two_qubit(rho_ab)[None])[0])
