"""Maximum-likelihood state and process tomography with Monte-Carlo errors.

State reconstruction parameterizes the density matrix as T^dag T / Tr(T^dag T)
with an upper-triangular T (16 real parameters), so the estimate satisfies
Hermiticity, positivity and unit trace by construction, and maximizes the
Poisson log-likelihood sum_s [n_s log mu_s - mu_s].

Process reconstruction works on the Choi matrix J = M^dag M followed by the
exact trace-preservation retraction J -> (I x G^{-1/2}) J (I x G^{-1/2}) with
G = Tr_out J, then converts to the chi representation in the Pauli basis
(I, X, Y, Z).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Callable

import numpy as np
from scipy import optimize

from .counts import CountRecord
from .states import (MetricReport, PAULIS, PROJECTOR_LABELS, bell_state, fidelity,
                     projector, purity, tangle)


class ReconstructionError(RuntimeError):
    """Raised when a reconstruction cannot be carried out on the given data."""


#: Basis family of each analysis label (H/V, D/A and R/L are complete pairs).
_BASIS_OF = {"H": 0, "V": 0, "D": 1, "A": 1, "R": 2, "L": 2}

_LABEL_INDEX = {l: i for i, l in enumerate(PROJECTOR_LABELS)}

_TRIU_R, _TRIU_C = np.triu_indices(4, 1)

#: Orthonormal Hermitian operator basis (Pauli products / 2) for inversion.
_HERM_BASIS = [np.kron(p1, p2) / 2.0 for p1 in PAULIS for p2 in PAULIS]


def tomography_settings(kind: str) -> list[tuple[str, str]]:
    """All 36 ordered pairs of the six analysis labels.

    "state2q" pairs two measurement labels; "process1q" pairs an input-state
    label with a measurement label. Both enumerate the same 6x6 grid.
    """
    if kind not in ("state2q", "process1q"):
        raise ValueError(f"unknown settings kind {kind!r}")
    return list(product(PROJECTOR_LABELS, PROJECTOR_LABELS))


def subtract_accidentals(records: list[CountRecord]) -> list[CountRecord]:
    """Subtract each record's accidental estimate from its coincidences.

    Corrected counts are clamped at zero; all other fields are unchanged.
    """
    return [replace(r, coincidences=max(0.0, r.coincidences - r.accidental_estimate))
            for r in records]


def _sorted_label_records(records: list[CountRecord]) -> list[CountRecord]:
    """Validate a complete 36-setting label dataset and order it canonically."""
    if len(records) != 36:
        raise ReconstructionError(f"expected 36 records, got {len(records)}")
    by_setting = {}
    for r in records:
        if r.setting_a not in _LABEL_INDEX or r.setting_b not in _LABEL_INDEX:
            raise ReconstructionError(
                f"tomography requires label settings, got ({r.setting_a!r}, {r.setting_b!r})")
        key = (r.setting_a, r.setting_b)
        if key in by_setting:
            raise ReconstructionError(f"duplicate setting {key}")
        by_setting[key] = r
    return [by_setting[s] for s in tomography_settings("state2q")]


def _flux_rate(ordered: list[CountRecord]) -> float:
    """Total pair rate estimated from the nine complete basis-pair groups.

    Within one group the four joint projectors sum to the identity, so the
    group's summed rate estimates the same total flux; the groups are
    averaged.
    """
    sums: dict[tuple[int, int], float] = {}
    for r in ordered:
        key = (_BASIS_OF[r.setting_a], _BASIS_OF[r.setting_b])
        sums[key] = sums.get(key, 0.0) + r.coincidences / r.duration
    rate = float(np.mean(list(sums.values())))
    if rate <= 0.0:
        raise ReconstructionError("all counts are zero; cannot normalize")
    return rate


@dataclass
class TomographyOptions:
    """Optimizer and reporting knobs shared by both reconstructions."""

    max_iters: int = 5000
    rel_tol: float = 1e-10          # relative log-likelihood increment
    fit_normalization: bool = False  # fit the total flux as an extra parameter
    tp_mode: str = "constrain"       # "constrain" (exact TP) or "normalize"
    start: str = "inversion"         # "inversion" warm start or "mixed" cold start
    fidelity_target: np.ndarray | None = None  # defaults to |phi+>
    process_ideal: np.ndarray | None = None    # defaults to the identity chi

    def __post_init__(self):
        if self.tp_mode not in ("constrain", "normalize"):
            raise ValueError(f"unknown tp_mode {self.tp_mode!r}")
        if self.start not in ("inversion", "mixed"):
            raise ValueError(f"unknown start {self.start!r}")
        if self.max_iters < 1 or self.rel_tol <= 0.0:
            raise ValueError("max_iters must be >= 1 and rel_tol > 0")


@dataclass
class TomographyResult:
    """Reconstruction output: estimate plus optimizer diagnostics."""

    estimate: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    metrics: MetricReport
    kind: str = "state"
    history: list[float] = field(default_factory=list, repr=False)


def _check_monotone(history: list[float]) -> None:
    for prev, cur in zip(history, history[1:]):
        if cur < prev - 1e-9 * max(1.0, abs(prev)):
            raise ReconstructionError(
                f"log-likelihood decreased from {prev!r} to {cur!r}")


# ---------------------------------------------------------------------------
# state tomography
# ---------------------------------------------------------------------------

def _projector_stack(ordered: list[CountRecord]) -> np.ndarray:
    return np.array([np.kron(projector(r.setting_a), projector(r.setting_b))
                     for r in ordered])


def _params_to_t(t: np.ndarray) -> np.ndarray:
    T = np.zeros((4, 4), dtype=complex)
    T[np.diag_indices(4)] = t[:4]
    T[_TRIU_R, _TRIU_C] = t[4:10] + 1j * t[10:16]
    return T


def _t_to_params(T: np.ndarray) -> np.ndarray:
    t = np.zeros(16)
    t[:4] = np.real(np.diag(T))
    t[4:10] = np.real(T[_TRIU_R, _TRIU_C])
    t[10:16] = np.imag(T[_TRIU_R, _TRIU_C])
    return t


def _rho_of_params(t: np.ndarray) -> np.ndarray:
    T = _params_to_t(t)
    g = T.conj().T @ T
    return g / float(np.real(np.trace(g)))


def _params_of_rho(rho: np.ndarray, floor: float = 1e-10) -> np.ndarray:
    """Parameters whose reconstruction is the PSD projection of ``rho``."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    w = np.clip(w, floor, None)
    r = (v * w) @ v.conj().T
    r /= float(np.real(np.trace(r)))
    T = np.linalg.cholesky(r).conj().T
    return _t_to_params(T)


def linear_inversion_state(records: list[CountRecord]) -> np.ndarray:
    """Least-squares state estimate; Hermitian but possibly non-positive.

    Probabilities are normalized per basis-pair group, then the 36 linear
    equations Tr[(P_a x P_b) rho] = p are solved over the 16-dimensional
    Hermitian operator basis. Used as an independent cross-check on (and a
    starting point for) the likelihood fit.
    """
    ordered = _sorted_label_records(records)
    rates = np.array([r.coincidences / r.duration for r in ordered])
    group_tot: dict[tuple[int, int], float] = {}
    for r, rate in zip(ordered, rates):
        key = (_BASIS_OF[r.setting_a], _BASIS_OF[r.setting_b])
        group_tot[key] = group_tot.get(key, 0.0) + rate
    probs = np.empty(36)
    for i, r in enumerate(ordered):
        tot = group_tot[(_BASIS_OF[r.setting_a], _BASIS_OF[r.setting_b])]
        if tot <= 0.0:
            raise ReconstructionError(
                f"basis group of ({r.setting_a}, {r.setting_b}) has zero counts")
        probs[i] = rates[i] / tot
    projs = _projector_stack(ordered)
    design = np.array([[float(np.real(np.trace(pi @ bk))) for bk in _HERM_BASIS]
                       for pi in projs])
    if np.linalg.matrix_rank(design) < 16:
        raise ReconstructionError("rank-deficient design matrix")
    x, *_ = np.linalg.lstsq(design, probs, rcond=None)
    rho = sum(xk * bk for xk, bk in zip(x, _HERM_BASIS))
    return rho / float(np.real(np.trace(rho)))


def mle_state(records: list[CountRecord],
              options: TomographyOptions | None = None) -> TomographyResult:
    """Maximum-likelihood two-qubit state reconstruction.

    Expected counts are mu_s = N * duration_s * Tr[(P_a x P_b) rho] with the
    flux N estimated from the complete basis groups (or fitted when
    ``fit_normalization`` is set). Non-convergence is reported through the
    ``converged`` flag, never silently.
    """
    opts = options or TomographyOptions()
    ordered = _sorted_label_records(records)
    raw_counts = np.array([max(0.0, r.coincidences) for r in ordered])
    if np.all(raw_counts == 0):
        raise ReconstructionError("all counts are zero")
    durations = np.array([r.duration for r in ordered])
    raw_norms = _flux_rate(ordered) * durations
    projs = _projector_stack(ordered)

    # Optimize at unit count scale so the landscape (hence the returned
    # estimate) is invariant under a global rescaling of all counts.
    scale = raw_counts.sum() / raw_counts.size
    counts = raw_counts / scale
    base_norms = raw_norms / scale

    def neg_loglik(t, counts, base_norms):
        T = _params_to_t(t[:16])
        g = T.conj().T @ T
        tau = float(np.real(np.trace(g)))
        rho = g / tau
        c = np.clip(np.real(np.einsum("sij,ji->s", projs, rho)), 1e-12, None)
        norms = np.exp(t[16]) * base_norms if t.size == 17 else base_norms
        mu = norms * c
        ll = float(np.sum(counts * np.log(mu) - mu))
        w = counts / c - norms
        m = np.tensordot(w, projs, axes=(0, 0))
        gt = (T @ m - float(np.dot(w, c)) * T) / tau
        grad = np.zeros(t.size)
        grad[:4] = 2.0 * np.real(np.diag(gt))
        grad[4:10] = 2.0 * np.real(gt[_TRIU_R, _TRIU_C])
        grad[10:16] = 2.0 * np.imag(gt[_TRIU_R, _TRIU_C])
        if t.size == 17:
            grad[16] = float(np.sum(counts - mu))
        return -ll, -grad

    if opts.start == "mixed":
        t0 = _params_of_rho(np.eye(4) / 4.0)
    else:
        try:
            t0 = _params_of_rho(linear_inversion_state(ordered))
        except ReconstructionError:
            t0 = _params_of_rho(np.eye(4) / 4.0)
    if opts.fit_normalization:
        t0 = np.append(t0, 0.0)

    history = [-neg_loglik(t0, raw_counts, raw_norms)[0]]

    def record_step(xk):
        history.append(-neg_loglik(xk, raw_counts, raw_norms)[0])

    res = optimize.minimize(
        neg_loglik, t0, args=(counts, base_norms), jac=True, method="L-BFGS-B",
        callback=record_step,
        options={"maxiter": opts.max_iters, "ftol": opts.rel_tol,
                 "gtol": 1e-10 * max(1.0, counts.sum()), "maxcor": 20})
    _check_monotone(history)
    rho_hat = _rho_of_params(res.x[:16])
    target = opts.fidelity_target if opts.fidelity_target is not None else bell_state("phi+")
    metrics = MetricReport(fidelity=fidelity(rho_hat, target), purity=purity(rho_hat),
                           tangle=tangle(rho_hat))
    return TomographyResult(estimate=rho_hat, log_likelihood=history[-1],
                            iterations=int(res.nit), converged=bool(res.success),
                            metrics=metrics, kind="state", history=history)


# ---------------------------------------------------------------------------
# process tomography
# ---------------------------------------------------------------------------

def _chi_basis_matrix() -> np.ndarray:
    """Column 4m+n holds vec(sigma_n^T x sigma_m) (column-major vec)."""
    cmat = np.zeros((16, 16), dtype=complex)
    for m in range(4):
        for n in range(4):
            cmat[:, 4 * m + n] = np.kron(PAULIS[n].T, PAULIS[m]).reshape(-1, order="F")
    return cmat


_CHI_BASIS = _chi_basis_matrix()
_CHI_BASIS_INV = np.linalg.inv(_CHI_BASIS)


def channel_chi(apply_fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Chi matrix (Pauli basis) of a linear single-qubit map."""
    smat = np.zeros((4, 4), dtype=complex)
    for j in range(2):
        for i in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            smat[:, 2 * j + i] = apply_fn(e).reshape(-1, order="F")
    return (_CHI_BASIS_INV @ smat.reshape(-1, order="F")).reshape(4, 4)


def identity_chi() -> np.ndarray:
    """Chi matrix of the identity channel: single (I, I) element."""
    return channel_chi(lambda r: r)


def chi_to_transfer(chi: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Return the map rho -> sum_mn chi_mn sigma_m rho sigma_n."""
    def apply(rho):
        out = np.zeros((2, 2), dtype=complex)
        for m in range(4):
            for n in range(4):
                out += chi[m, n] * PAULIS[m] @ rho @ PAULIS[n]
        return out
    return apply


def tp_violation(chi: np.ndarray) -> float:
    """Max deviation of sum_mn chi_mn sigma_n sigma_m from the identity."""
    acc = np.zeros((2, 2), dtype=complex)
    for m in range(4):
        for n in range(4):
            acc += chi[m, n] * PAULIS[n] @ PAULIS[m]
    return float(np.max(np.abs(acc - np.eye(2))))


def check_chi_matrix(chi: np.ndarray, require_tp: bool = False,
                     herm_tol: float = 1e-10, eig_tol: float = 1e-10,
                     tp_tol: float = 1e-6) -> np.ndarray:
    """Validate Hermiticity, positivity, trace range and optionally TP."""
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (4, 4):
        raise ValueError("chi matrix must be 4x4")
    if np.max(np.abs(chi - chi.conj().T)) > herm_tol:
        raise ValueError("chi matrix not Hermitian")
    if float(np.min(np.linalg.eigvalsh(chi))) < -eig_tol:
        raise ValueError("chi matrix not positive semidefinite")
    tr = float(np.real(np.trace(chi)))
    if not 0.0 < tr <= 1.0 + 1e-10:
        raise ValueError(f"chi trace {tr} outside (0, 1]")
    if require_tp and tp_violation(chi) > tp_tol:
        raise ValueError("chi matrix is not trace preserving")
    return chi


def _choi_of_params(t: np.ndarray, retract: bool) -> np.ndarray:
    T = _params_to_t(t)
    j = T.conj().T @ T
    if not retract:
        return j
    j4 = j.reshape(2, 2, 2, 2)
    g = np.einsum("kikj->ij", j4)
    w, v = np.linalg.eigh(g)
    g_inv_sqrt = (v * (1.0 / np.sqrt(np.clip(w, 1e-14, None)))) @ v.conj().T
    x = np.kron(np.eye(2), g_inv_sqrt)
    return x @ j @ x


def _chi_of_choi(j: np.ndarray) -> np.ndarray:
    smat = np.zeros((4, 4), dtype=complex)
    j4 = j.reshape(2, 2, 2, 2)
    for jj in range(2):
        for ii in range(2):
            # E(|ii><jj|)[o1, o2] = J4[o1, ii, o2, jj]
            out = j4[:, ii, :, jj]
            smat[:, 2 * jj + ii] = out.reshape(-1, order="F")
    return (_CHI_BASIS_INV @ smat.reshape(-1, order="F")).reshape(4, 4)


def mle_process(records: list[CountRecord],
                options: TomographyOptions | None = None) -> TomographyResult:
    """Maximum-likelihood single-qubit process reconstruction.

    Records pair an input-state label (setting_a) with a measurement label
    (setting_b). Expected counts are mu = N_k * Tr[P_m E(rho_k)] with the
    per-input flux N_k estimated from the three complete measurement bases.
    With tp_mode="constrain" trace preservation holds exactly through the
    Choi retraction; "normalize" fits an unconstrained CP map and rescales
    the chi matrix to unit trace afterwards.
    """
    opts = options or TomographyOptions()
    ordered = _sorted_label_records(records)
    raw_counts = np.array([max(0.0, r.coincidences) for r in ordered])
    if np.all(raw_counts == 0):
        raise ReconstructionError("all counts are zero")
    durations = np.array([r.duration for r in ordered])
    rates = raw_counts / durations
    raw_norms = np.empty(36)
    for k in range(6):
        sl = slice(6 * k, 6 * k + 6)
        flux = float(np.sum(rates[sl])) / 3.0
        if flux <= 0.0:
            raise ReconstructionError(
                f"input state {PROJECTOR_LABELS[k]!r} has zero counts")
        raw_norms[sl] = flux * durations[sl]

    # unit count scale, as in mle_state
    scale = raw_counts.sum() / raw_counts.size
    counts = raw_counts / scale
    norms = raw_norms / scale

    # p_s = Tr[J (P_meas x rho_in^T)]
    wstack = np.array([np.kron(projector(r.setting_b), projector(r.setting_a).T)
                       for r in ordered])
    retract = opts.tp_mode == "constrain"

    def neg_loglik(t, counts, norms):
        j = _choi_of_params(t, retract)
        p = np.clip(np.real(np.einsum("sij,ji->s", wstack, j)), 1e-12, None)
        mu = norms * p
        return -float(np.sum(counts * np.log(mu) - mu))

    t0 = np.zeros(16)
    t0[:4] = (1.0, 1.0, 0.05, 0.05)
    history = [-neg_loglik(t0, raw_counts, raw_norms)]

    def record_step(xk):
        history.append(-neg_loglik(xk, raw_counts, raw_norms))

    res = optimize.minimize(
        neg_loglik, t0, args=(counts, norms), method="L-BFGS-B", callback=record_step,
        options={"maxiter": opts.max_iters, "ftol": opts.rel_tol,
                 "gtol": 1e-8 * max(1.0, counts.sum())})
    _check_monotone(history)
    j_hat = _choi_of_params(res.x, retract)
    chi_hat = _chi_of_choi(j_hat)
    chi_hat = (chi_hat + chi_hat.conj().T) / 2.0
    if not retract:
        chi_hat = chi_hat / float(np.real(np.trace(chi_hat)))
    ideal = opts.process_ideal if opts.process_ideal is not None else identity_chi()
    metrics = MetricReport(fidelity=process_fidelity(chi_hat, ideal),
                           purity=process_purity(chi_hat), tangle=None)
    return TomographyResult(estimate=chi_hat, log_likelihood=history[-1],
                            iterations=int(res.nit), converged=bool(res.success),
                            metrics=metrics, kind="process", history=history)


def process_fidelity(chi: np.ndarray, ideal: np.ndarray) -> float:
    """Overlap Tr(chi chi_ideal) for a rank-1, trace-normalized ideal."""
    f = float(np.real(np.trace(np.asarray(chi) @ np.asarray(ideal))))
    return min(max(f, 0.0), 1.0)


def process_purity(chi: np.ndarray) -> float:
    """Tr(chi^2) of a trace-normalized process matrix."""
    chi = np.asarray(chi)
    p = float(np.real(np.trace(chi @ chi)))
    return min(max(p, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Monte-Carlo error bars
# ---------------------------------------------------------------------------

@dataclass
class MonteCarloErrors:
    """Per-metric sample means and standard deviations over MC resamples."""

    means: dict[str, float]
    std_errors: dict[str, float]
    n_samples: int
    n_failed: int


def monte_carlo_errors(records: list[CountRecord],
                       reconstructor: Callable[[list[CountRecord]], np.ndarray],
                       metrics: dict[str, Callable[[np.ndarray], float]],
                       n_samples: int, seed: int) -> MonteCarloErrors:
    """Poissonian resampling error bars for reconstruction-derived metrics.

    Each resample redraws every coincidence count from a Poisson law with
    mean equal to the observed count, reruns ``reconstructor`` and evaluates
    the metric set. Individual failures are tolerated up to 10% of the
    samples; beyond that the run aborts.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    raw = np.array([max(0.0, r.coincidences) for r in records])
    values: dict[str, list[float]] = {name: [] for name in metrics}
    n_failed = 0
    for s in range(n_samples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(s,)))
        resampled = [replace(r, coincidences=float(c))
                     for r, c in zip(records, rng.poisson(raw))]
        try:
            estimate = reconstructor(resampled)
        except (ReconstructionError, ValueError):
            n_failed += 1
            continue
        for name, fn in metrics.items():
            values[name].append(float(fn(estimate)))
    if n_failed > 0.1 * n_samples:
        raise ReconstructionError(
            f"{n_failed}/{n_samples} Monte-Carlo resamples failed to reconstruct")
    means = {name: float(np.mean(v)) for name, v in values.items()}
    stds = {name: float(np.std(v, ddof=1)) for name, v in values.items()}
    return MonteCarloErrors(means=means, std_errors=stds,
                            n_samples=n_samples, n_failed=n_failed)
