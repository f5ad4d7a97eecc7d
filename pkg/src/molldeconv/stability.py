"""Stability analysis: condition-number probing, operator norms, calibration.

Two complementary stability functionals are exposed and either can serve as
the budget: the noise-probe ratio kappa (relative reconstruction perturbation
over relative data perturbation, an approximate lower bound on the condition
number) and the L2(Omega) operator norm of the restricted reconstruction map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .betafield import BetaField, RegionMask, constant_beta, full_mask, two_region_beta
from .grids import SampledField, SpectralField
from .kernels import KernelSpec, MollifierSpec
from .reconstruct import ReconstructionParams, filter_on_grid, reconstruct_fast
from .transforms import forward_transform, inverse_transform

__all__ = [
    "StabilityReport",
    "NormEstimate",
    "ScalingReport",
    "CalibrationError",
    "CalibrationResult",
    "estimate_kappa",
    "operator_norm",
    "stability_scaling_experiment",
    "calibrate_beta",
    "match_kappa",
]


class CalibrationError(RuntimeError):
    """Calibration target unreachable or the kappa map is not monotone."""


def _masked_l2(values: np.ndarray, mask: np.ndarray, cell: float) -> float:
    return float(np.sqrt(np.sum(np.abs(values[mask]) ** 2) * cell))


@dataclass(frozen=True)
class StabilityReport:
    """Noise-probe stability estimate.

    For a single realization ``kappa == c2 / c1`` exactly as computed; with
    several realizations ``c1``/``c2`` are means and ``kappa`` is the mean of
    the per-realization ratios, with the min/max spread recorded.
    """

    c1: float
    c2: float
    kappa: float
    kappa_spread: tuple[float, float]
    seed: int
    realizations: int
    norm_used: str = "l2-omega"
    kappa_values: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "kappa": self.kappa,
            "kappa_spread": list(self.kappa_spread),
            "seed": self.seed,
            "realizations": self.realizations,
            "norm_used": self.norm_used,
            "kappa_values": list(self.kappa_values),
        }


@dataclass(frozen=True)
class NormEstimate:
    """Largest singular value of the restricted reconstruction map."""

    estimate: float
    iterations: int
    tol: float
    converged: bool


@dataclass(frozen=True)
class ScalingReport:
    """Fit of log(operator norm) against log(1/B) for B = alpha * inf beta."""

    B_values: tuple[float, ...]
    norms: tuple[float, ...]
    fitted_exponent: float
    theorem_exponent: float
    fit_residual: float


@dataclass(frozen=True)
class CalibrationResult:
    beta_in: float
    beta_out: float
    kappa: float
    evaluations: int


def estimate_kappa(
    g: SampledField,
    params: ReconstructionParams,
    noise_sigma: float,
    seed: int,
    realizations: int = 1,
    omega: RegionMask | None = None,
) -> StabilityReport:
    """Probe kappa = c2/c1 with i.i.d. Gaussian noise injections.

    ``c1 = |delta|/|g|`` and ``c2 = |R(g+delta) - R(g)| / |R(g)|`` in the
    L2 norm restricted to ``omega`` (default: whole grid).  Deterministic
    given (seed, realizations); realizations are drawn sequentially from one
    seeded generator.
    """
    if noise_sigma <= 0:
        raise ValueError(f"noise_sigma must be positive, got {noise_sigma}")
    if realizations < 1:
        raise ValueError("need at least one realization")
    mask = (omega or full_mask(g.grid)).membership
    if omega is not None and omega.grid != g.grid:
        raise ValueError("omega grid does not match the data grid")
    cell = g.grid.cell_volume
    g_norm = _masked_l2(g.values, mask, cell)
    if g_norm == 0:
        raise ValueError("data vanishes on omega; c1 is undefined")
    rec0 = reconstruct_fast(g, params)
    rec0_norm = _masked_l2(rec0.values, mask, cell)
    if rec0_norm == 0:
        raise ValueError("baseline reconstruction vanishes on omega; c2 is undefined")

    rng = np.random.default_rng(seed)
    c1s, c2s, kappas = [], [], []
    for _ in range(realizations):
        delta = noise_sigma * rng.standard_normal(g.grid.shape)
        rec = reconstruct_fast(SampledField(g.grid, g.values + delta), params)
        c1 = _masked_l2(delta.astype(np.complex128), mask, cell) / g_norm
        c2 = _masked_l2(rec.values - rec0.values, mask, cell) / rec0_norm
        c1s.append(c1)
        c2s.append(c2)
        kappas.append(c2 / c1)
    return StabilityReport(
        c1=float(np.mean(c1s)),
        c2=float(np.mean(c2s)),
        kappa=float(np.mean(kappas)),
        kappa_spread=(float(np.min(kappas)), float(np.max(kappas))),
        seed=int(seed),
        realizations=realizations,
        kappa_values=tuple(float(k) for k in kappas),
    )


def _restricted_apply_pair(params: ReconstructionParams, omega: RegionMask):
    """Apply closures for A = P R P and its adjoint, P the omega projection.

    The adjoint applies the conjugated symbol with mask-then-filter order
    swapped: ``R* v = sum_l F^-1[conj(p_l) F(M_l v)]``.
    """
    grid = params.beta.grid
    if omega.grid != grid:
        raise ValueError("omega grid does not match the beta field grid")
    sgrid = grid.spectral()
    proj = omega.membership
    filters = [
        filter_on_grid(params.kernel, params.mollifier, sgrid, params.alpha * beta_value)
        for _, beta_value in params.beta.levels
    ]
    masks = [mask.membership for mask, _ in params.beta.levels]

    def apply(v: np.ndarray) -> np.ndarray:
        w = np.where(proj, v, 0.0)
        spec = forward_transform(SampledField(grid, w))
        out = np.zeros(grid.shape, dtype=np.complex128)
        for p, m in zip(filters, masks):
            h = inverse_transform(SpectralField(spec.sgrid, p * spec.values))
            out[m] = h.values[m]
        return np.where(proj, out, 0.0)

    def apply_adjoint(v: np.ndarray) -> np.ndarray:
        w = np.where(proj, v, 0.0)
        out = np.zeros(grid.shape, dtype=np.complex128)
        for p, m in zip(filters, masks):
            masked = np.where(m, w, 0.0)
            spec = forward_transform(SampledField(grid, masked))
            h = inverse_transform(SpectralField(spec.sgrid, np.conj(p) * spec.values))
            out += h.values
        return np.where(proj, out, 0.0)

    return apply, apply_adjoint


def operator_norm(
    params: ReconstructionParams,
    omega: RegionMask | None = None,
    tol: float = 1e-10,
    max_iter: int = 2000,
    seed: int = 0,
) -> NormEstimate:
    """Largest singular value of g|_Omega -> (R g)|_Omega by power iteration.

    Iterates A* A with the Rayleigh-quotient estimate; the adjoint is the
    conjugate-symbol application (verified against a dense-matrix transpose
    in the test suite).  Non-convergence within ``max_iter`` is reported via
    the ``converged`` flag, not raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    omega = omega or full_mask(params.beta.grid)
    apply, apply_adjoint = _restricted_apply_pair(params, omega)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(params.beta.grid.shape).astype(np.complex128)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        w = apply_adjoint(apply(v))
        lam = float(np.real(np.vdot(v, w)))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return NormEstimate(0.0, iterations, tol, True)
        v = w / nw
        if lam_prev > 0 and abs(lam - lam_prev) <= tol * lam:
            converged = True
            lam_prev = lam
            break
        lam_prev = lam
    return NormEstimate(float(np.sqrt(max(lam_prev, 0.0))), iterations, tol, converged)


def stability_scaling_experiment(
    kernel: KernelSpec,
    mollifier: MollifierSpec,
    omega: RegionMask,
    B_values,
    tol: float = 1e-8,
    max_iter: int = 3000,
    seed: int = 0,
) -> ScalingReport:
    """Fit the growth exponent of the operator norm as B = alpha * inf(beta) shrinks.

    Runs constant beta = B at alpha = 1 for each B, fits the slope s of
    log(norm) against log(1/B) and reports it next to the trade-off bound
    exponent n + b.  Requires kernel bound constants and B spanning at least
    two decades with three or more points.
    """
    if kernel.bound_constants is None:
        raise ValueError("scaling experiment needs a kernel with certified bound constants")
    Bs = sorted(float(b) for b in B_values)
    if len(Bs) < 3:
        raise ValueError("need at least 3 B values for a fit")
    if Bs[-1] / Bs[0] < 100.0 * (1.0 - 1e-9):
        raise ValueError("B values must span at least two decades")
    grid = omega.grid
    norms = []
    for B in Bs:
        params = ReconstructionParams(
            alpha=1.0, beta=constant_beta(grid, B), kernel=kernel, mollifier=mollifier
        )
        est = operator_norm(params, omega, tol=tol, max_iter=max_iter, seed=seed)
        norms.append(est.estimate)
    x = np.log(1.0 / np.asarray(Bs))
    y = np.log(np.asarray(norms))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    _, b = kernel.bound_constants
    return ScalingReport(
        B_values=tuple(Bs),
        norms=tuple(norms),
        fitted_exponent=float(slope),
        theorem_exponent=float(grid.dims + b),
        fit_residual=resid,
    )


def match_kappa(
    kappa_of,
    target: float,
    lo: float,
    hi: float,
    rel_tol: float = 0.02,
    max_iter: int = 60,
) -> tuple[float, float, int]:
    """Bisect a scalar knob until ``kappa_of(knob)`` matches ``target``.

    Assumes kappa is monotone on [lo, hi]; the target must be bracketed by
    the endpoint values and bracketing violations (non-monotone kappa) raise
    :class:`CalibrationError` with diagnostics.  Returns
    (knob, kappa, evaluations).
    """
    if not (lo < hi):
        raise ValueError("need lo < hi")
    k_lo = kappa_of(lo)
    k_hi = kappa_of(hi)
    evals = 2
    for knob, k in ((lo, k_lo), (hi, k_hi)):
        if abs(k - target) <= rel_tol * target:
            return knob, k, evals
    if not (min(k_lo, k_hi) < target < max(k_lo, k_hi)):
        raise CalibrationError(
            f"target kappa {target:.4g} not bracketed: kappa({lo:.4g}) = {k_lo:.4g}, "
            f"kappa({hi:.4g}) = {k_hi:.4g}"
        )
    decreasing = k_lo > k_hi
    for _ in range(max_iter):
        mid = np.sqrt(lo * hi) if lo > 0 and hi / lo > 50 else 0.5 * (lo + hi)
        k_mid = kappa_of(mid)
        evals += 1
        span = (min(k_lo, k_hi), max(k_lo, k_hi))
        slack = 0.05 * (span[1] - span[0]) + 1e-12
        if not (span[0] - slack <= k_mid <= span[1] + slack):
            raise CalibrationError(
                f"kappa is not monotone on the bracket: kappa({mid:.4g}) = {k_mid:.4g} "
                f"outside [{span[0]:.4g}, {span[1]:.4g}]"
            )
        if abs(k_mid - target) <= rel_tol * target:
            return mid, k_mid, evals
        if (k_mid > target) == decreasing:
            lo, k_lo = mid, k_mid
        else:
            hi, k_hi = mid, k_mid
    raise CalibrationError(
        f"no kappa within {rel_tol:.0%} of {target:.4g} after {max_iter} bisection steps"
    )


def calibrate_beta(
    g: SampledField,
    kernel: KernelSpec,
    mollifier: MollifierSpec,
    alpha: float,
    roi: RegionMask,
    target_kappa: float,
    beta_out_range: tuple[float, float],
    *,
    beta_in_candidates,
    noise_sigma: float,
    seed: int,
    realizations: int = 1,
    omega: RegionMask | None = None,
    rel_tol: float = 0.02,
    max_iter: int = 60,
) -> CalibrationResult:
    """Find the finest ROI resolution that stays inside a global kappa budget.

    For each candidate ``beta_in`` (ascending) the outer value is bisected in
    ``beta_out_range`` until the probed kappa of the two-region field matches
    ``target_kappa`` within ``rel_tol``; the first (smallest) candidate that
    succeeds wins.  Every kappa probe reuses the same seed, so the search is
    deterministic.  A full-grid ROI degenerates to constant-beta matching.
    """
    lo, hi = (float(beta_out_range[0]), float(beta_out_range[1]))
    if not (0 < lo < hi):
        raise ValueError(f"invalid beta_out_range {beta_out_range}")
    candidates = sorted(float(b) for b in np.atleast_1d(beta_in_candidates))
    if not candidates or candidates[0] <= 0:
        raise ValueError("beta_in_candidates must be positive")

    def kappa_for_field(beta_field: BetaField) -> float:
        params = ReconstructionParams(
            alpha=alpha, beta=beta_field, kernel=kernel, mollifier=mollifier
        )
        return estimate_kappa(
            g, params, noise_sigma, seed, realizations=realizations, omega=omega
        ).kappa

    if roi.is_full:
        knob, kappa, evals = match_kappa(
            lambda b: kappa_for_field(constant_beta(g.grid, b)),
            target_kappa,
            lo,
            hi,
            rel_tol,
            max_iter,
        )
        return CalibrationResult(beta_in=knob, beta_out=knob, kappa=kappa, evaluations=evals)

    total_evals = 0
    failures = []
    for beta_in in candidates:
        try:
            knob, kappa, evals = match_kappa(
                lambda b: kappa_for_field(two_region_beta(g.grid, roi, beta_in, b)),
                target_kappa,
                lo,
                hi,
                rel_tol,
                max_iter,
            )
        except CalibrationError as err:
            failures.append(f"beta_in={beta_in:.4g}: {err}")
            total_evals += 2
            continue
        return CalibrationResult(
            beta_in=beta_in, beta_out=knob, kappa=kappa, evaluations=total_evals + evals
        )
    raise CalibrationError(
        "no beta_in candidate met the kappa budget inside the beta_out range; "
        + "; ".join(failures)
    )
