"""Passive beamforming: RIS phase optimization on the trace objective.

With theta_n = mu e^{j phi_n}, tr(H_e H_e^H) = theta^H D theta for the
Hermitian PSD matrix D = conj(H1 H1^H) o (H2^H H2) (entrywise product).
Minimizing f(phi) = -theta^H D theta over the unconstrained continuous phases
is done by gradient descent; the adaptive variant picks each step size from
the exact second-order expansion of f along the gradient direction, and the
final iterate is quantized onto the discrete hardware codebook.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .graphene import PhaseCodebook

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuadraticForm:
    """Hermitian PSD matrix of the trace objective theta^H D theta."""

    matrix: np.ndarray
    source_dims: tuple  # (n_bs, n_ms, n_ris)

    @property
    def n_ris(self) -> int:
        return self.matrix.shape[0]

    def scaled(self, factor: float) -> "QuadraticForm":
        return replace(self, matrix=self.matrix * factor)

    def trace_normalized(self) -> tuple:
        """Rescale so tr(D) = n_ris; returns (form, applied scale factor).

        Gradient descent trajectories with the adaptive step are invariant
        under positive rescaling, but the constant-step baseline and the
        curvature guard are calibrated for order-one matrices, so harness
        optimization always runs on the normalized form.
        """
        tr = float(np.real(np.trace(self.matrix)))
        if tr <= 0.0:
            return self, 1.0
        scale = self.n_ris / tr
        return self.scaled(scale), scale


@dataclass(frozen=True)
class OptimizerSettings:
    """Iteration budget and step-size knobs shared by A-GD and C-GD."""

    max_iterations: int = 100
    fixed_step: float = 1e-2      # C-GD step size
    c2_epsilon: float = 1e-12     # curvature guard, relative to |C0|
    fallback_step: float = 1e-2   # used when the quadratic model degenerates
    init_phases: str = "zeros"    # "zeros" or "random"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.fixed_step <= 0:
            raise ValueError("fixed_step must be > 0")
        if self.c2_epsilon <= 0:
            raise ValueError("c2_epsilon must be > 0")
        if self.init_phases not in ("zeros", "random"):
            raise ValueError("init_phases must be 'zeros' or 'random'")


@dataclass
class GdTrace:
    """Per-iteration record of one optimizer run.

    iterations rows are (iteration index, trace objective theta^H D theta,
    step size applied at that iterate, gradient norm). best_* track the
    continuous iterate with the largest trace objective; quantized_* hold the
    codebook projection of that iterate.
    """

    iterations: list
    best_phases_rad: np.ndarray
    best_objective: float
    quantized_phases_rad: np.ndarray
    quantized_objective: float


def build_quadratic_form(h1: np.ndarray, h2: np.ndarray) -> QuadraticForm:
    """D = conj(H1 H1^H) o (H2^H H2), the Hadamard form of the Kronecker
    column construction; satisfies theta^H D theta = ||H2 diag(theta) H1||_F^2."""
    h1 = np.asarray(h1)
    h2 = np.asarray(h2)
    if h1.shape[0] != h2.shape[1]:
        raise ValueError(f"dimension mismatch: h1 {h1.shape} vs h2 {h2.shape}")
    d = np.conj(h1 @ h1.conj().T) * (h2.conj().T @ h2)
    return QuadraticForm(matrix=d, source_dims=(h1.shape[1], h2.shape[0], h1.shape[0]))


def objective(form: QuadraticForm, phases: np.ndarray, mean_amplitude: float) -> float:
    """f(phi) = -mu^2 sum_pq e^{-j phi_p} D_pq e^{j phi_q}; real and <= 0.

    The imaginary residue of the double sum (zero by Hermitian symmetry) is
    discarded.
    """
    u = np.exp(1j * np.asarray(phases, dtype=float))
    value = -mean_amplitude ** 2 * (u.conj() @ form.matrix @ u)
    return float(value.real)


def gradient(form: QuadraticForm, phases: np.ndarray, mean_amplitude: float) -> np.ndarray:
    """Analytic gradient of f; entry n is

    mu^2 j e^{-j phi_n} sum_q D_nq e^{j phi_q} - mu^2 j e^{j phi_n} sum_p D_pn e^{-j phi_p}

    which is real for Hermitian D (residue discarded).
    """
    u = np.exp(1j * np.asarray(phases, dtype=float))
    mu2 = mean_amplitude ** 2
    row = form.matrix @ u          # sum_q D_nq e^{j phi_q}
    col = u.conj() @ form.matrix   # sum_p D_pn e^{-j phi_p}
    grad = mu2 * 1j * (u.conj() * row) - mu2 * 1j * (u * col)
    return grad.real.copy()


def quadratic_model_coeffs(form: QuadraticForm, phases: np.ndarray,
                           grad: np.ndarray, mean_amplitude: float) -> tuple:
    """(C0, C1, C2) of the step-size model f(phi - lam*grad) ~ C0 + C1 lam + C2 lam^2.

    Expanding the double sum along the gradient direction with
    Gamma_pq = grad_p - grad_q gives

        C1 = Re[-mu^2 sum_pq D_pq e^{j(phi_q - phi_p)} j Gamma_pq]
        C2 = Re[+mu^2 sum_pq D_pq e^{j(phi_q - phi_p)} Gamma_pq^2 / 2]

    evaluated here with matrix-vector products only (no N^2 temporaries).
    """
    u = np.exp(1j * np.asarray(phases, dtype=float))
    g = np.asarray(grad, dtype=float)
    mu2 = mean_amplitude ** 2
    row = u.conj() * (form.matrix @ u)       # sum over q of M_pq, per p
    col = u * (u.conj() @ form.matrix)       # sum over p of M_pq, per q
    c0 = -mu2 * np.sum(row)
    s1 = g @ row - g @ col                   # sum_pq M_pq Gamma_pq
    gu = g * u
    s2 = (g * g) @ row + (g * g) @ col - 2.0 * (gu.conj() @ form.matrix @ gu)
    c1 = -mu2 * 1j * s1
    c2 = 0.5 * mu2 * s2
    return float(c0.real), float(c1.real), float(c2.real)


def adaptive_step(form: QuadraticForm, phases: np.ndarray, grad: np.ndarray,
                  mean_amplitude: float, settings: OptimizerSettings) -> float:
    """Step size from the second-order model of f along -grad.

    Vertex -C1/(2 C2) for convex curvature, |C1|/|C2| for concave curvature,
    and the configured fallback when |C2| degenerates (threshold scaled by
    the current objective magnitude).
    """
    c0, c1, c2 = quadratic_model_coeffs(form, phases, grad, mean_amplitude)
    guard = settings.c2_epsilon * abs(c0)
    if c2 > guard:
        return -c1 / (2.0 * c2)
    if c2 < -guard:
        return abs(c1) / abs(c2)
    return settings.fallback_step


def _init_phases(n: int, settings: OptimizerSettings, rng) -> np.ndarray:
    if settings.init_phases == "random":
        if rng is None:
            raise ValueError("random initialization needs an RNG stream")
        return rng.uniform(0.0, TWO_PI, size=n)
    return np.zeros(n)


def _descend(form: QuadraticForm, codebook: PhaseCodebook,
             settings: OptimizerSettings, step_rule, rng) -> GdTrace:
    """Common gradient-descent loop with best-iterate tracking."""
    mu = codebook.mean_amplitude
    phases = _init_phases(form.n_ris, settings, rng)
    trace_obj = -objective(form, phases, mu)
    best_obj = trace_obj
    best_phases = phases.copy()
    rows = []
    for i in range(settings.max_iterations):
        grad = gradient(form, phases, mu)
        lam = step_rule(phases, grad)
        rows.append((i, trace_obj, lam, float(np.linalg.norm(grad))))
        phases = phases - lam * grad
        trace_obj = -objective(form, phases, mu)
        if trace_obj > best_obj:
            best_obj = trace_obj
            best_phases = phases.copy()
    rows.append((settings.max_iterations, trace_obj, 0.0, 0.0))
    quant = quantize_phases(best_phases, codebook)
    return GdTrace(iterations=rows,
                   best_phases_rad=best_phases,
                   best_objective=best_obj,
                   quantized_phases_rad=quant,
                   quantized_objective=-objective(form, quant, mu))


def run_agd(form: QuadraticForm, codebook: PhaseCodebook,
            settings: OptimizerSettings, rng=None) -> GdTrace:
    """Adaptive-step gradient descent (A-GD) with terminal codebook quantization."""
    def rule(phases, grad):
        return adaptive_step(form, phases, grad, codebook.mean_amplitude, settings)
    return _descend(form, codebook, settings, rule, rng)


def run_cgd(form: QuadraticForm, codebook: PhaseCodebook,
            settings: OptimizerSettings, rng=None) -> GdTrace:
    """Constant-step gradient descent (C-GD) baseline."""
    def rule(phases, grad):
        return settings.fixed_step
    return _descend(form, codebook, settings, rule, rng)


def run_random_phase(form: QuadraticForm, codebook: PhaseCodebook,
                     n_draws: int, rng) -> GdTrace:
    """Uniform random codebook phases; best of n_draws (default draw count 1
    models a non-optimizing surface)."""
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    mu = codebook.mean_amplitude
    grid = codebook.phases_array()
    rows = []
    best_obj = -math.inf
    best_phases = None
    for k in range(n_draws):
        phases = grid[rng.integers(0, codebook.size, size=form.n_ris)]
        trace_obj = -objective(form, phases, mu)
        rows.append((k, trace_obj, 0.0, 0.0))
        if trace_obj > best_obj:
            best_obj = trace_obj
            best_phases = phases
    return GdTrace(iterations=rows, best_phases_rad=best_phases,
                   best_objective=best_obj,
                   quantized_phases_rad=best_phases,
                   quantized_objective=best_obj)


EXHAUSTIVE_LIMIT = 10 ** 6


def run_exhaustive(form: QuadraticForm, codebook: PhaseCodebook) -> tuple:
    """Exact discrete optimum of theta^H D theta over the codebook grid.

    Enumerates lexicographically; near-ties (1e-12 relative) resolve to the
    first grid point. Guarded to 10^6 candidates.
    """
    n = form.n_ris
    n_comb = codebook.size ** n
    if n_comb > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive search over {n_comb} candidates exceeds "
                         f"the {EXHAUSTIVE_LIMIT} limit")
    grid = codebook.phases_array()
    shape = (codebook.size,) * n
    mu2 = codebook.mean_amplitude ** 2
    values = np.empty(n_comb)
    chunk = 1 << 14
    for start in range(0, n_comb, chunk):
        idx = np.arange(start, min(start + chunk, n_comb))
        combos = np.stack(np.unravel_index(idx, shape), axis=1)
        u = np.exp(1j * grid[combos])
        values[idx] = mu2 * np.real(
            np.einsum("kn,nm,km->k", u.conj(), form.matrix, u))
    top = values.max()
    best = int(np.argmax(values >= top - 1e-12 * max(abs(top), 1.0)))
    best_combo = np.array(np.unravel_index(best, shape))
    return grid[best_combo], float(values[best])


def dump_trace(trace: GdTrace, path) -> None:
    """Write per-iteration rows (iter, objective, step, grad_norm) as plain
    text for convergence plots."""
    lines = ["# iter objective step grad_norm"]
    for it, obj, lam, gnorm in trace.iterations:
        lines.append(f"{it} {obj!r} {lam!r} {gnorm!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def quantize_phases(phases: np.ndarray, codebook: PhaseCodebook) -> np.ndarray:
    """Map each phase to the nearest codebook entry by circular distance.

    Phases are first wrapped into [0, 2pi); distances use the full circle, so
    values just below 2pi can map back to codebook phase 0. Ties (to 1e-12)
    break toward the lower-index entry.
    """
    wrapped = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    grid = codebook.phases_array()
    diff = np.abs(wrapped[:, None] - grid[None, :])
    dist = np.minimum(diff, TWO_PI - diff)
    best = dist.min(axis=1)
    choice = np.argmax(dist <= best[:, None] + 1e-12, axis=1)
    return grid[choice]
