"""Restarted outer iteration for the six expansion/extraction combinations.

Methods are the cross product of the expansion rule (shift-invert residual
expansion, or the projected correction equation) with the extraction kind
(standard, harmonic, refined harmonic). One solve owns its subspace state,
preconditioner and tolerance governor; everything runs in complex128
regardless of input scalar kind, and a run is deterministic for a fixed
config and matrix.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dense, extraction, governor, ilu, krylov

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MethodSpec:
    """expansion in {sira, jd}; extraction in {standard, harmonic,
    refined-harmonic}."""
    expansion: str
    extraction: str

    _NAMES = {
        "sira": ("sira", "standard"),
        "jd": ("jd", "standard"),
        "hsira": ("sira", "harmonic"),
        "hjd": ("jd", "harmonic"),
        "rhsira": ("sira", "refined-harmonic"),
        "rhjd": ("jd", "refined-harmonic"),
    }

    def __post_init__(self):
        if self.expansion not in ("sira", "jd"):
            raise ValueError(f"unknown expansion {self.expansion!r}")
        if self.extraction not in ("standard", "harmonic", "refined-harmonic"):
            raise ValueError(f"unknown extraction {self.extraction!r}")

    @classmethod
    def from_name(cls, name):
        try:
            exp, ext = cls._NAMES[name.lower()]
        except KeyError:
            raise ValueError(f"unknown method {name!r}; choose from "
                             f"{sorted(cls._NAMES)}") from None
        return cls(exp, ext)

    @property
    def name(self):
        for nm, (exp, ext) in self._NAMES.items():
            if (exp, ext) == (self.expansion, self.extraction):
                return nm
        raise AssertionError


METHOD_NAMES = tuple(MethodSpec._NAMES)


@dataclass
class SolveConfig:
    sigma: complex
    m_max: int = 30
    max_restarts: int = 500
    tol_factor: float = 1e-12
    governor_mode: str = "adaptive"   # adaptive | exact | fixed
    eps_tilde: float = 1e-3
    fixed_eps: Optional[float] = None
    ilu_drop_tol: float = 1e-3
    ilu_fill_cap: Optional[int] = None
    gmres_restart: int = 30
    gmres_max_iters: int = 1000
    refined_approach: str = "I"
    seed: int = 0

    def __post_init__(self):
        if self.m_max < 2:
            raise ValueError("m_max must be >= 2")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be >= 1")


@dataclass
class OuterRecord:
    cycle: int
    m: int
    rho: complex
    residual_norm: float
    eps_used: float        # nan when no inner solve followed (converged step)
    c_prime: float
    inner_iters: int
    capped: bool
    inner_achieved: float
    inner_converged: bool


@dataclass
class SolveReport:
    method: str
    converged: bool
    eigenvalue: complex
    eigenvector: np.ndarray
    residual_norm: float
    tol: float
    i_restart: int
    i_outer: int
    i_inner: int
    p_01: float
    history: list = field(default_factory=list)
    ilu_pivot_patches: int = 0
    deflation_restarts: int = 0
    extraction_failures: int = 0


def convergence_check(r, tol):
    """Strict test ||r|| < tol."""
    return bool(np.linalg.norm(r) < tol)


def restart_basis(y, problem_is_real):
    """Collapse the subspace to the current approximate eigenvector.

    For a genuinely complex problem the vector is used as the single new
    column. For a real problem whose approximation drifted complex (a
    conjugate pair), real and imaginary parts are normalized and
    orthonormalized into a two-column basis; a numerically real (or
    numerically parallel) pair falls back to one column.
    """
    y = np.asarray(y, dtype=np.complex128)
    ynorm = np.linalg.norm(y)
    if not problem_is_real:
        return (y / ynorm)[:, None]
    re, im = y.real.copy(), y.imag.copy()
    re_n, im_n = np.linalg.norm(re), np.linalg.norm(im)
    if im_n <= 1e-13 * ynorm:
        return (re / re_n).astype(np.complex128)[:, None]
    if re_n <= 1e-13 * ynorm:
        return (im / im_n).astype(np.complex128)[:, None]
    v1 = (re / re_n).astype(np.complex128)
    try:
        v2, _ = dense.orthonormalize_against(v1[:, None],
                                             im.astype(np.complex128))
    except dense.DeflatedSubspace:
        return v1[:, None]
    return np.column_stack([v1, v2])


def _extractor(spec, approach):
    if spec.extraction == "standard":
        return extraction.extract_standard
    if spec.extraction == "harmonic":
        return extraction.extract_harmonic
    return lambda state, A: extraction.extract_refined_harmonic(
        state, A, approach=approach)


def solve(A, spec, cfg):
    """Run one restarted solve; returns a SolveReport, never raises for
    numerical trouble (breakdowns are logged, counted and survived).

    Outline per outer iteration: extract an approximate pair, stop when its
    residual beats tol = max(||A||_1, 1) * tol_factor, otherwise ask the
    governor for the inner tolerance, solve the expansion system with
    preconditioned GMRES, orthonormalize the solution into the basis and
    expand; when the basis is full (or the expansion deflates), collapse to
    the current approximate eigenvector and restart. Fails after
    max_restarts restarts, reporting the best pair seen.
    """
    if isinstance(spec, str):
        spec = MethodSpec.from_name(spec)
    sigma = complex(cfg.sigma)
    problem_is_real = (not A.is_complex) and sigma.imag == 0.0
    tol = max(A.one_norm(), 1.0) * cfg.tol_factor
    factors = ilu.ilut_factorize(A, sigma, cfg.ilu_drop_tol,
                                 fill_cap=cfg.ilu_fill_cap)
    gov = governor.ToleranceGovernor(cfg.governor_mode, cfg.eps_tilde,
                                     cfg.fixed_eps)
    extract = _extractor(spec, cfg.refined_approach)
    rng = np.random.default_rng(cfg.seed)

    n = A.n
    v0 = np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128)
    state = extraction.SubspaceState(A, sigma, v0, capacity=cfg.m_max)

    history = []
    i_restart = 0
    i_inner = 0
    deflations = 0
    extraction_failures = 0
    best = None  # (residual_norm, rho, y)
    converged = False
    failed = False

    def do_restart(y_restart, force_perturb=False):
        nonlocal state, i_restart, failed
        i_restart += 1
        if i_restart >= cfg.max_restarts:
            failed = True
            return
        Vnew = restart_basis(y_restart, problem_is_real)
        if force_perturb:
            # deflated immediately after a restart: inject a deterministic
            # random direction so the cycle cannot repeat verbatim
            pert = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            try:
                extra, _ = dense.orthonormalize_against(Vnew, pert)
                Vnew = np.column_stack([Vnew, extra])
            except dense.DeflatedSubspace:  # pragma: no cover
                pass
        state = extraction.SubspaceState(A, sigma, Vnew, capacity=cfg.m_max)

    while not (converged or failed):
        cycle = i_restart + 1
        try:
            ext = extract(state, A)
        except (dense.NotPositiveDefinite, dense.NoConvergence) as exc:
            extraction_failures += 1
            logger.warning("extraction failed (%s); restarting", exc)
            y_fallback = best[2] if best is not None else state.V[:, 0]
            do_restart(y_fallback, force_perturb=True)
            continue

        if best is None or ext.residual_norm < best[0]:
            best = (ext.residual_norm, ext.rho, ext.y)

        if convergence_check(ext.residual, tol):
            history.append(OuterRecord(cycle, state.m, ext.rho,
                                       ext.residual_norm, float("nan"),
                                       float("nan"), 0, False, float("nan"),
                                       True))
            converged = True
            break

        c_prime = governor.compute_c_prime(ext.rho, sigma,
                                           ext.harmonic_values, state.m)
        eps = gov.inner_tolerance(c_prime)

        if spec.expansion == "sira":
            op = krylov.make_sira_operator(A, sigma)
            rhs = ext.residual
            m_inv = factors.solve
        else:
            op = krylov.make_jd_operator(A, sigma, ext.y)
            # the correction equation lives in span(y)-perp; strip the
            # rounding-level y-component of the rhs or tight tolerances
            # become uncertifiable (the operator cannot touch it)
            rhs = -ext.residual
            rhs = rhs - np.vdot(ext.y, rhs) * ext.y
            m_inv = ilu.JdProjectedPreconditioner(factors, ext.y).apply
        out = krylov.gmres(op, rhs, eps, m_inv=m_inv,
                           restart=cfg.gmres_restart,
                           max_iters=cfg.gmres_max_iters)
        i_inner += out.iterations
        history.append(OuterRecord(cycle, state.m, ext.rho, ext.residual_norm,
                                   eps, c_prime, out.iterations,
                                   gov.last_capped, out.achieved_rel_residual,
                                   out.converged))

        try:
            v, _ = dense.orthonormalize_against(state.V, out.solution)
        except dense.DeflatedSubspace:
            deflations += 1
            logger.info("expansion vector deflated at m=%d; restarting",
                        state.m)
            at_floor = state.m <= 2  # a fresh restart basis cannot shrink
            do_restart(ext.y, force_perturb=at_floor)
            continue

        if state.m < cfg.m_max:
            state.expand(A, v)
        else:
            do_restart(ext.y)

    # on convergence the best pair seen is the converged one (anything
    # strictly better earlier would have converged earlier); on failure it
    # is the smallest-residual pair across the whole run
    res_final, rho_final, y_final = best if best is not None else \
        (np.inf, complex("nan"), v0)

    return SolveReport(
        method=spec.name,
        converged=converged,
        eigenvalue=rho_final,
        eigenvector=y_final,
        residual_norm=float(res_final),
        tol=float(tol),
        i_restart=i_restart,
        i_outer=gov.count_total,
        i_inner=i_inner,
        p_01=gov.p_01,
        history=history,
        ilu_pivot_patches=factors.pivot_patches,
        deflation_restarts=deflations,
        extraction_failures=extraction_failures,
    )
