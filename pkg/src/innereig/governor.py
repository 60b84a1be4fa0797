"""Adaptive accuracy rule for the inner linear solves.

Converts the user's expansion-vector accuracy target eps_tilde into the
relative-residual tolerance actually requested from GMRES at each outer
iteration, through the computable amplification estimate C' built from the
current projected values. The rule is eps = min(C' * eps_tilde, 0.1); the
0.1 cap absorbs degenerate C' blowups and its hit rate is tracked (P_0.1).
"""

import logging

import numpy as np

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


def compute_c_prime(rho, sigma, values, m):
    """Amplification estimate from the current projected values.

    values must be sorted by distance from the target; the first entry is
    the selected one and does not contribute. Returns 1.0 at subspace
    dimension one. Degenerate terms with values[i] almost equal to rho are
    skipped (the 0.1 cap handles the blowup they represent); if every term
    degenerates the result is inf.
    """
    if m == 1:
        return 1.0
    rho = complex(rho)
    sigma = complex(sigma)
    best = 0.0
    usable = 0
    for nu in values[1:]:
        sep = abs(nu - rho)
        if sep < _EPS * (1.0 + abs(rho)):
            logger.debug("c_prime: skipped degenerate value %s (== rho)", nu)
            continue
        usable += 1
        best = max(best, abs(nu - sigma) / sep)
    if usable == 0:
        return float("inf")
    return 2.0 * best


class ToleranceGovernor:
    """Per-solve inner tolerance policy and the cap-hit bookkeeping.

    mode 'adaptive' applies min(C' * eps_tilde, 0.1); 'exact' always asks
    for 1e-14; 'fixed' always asks for fixed_eps.
    """

    EXACT_EPS = 1e-14

    def __init__(self, mode="adaptive", eps_tilde=1e-3, fixed_eps=None):
        if mode not in ("adaptive", "exact", "fixed"):
            raise ValueError(f"unknown governor mode {mode!r}")
        if mode == "adaptive" and not (0.0 < eps_tilde < 1.0):
            raise ValueError("eps_tilde must be in (0, 1)")
        if mode == "fixed" and not (fixed_eps and 0.0 < fixed_eps <= 1.0):
            raise ValueError("fixed mode needs fixed_eps in (0, 1]")
        self.mode = mode
        self.eps_tilde = eps_tilde
        self.fixed_eps = fixed_eps
        self.count_total = 0
        self.count_capped = 0
        self.last_capped = False

    def inner_tolerance(self, c_prime):
        """Tolerance for the next inner solve; updates the counters."""
        self.count_total += 1
        self.last_capped = False
        if self.mode == "exact":
            return self.EXACT_EPS
        if self.mode == "fixed":
            return self.fixed_eps
        raw = c_prime * self.eps_tilde
        if raw >= 0.1:
            self.last_capped = True
            self.count_capped += 1
            return 0.1
        return raw

    @property
    def p_01(self):
        """Fraction of outer iterations where the 0.1 cap was active."""
        if self.count_total == 0:
            return 0.0
        return self.count_capped / self.count_total
