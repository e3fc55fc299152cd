"""Physics-agnostic numeric kernels.

This module collects the machinery shared by the scattering and
fluorescence solvers:

* :class:`RationalFunction` -- proper rational functions kept in
  pole-residue form, with exact algebra (sums, products via partial
  fractions, reflection ``k -> E - k``, Schwarz conjugation).
* :func:`roots` -- companion-matrix polynomial roots with Newton polish
  and a residual guarantee.
* :func:`complex_symmetric_eig` -- eigensystem of a complex *symmetric*
  matrix with the transpose normalization ``v^T v = 1`` that makes
  spectral residues come out as plain outer products.
* :func:`residue_sum` -- closed-contour evaluation of integrals of
  rational functions (optionally times ``exp(i*lambda*k)``).
* :func:`quad_oracle` / :func:`quad_oracle_eps` -- adaptive-quadrature
  reference values, used everywhere as the independent check on residue
  algebra, including an ``i*epsilon`` ladder with Richardson
  extrapolation.
* :class:`CrosscheckRecorder` -- opt-in ledger of residue-vs-quadrature
  spot checks, consumed by the test suite and the ``crosscheck`` CLI
  subcommand.

Everything here is stateless (the recorder being the single deliberate
exception) and safe to call from worker processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from .errors import ConvergenceError, DegeneratePoleError, NumericsError

__all__ = [
    "DEGENERACY_TOL",
    "RationalFunction",
    "QuadratureSpec",
    "roots",
    "complex_symmetric_eig",
    "residue_sum",
    "quad_oracle",
    "quad_oracle_eps",
    "fit_rational",
    "CrosscheckRecorder",
    "get_recorder",
]

# Minimum pole separation (in the caller's frequency unit) below which
# partial-fraction expansion of a product is refused.  Callers catch
# DegeneratePoleError and fall back to quadrature; second-order poles are
# deliberately not handled analytically.
DEGENERACY_TOL = 1e-6

# Poles closer than this are treated as the *same* pole when summing two
# rational functions (their residues add).
_MERGE_TOL = 1e-12


def _merge_terms(poles: np.ndarray, residues: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Combine residues of coincident poles and drop exact-zero terms."""
    out_p: list[complex] = []
    out_r: list[complex] = []
    for p, r in zip(poles, residues):
        for i, q in enumerate(out_p):
            if abs(p - q) <= _MERGE_TOL * (1.0 + abs(q)):
                out_r[i] += r
                break
        else:
            out_p.append(complex(p))
            out_r.append(complex(r))
    keep = [i for i, r in enumerate(out_r) if r != 0.0]
    return (
        np.array([out_p[i] for i in keep], dtype=complex),
        np.array([out_r[i] for i in keep], dtype=complex),
    )


class RationalFunction:
    """A proper rational function in pole-residue form plus a constant:

        f(k) = const + sum_m residues[m] / (k - poles[m])

    All poles are simple by construction; coincident poles raised by the
    algebra trigger :class:`DegeneratePoleError` instead of silently
    producing a second-order pole.

    Parameters
    ----------
    const : complex
        Value at ``|k| -> infinity``.
    poles, residues : array_like of complex
        Matching lists of simple poles and their residues.
    """

    __slots__ = ("const", "poles", "residues")

    def __init__(self, const: complex = 0.0, poles=(), residues=()):
        poles = np.atleast_1d(np.asarray(poles, dtype=complex))
        residues = np.atleast_1d(np.asarray(residues, dtype=complex))
        if poles.shape != residues.shape:
            raise ValueError("poles and residues must have matching shapes")
        self.const = complex(const)
        self.poles, self.residues = _merge_terms(poles, residues)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def __call__(self, k):
        k_arr = np.asarray(k, dtype=complex)
        if self.poles.size == 0:
            return self.const * np.ones_like(k_arr) if k_arr.shape else self.const
        value = self.const + np.sum(
            self.residues / (k_arr[..., np.newaxis] - self.poles), axis=-1
        )
        return value if k_arr.shape else complex(value)

    # ------------------------------------------------------------------
    # algebra
    # ------------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, RationalFunction):
            return RationalFunction(
                self.const + other.const,
                np.concatenate([self.poles, other.poles]),
                np.concatenate([self.residues, other.residues]),
            )
        return RationalFunction(self.const + complex(other), self.poles, self.residues)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.const, self.poles, -self.residues)

    def __sub__(self, other):
        return self + (-other if isinstance(other, RationalFunction) else -complex(other))

    def __rsub__(self, other):
        return (-self) + complex(other)

    def __mul__(self, other):
        if not isinstance(other, RationalFunction):
            c = complex(other)
            return RationalFunction(self.const * c, self.poles, self.residues * c)

        # Partial-fraction expansion of the cross terms:
        #   r/(k-p) * s/(k-q) = rs/(p-q) * [1/(k-p) - 1/(k-q)]
        # which is only valid for well-separated simple poles.
        if self.poles.size and other.poles.size:
            sep = np.abs(self.poles[:, None] - other.poles[None, :])
            if sep.size and sep.min() < DEGENERACY_TOL:
                i, j = np.unravel_index(np.argmin(sep), sep.shape)
                raise DegeneratePoleError(
                    "pole collision in product: "
                    f"{self.poles[i]:.9g} vs {other.poles[j]:.9g} "
                    f"(separation {sep.min():.3e} < {DEGENERACY_TOL:g})"
                )

        poles = [self.poles, other.poles]
        residues = [self.residues * other.const, other.residues * self.const]
        if self.poles.size and other.poles.size:
            diff = self.poles[:, None] - other.poles[None, :]
            cross = self.residues[:, None] * other.residues[None, :] / diff
            residues[0] = residues[0] + cross.sum(axis=1)
            residues[1] = residues[1] - cross.sum(axis=0)
        return RationalFunction(
            self.const * other.const,
            np.concatenate(poles),
            np.concatenate(residues),
        )

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        c = complex(scalar)
        return RationalFunction(self.const / c, self.poles, self.residues / c)

    # ------------------------------------------------------------------
    # structural transforms
    # ------------------------------------------------------------------
    def flipped(self, total: float) -> "RationalFunction":
        """Return ``g(k) = f(total - k)``."""
        return RationalFunction(self.const, total - self.poles, -self.residues)

    def schwarz(self) -> "RationalFunction":
        """Return the Schwarz reflection ``g(k) = conj(f(conj(k)))``.

        On the real axis this is the complex conjugate of ``f``; it is the
        analytic continuation of that conjugate off the axis.
        """
        return RationalFunction(
            np.conj(self.const), np.conj(self.poles), np.conj(self.residues)
        )

    def cleaned(self, rel_tol: float = 1e-9) -> "RationalFunction":
        """Drop pole terms whose residues are negligible.

        Used after assembling combinations whose analytic structure
        guarantees exact cancellation of certain residues (the
        cancellation holds to machine precision; this removes the
        round-off dust so contour bookkeeping stays exact).
        """
        if self.poles.size == 0:
            return self
        scale = np.max(np.abs(self.residues))
        if scale == 0.0:
            return RationalFunction(self.const)
        keep = np.abs(self.residues) > rel_tol * scale
        return RationalFunction(self.const, self.poles[keep], self.residues[keep])

    @property
    def decays_quadratically(self) -> bool:
        """True when f(k) = O(1/k^2), i.e. const == 0 and residues sum to ~0."""
        if self.const != 0.0 or self.poles.size == 0:
            return self.const == 0.0 and self.poles.size == 0
        total = abs(np.sum(self.residues))
        scale = np.sum(np.abs(self.residues))
        return total <= 1e-8 * scale

    # ------------------------------------------------------------------
    # construction from coefficient lists
    # ------------------------------------------------------------------
    @classmethod
    def from_coefficients(cls, num, den) -> "RationalFunction":
        """Build from numerator/denominator coefficients (highest first).

        Requires ``deg(num) <= deg(den)`` and well-separated denominator
        roots.
        """
        num = np.trim_zeros(np.asarray(num, dtype=complex), "f")
        den = np.trim_zeros(np.asarray(den, dtype=complex), "f")
        if den.size == 0:
            raise ValueError("zero denominator")
        if num.size > den.size:
            raise ValueError("improper rational function (deg num > deg den)")
        const = 0.0 + 0.0j
        if num.size == den.size:
            const = num[0] / den[0]
            num = np.polysub(num, const * den)
        poles = roots(den)
        if poles.size > 1:
            sep = np.abs(poles[:, None] - poles[None, :])
            np.fill_diagonal(sep, np.inf)
            if sep.min() < DEGENERACY_TOL:
                raise DegeneratePoleError(
                    f"repeated denominator root (separation {sep.min():.3e})"
                )
        dden = np.polyder(den)
        residues = np.polyval(num, poles) / np.polyval(dden, poles) if num.size else np.zeros_like(poles)
        return cls(const, poles, residues)

    def __repr__(self):  # pragma: no cover - debugging aid
        return (
            f"RationalFunction(const={self.const:.6g}, "
            f"poles={np.array2string(self.poles, precision=6)}, "
            f"residues={np.array2string(self.residues, precision=6)})"
        )


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and regularization ladder for the quadrature oracle."""

    eps_ladder: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 400

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if any(b >= a for a, b in zip(self.eps_ladder, self.eps_ladder[1:])):
            raise ValueError("epsilon ladder must be strictly decreasing")


def roots(coeffs) -> np.ndarray:
    """All roots of a complex polynomial, companion matrix + Newton polish.

    Parameters
    ----------
    coeffs : array_like
        Coefficients from highest to lowest degree.  Degree must be <= 16.

    Returns
    -------
    ndarray of complex
        Roots satisfying ``|p(z)| / (||coeffs|| * max(1,|z|)^deg) < 1e-10``.

    Raises
    ------
    ConvergenceError
        If any polished root fails the residual bound.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    coeffs = np.trim_zeros(coeffs, "f")
    if coeffs.size == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    degree = coeffs.size - 1
    if degree > 16:
        raise ValueError(f"degree {degree} exceeds supported maximum 16")
    if degree == 0:
        return np.array([], dtype=complex)
    scaled = coeffs / np.max(np.abs(coeffs))
    zs = np.roots(scaled)
    deriv = np.polyder(scaled)
    for _ in range(2):  # Newton polish; no-ops once converged
        pz = np.polyval(scaled, zs)
        dz = np.polyval(deriv, zs)
        step = np.where(dz != 0, pz / np.where(dz == 0, 1, dz), 0)
        # Guard against the large steps Newton takes near repeated roots.
        step = np.where(np.abs(step) < 1.0 + np.abs(zs), step, 0)
        zs = zs - step
    norm = np.linalg.norm(scaled)
    residual = np.abs(np.polyval(scaled, zs)) / (norm * np.maximum(1.0, np.abs(zs)) ** degree)
    if residual.max() > 1e-10:
        raise ConvergenceError(
            f"root polish failed: worst residual {residual.max():.3e} > 1e-10"
        )
    return zs


def complex_symmetric_eig(matrix: np.ndarray, resid_tol: float = 1e-10):
    """Eigendecomposition of a complex symmetric matrix.

    Eigenvectors are normalized with the *transpose* inner product,
    ``v^T v = 1`` (not the Hermitian norm), so that for a symmetric
    matrix ``M = sum_m lambda_m v_m v_m^T`` holds and spectral residues
    are the outer products ``v_m v_m^T``.

    Returns
    -------
    (values, vectors)
        ``values`` sorted by real part (ties by imaginary part);
        ``vectors[:, m]`` is the eigenvector for ``values[m]``.

    Raises
    ------
    NumericsError
        If the matrix is not symmetric, a vector is quasi-null
        (``v^T v ~ 0``, defective matrix), or the residual check fails.
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError("matrix must be square")
    asym = np.max(np.abs(matrix - matrix.T)) if n > 1 else 0.0
    scale = max(np.max(np.abs(matrix)), 1e-300)
    if asym > 1e-12 * scale:
        raise NumericsError(f"matrix is not symmetric (asymmetry {asym:.3e})")
    values, vectors = np.linalg.eig(matrix)
    vtv = np.sum(vectors * vectors, axis=0)
    if np.min(np.abs(vtv)) < 1e-8:
        raise NumericsError(
            "quasi-null transpose norm: eigenvector basis is (nearly) defective"
        )
    vectors = vectors / np.sqrt(vtv)
    residual = np.linalg.norm(matrix @ vectors - vectors * values, axis=0)
    if residual.max() > resid_tol * (1.0 + scale):
        raise ConvergenceError(
            f"eigen residual {residual.max():.3e} exceeds {resid_tol:g}"
        )
    order = np.lexsort((values.imag, values.real))
    return values[order], vectors[:, order]


def residue_sum(
    func: RationalFunction,
    contour: str,
    exp_coeff: float = 0.0,
) -> complex:
    """Integrate ``func(k) * exp(i * exp_coeff * k)`` over the real line
    by closing the contour in the indicated half-plane.

    Parameters
    ----------
    func : RationalFunction
        Integrand; must have all poles strictly off the real axis.
    contour : {"upper", "lower"}
        Closure half-plane.  Must match the sign of ``exp_coeff``
        (positive -> upper, negative -> lower); with ``exp_coeff == 0``
        the integrand itself must decay like ``1/k^2``.
    exp_coeff : float
        Coefficient of the exponential factor (a time or position).

    Returns
    -------
    complex
        ``+/- 2*pi*i * sum(enclosed residues * exp(i*exp_coeff*pole))``.
    """
    if contour not in ("upper", "lower"):
        raise ValueError("contour must be 'upper' or 'lower'")
    if exp_coeff > 0 and contour != "upper":
        raise ValueError("growing exponential: positive exp_coeff requires upper closure")
    if exp_coeff < 0 and contour != "lower":
        raise ValueError("growing exponential: negative exp_coeff requires lower closure")
    if func.const != 0.0:
        raise NumericsError("integrand does not vanish at infinity")
    if exp_coeff == 0.0 and not func.decays_quadratically:
        raise NumericsError(
            "integrand decays only like 1/k: arc contribution does not vanish"
        )
    if func.poles.size == 0:
        return 0.0 + 0.0j
    on_axis = np.abs(func.poles.imag) <= 1e-13 * (1.0 + np.abs(func.poles.real))
    if np.any(on_axis):
        raise NumericsError(
            f"pole on the integration contour: {func.poles[on_axis][0]:.9g}"
        )
    if contour == "upper":
        mask = func.poles.imag > 0
        sign = 1.0
    else:
        mask = func.poles.imag < 0
        sign = -1.0
    enclosed = np.sum(func.residues[mask] * np.exp(1j * exp_coeff * func.poles[mask]))
    return sign * 2j * np.pi * enclosed


def _quad_complex(f, a, b, *, limit, points=None):
    kwargs = {"limit": limit}
    if points is not None:
        kwargs["points"] = points
    re, re_err = scipy.integrate.quad(lambda x: f(x).real, a, b, **kwargs)
    im, im_err = scipy.integrate.quad(lambda x: f(x).imag, a, b, **kwargs)
    return complex(re, im), math.hypot(re_err, im_err)


def quad_oracle(
    integrand,
    center: float = 0.0,
    half_width: float = 200.0,
    spec: QuadratureSpec = QuadratureSpec(),
    tail_order: int = 2,
    points=None,
):
    """Adaptive-quadrature reference value for a line integral.

    Integrates ``integrand`` over ``[center - half_width, center +
    half_width]`` with a Gauss-Kronrod adaptive scheme, and bounds the
    two discarded tails assuming ``|integrand| ~ C / |k - center|^m``
    with ``m = tail_order``.

    Returns
    -------
    (value, error_estimate) : (complex, float)
        The error estimate includes both the quadrature error and the
        tail bound.  Callers decide whether it is acceptable.
    """
    a, b = center - half_width, center + half_width
    value, err = _quad_complex(integrand, a, b, limit=spec.max_subdivisions, points=points)
    if tail_order >= 2:
        edge = abs(integrand(a)) + abs(integrand(b))
        tail = edge * half_width / (tail_order - 1)
    else:
        tail = math.inf
    return value, err + tail


def quad_oracle_eps(
    make_integrand,
    center: float = 0.0,
    half_width: float = 200.0,
    spec: QuadratureSpec = QuadratureSpec(),
    tail_order: int = 2,
    points=None,
):
    """Quadrature oracle with an ``i*epsilon`` ladder.

    ``make_integrand(eps)`` must return the integrand regularized at
    level ``eps``.  The ladder values are extrapolated to ``eps -> 0``
    by Neville's scheme (the regularization error is analytic in
    ``eps``), and the spread of the last extrapolation step is folded
    into the returned error estimate.
    """
    ladder = spec.eps_ladder
    values = []
    errs = []
    for eps in ladder:
        v, e = quad_oracle(
            make_integrand(eps), center, half_width, spec, tail_order, points
        )
        values.append(v)
        errs.append(e)
    # Neville extrapolation of (eps_i, v_i) to eps = 0.
    xs = list(ladder)
    table = list(values)
    n = len(table)
    previous_best = table[-1]
    for level in range(1, n):
        if level == n - 1:
            previous_best = table[-1]
        table = [
            (xs[i] * table[i + 1] - xs[i + level] * table[i])
            / (xs[i] - xs[i + level])
            for i in range(n - level)
        ]
    extrapolated = table[0]
    spread = abs(extrapolated - previous_best)
    return extrapolated, max(errs) + spread


def fit_rational(k_samples, f_samples, num_degree: int, den_degree: int, weights=None):
    """Least-squares rational fit ``f ~ P/Q`` with monic denominator.

    Solves the linearized system ``P(k_j) - f_j * Q(k_j) = 0`` for the
    coefficients of ``P`` (degree ``num_degree``) and the non-leading
    coefficients of the monic ``Q`` (degree ``den_degree``), optionally
    with per-sample row ``weights`` (callers iterating towards the true
    nonlinear least squares pass ``1/|Q_previous|`` here).  Needs at
    least ``num_degree + den_degree + 1`` samples; more are recommended.
    For conditioning, feed samples in a variable of order unity (shift
    and scale the frequency axis before calling).

    Returns
    -------
    (num_coeffs, den_coeffs)
        Coefficient arrays, highest degree first; ``den_coeffs[0] == 1``.
    """
    k = np.asarray(k_samples, dtype=complex)
    f = np.asarray(f_samples, dtype=complex)
    if k.shape != f.shape or k.ndim != 1:
        raise ValueError("k_samples and f_samples must be equal-length 1-D arrays")
    n_unknowns = (num_degree + 1) + den_degree
    if k.size < n_unknowns:
        raise ValueError(
            f"need at least {n_unknowns} samples for the requested degrees, got {k.size}"
        )
    w = np.ones_like(k) if weights is None else np.asarray(weights, dtype=complex)
    # Columns: p_num_degree..p_0 then q_{den_degree-1}..q_0.
    cols = [w * k**m for m in range(num_degree, -1, -1)]
    cols += [-w * f * k**m for m in range(den_degree - 1, -1, -1)]
    a_mat = np.stack(cols, axis=1)
    rhs = w * f * k**den_degree
    sol, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    num = sol[: num_degree + 1]
    den = np.concatenate([[1.0 + 0.0j], sol[num_degree + 1 :]])
    return num, den


@dataclass
class CrosscheckRecorder:
    """Opt-in ledger of analytic-vs-quadrature spot checks.

    When enabled (test mode, or the ``crosscheck`` CLI subcommand), call
    sites that evaluate integrals by residues also evaluate a quadrature
    reference and record the comparison here.  Disabled, the hooks cost
    one branch.
    """

    enabled: bool = False
    default_tol: float = 1e-6
    records: list = field(default_factory=list)

    def spot_check(self, label: str, value: complex, oracle, tol: float | None = None):
        """Record a comparison of ``value`` against ``oracle()``.

        ``oracle`` is a thunk returning either a complex value or a
        ``(value, error_estimate)`` pair; it is only invoked when the
        recorder is enabled.
        """
        if not self.enabled:
            return
        tol = self.default_tol if tol is None else tol
        ref = oracle()
        ref_err = 0.0
        if isinstance(ref, tuple):
            ref, ref_err = ref
        scale = max(abs(value), abs(ref), 1e-300)
        rel = abs(value - ref) / scale
        self.records.append(
            {
                "label": label,
                "value": [value.real, value.imag],
                "reference": [complex(ref).real, complex(ref).imag],
                "reference_error": float(ref_err),
                "relative_difference": float(rel),
                "tolerance": float(tol),
                "passed": bool(rel <= tol or abs(value - ref) <= ref_err + 1e-300),
            }
        )

    def summary(self) -> dict:
        n_fail = sum(not r["passed"] for r in self.records)
        return {
            "checks": len(self.records),
            "failed": n_fail,
            "worst_relative_difference": max(
                (r["relative_difference"] for r in self.records), default=0.0
            ),
            "records": self.records,
        }

    def write_json(self, path):
        with open(path, "w") as handle:
            json.dump(self.summary(), handle, indent=2)

    def reset(self):
        self.records.clear()

    def assert_clean(self, minimum_checks: int = 0):
        summary = self.summary()
        if summary["checks"] < minimum_checks:
            raise NumericsError(
                f"expected at least {minimum_checks} cross-checks, saw {summary['checks']}"
            )
        if summary["failed"]:
            bad = [r for r in self.records if not r["passed"]]
            raise NumericsError(
                f"{summary['failed']} cross-check(s) failed; worst: {bad[0]}"
            )


_RECORDER = CrosscheckRecorder()


def get_recorder() -> CrosscheckRecorder:
    """The process-wide cross-check recorder."""
    return _RECORDER
