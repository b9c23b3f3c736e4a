"""Bath spectral densities and the quantities derived from them.

A spectral density J(w) fully determines the reduced mechanical dynamics
through three derived objects:

* the memory kernel            f(t)  = int dw/(2pi) J(w) sin(wt)
* the principal-value shift    K(w)  = PV int dw'/(2pi) w' J(w') / (w^2 - w'^2)
* the bath-shifted frequency   Dm    = w_m + int dw J(w) / (2pi w)

All frequencies are measured in units of the mechanical frequency w_m = 1.
Physical spectra are one-sided: J(w) = 0 for w <= 0.  The antisymmetric
combination Jtilde(w) = J(w) - J(-w) is what the probing scheme reconstructs.

A purely Markovian damping channel with rate gamma_m is treated as local:
it contributes 4*gamma_m*w to the effective (reconstructed) spectrum but
never enters f(t), K(w) or the frequency shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .errors import ParameterError, QuadratureError

# Adaptive quadrature targets; all downstream tolerances are >= 1e-6.
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8
# Support truncated where J drops below this fraction of its peak.
SUPPORT_FLOOR = 1e-12
# Infrared cutoff for the frequency-shift integral of families with
# J(0+) > 0 (Lorentzian): int J/(2 pi w) dw is log-divergent at w -> 0.
# The shift and kernel contributions of modes below 1/T cancel dynamically,
# so any cutoff well under the probed band is equivalent; the value is fixed
# here so shift and kernel stay mutually consistent.
SHIFT_IR_CUT = 1e-4


# ---------------------------------------------------------------------------
# model types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralModel:
    """Base class for the tagged union of spectral-density families."""

    def j_value(self, omega):
        raise NotImplementedError

    def markovian_rate(self) -> float:
        """Total local damping rate carried by Markovian terms."""
        return 0.0

    def nonmarkovian_terms(self) -> tuple["SpectralModel", ...]:
        """Leaf families that contribute to the memory kernel."""
        return (self,)

    def is_null(self) -> bool:
        """True when the non-Markovian part vanishes identically."""
        return not self.nonmarkovian_terms()

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLawBand(SpectralModel):
    """J(w) = 2*pi*C*w^k on [center - width/2, center + width/2], else 0."""

    C: float
    k: float
    center: float = 1.0
    width: float = 0.07

    def __post_init__(self):
        if self.C < 0 or self.width < 0 or self.center < 0:
            raise ParameterError(f"PowerLawBand needs C, center, width >= 0, got {self}")
        if self.center - self.width / 2 <= 0:
            raise ParameterError("PowerLawBand support must lie at positive frequency")

    @property
    def lo(self) -> float:
        return self.center - self.width / 2

    @property
    def hi(self) -> float:
        return self.center + self.width / 2

    def j_value(self, omega):
        w = np.asarray(omega, dtype=float)
        inside = (w >= self.lo) & (w <= self.hi) & (w > 0)
        safe = np.where(inside, w, 1.0)
        return np.where(inside, 2 * np.pi * self.C * safe**self.k, 0.0)

    def to_dict(self) -> dict:
        return {"family": "power_law_band", "C": self.C, "k": self.k,
                "center": self.center, "width": self.width}


@dataclass(frozen=True)
class Lorentzian(SpectralModel):
    """J(w) = 2*pi*Gamma*d^2 / ((w - center)^2 + d^2) for w > 0."""

    Gamma: float
    d: float
    center: float = 1.0

    def __post_init__(self):
        if self.Gamma < 0 or self.d <= 0 or self.center < 0:
            raise ParameterError(f"Lorentzian needs Gamma >= 0, d > 0, center >= 0, got {self}")

    def j_value(self, omega):
        w = np.asarray(omega, dtype=float)
        val = 2 * np.pi * self.Gamma * self.d**2 / ((w - self.center) ** 2 + self.d**2)
        return np.where(w > 0, val, 0.0)

    def to_dict(self) -> dict:
        return {"family": "lorentzian", "Gamma": self.Gamma, "d": self.d,
                "center": self.center}


@dataclass(frozen=True)
class Ohmic(SpectralModel):
    """J(w) = 2*pi*eta*w*(w/omega_cut)^(s-1)*exp(-w/omega_cut) for w > 0.

    s < 1 sub-Ohmic, s = 1 Ohmic, s > 1 super-Ohmic.
    """

    eta: float
    s: float = 1.0
    omega_cut: float = 10.0

    def __post_init__(self):
        if self.eta < 0 or self.s <= 0 or self.omega_cut <= 0:
            raise ParameterError(f"Ohmic needs eta >= 0, s > 0, omega_cut > 0, got {self}")

    def j_value(self, omega):
        w = np.asarray(omega, dtype=float)
        pos = w > 0
        safe = np.where(pos, w, 1.0)
        val = (2 * np.pi * self.eta * safe * (safe / self.omega_cut) ** (self.s - 1)
               * np.exp(-safe / self.omega_cut))
        return np.where(pos, val, 0.0)

    def to_dict(self) -> dict:
        return {"family": "ohmic", "eta": self.eta, "s": self.s,
                "omega_cut": self.omega_cut}


@dataclass(frozen=True)
class Markovian(SpectralModel):
    """Memoryless channel: local damping -gamma_m*p, spectrum 4*gamma_m*w."""

    gamma_m: float

    def __post_init__(self):
        if self.gamma_m < 0:
            raise ParameterError(f"Markovian needs gamma_m >= 0, got {self}")

    def j_value(self, omega):
        w = np.asarray(omega, dtype=float)
        return np.where(w >= 0, 4 * self.gamma_m * w, 0.0)

    def markovian_rate(self) -> float:
        return self.gamma_m

    def nonmarkovian_terms(self) -> tuple[SpectralModel, ...]:
        return ()

    def to_dict(self) -> dict:
        return {"family": "markovian", "gamma_m": self.gamma_m}


@dataclass(frozen=True)
class SumModel(SpectralModel):
    """Sum of spectral-density terms; evaluation is exactly the term sum."""

    terms: tuple[SpectralModel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def j_value(self, omega):
        w = np.asarray(omega, dtype=float)
        total = np.zeros_like(w)
        for term in self.terms:
            total = total + term.j_value(w)
        return total

    def markovian_rate(self) -> float:
        return sum(t.markovian_rate() for t in self.terms)

    def nonmarkovian_terms(self) -> tuple[SpectralModel, ...]:
        out: list[SpectralModel] = []
        for t in self.terms:
            out.extend(t.nonmarkovian_terms())
        return tuple(out)

    def to_dict(self) -> dict:
        return {"family": "sum", "terms": [t.to_dict() for t in self.terms]}


def model_from_dict(data: dict) -> SpectralModel:
    """Inverse of ``SpectralModel.to_dict``."""
    family = data["family"]
    if family == "power_law_band":
        return PowerLawBand(C=float(data["C"]), k=float(data["k"]),
                            center=float(data.get("center", 1.0)),
                            width=float(data.get("width", 0.07)))
    if family == "lorentzian":
        return Lorentzian(Gamma=float(data["Gamma"]), d=float(data["d"]),
                          center=float(data.get("center", 1.0)))
    if family == "ohmic":
        return Ohmic(eta=float(data["eta"]), s=float(data.get("s", 1.0)),
                     omega_cut=float(data.get("omega_cut", 10.0)))
    if family == "markovian":
        return Markovian(gamma_m=float(data["gamma_m"]))
    if family == "sum":
        return SumModel(terms=tuple(model_from_dict(t) for t in data["terms"]))
    raise ParameterError(f"unknown spectral family {family!r}")


# ---------------------------------------------------------------------------
# system parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimParams:
    """Dimensionless system parameters (everything in units of w_m = 1)."""

    g0: float            # single-photon optomechanical coupling
    delta_c: float       # cavity detuning, signed
    kappa: float         # cavity amplitude decay rate
    E: float             # coherent drive amplitude
    omega_m: float = 1.0     # fixed normalization
    delta_m: float | None = None  # bath-shifted mechanical frequency, if known

    def __post_init__(self):
        if self.kappa <= 0:
            raise ParameterError("kappa must be > 0")
        if self.E < 0 or self.g0 < 0:
            raise ParameterError("E and g0 must be >= 0")
        if self.omega_m != 1.0:
            raise ParameterError("omega_m is fixed to 1 (dimensionless units)")

    @property
    def perturbative_ratio(self) -> float:
        """g0*E / sqrt(delta_c^2 + kappa^2); must be small for Eq.-chain solvers."""
        return self.g0 * self.E / math.hypot(self.delta_c, self.kappa)

    @property
    def alpha_steady(self) -> complex:
        """Coherent steady amplitude E / (i*delta_c + kappa) of the bare cavity."""
        return self.E / (1j * self.delta_c + self.kappa)

    def with_detuning(self, delta_c: float) -> "SimParams":
        return SimParams(g0=self.g0, delta_c=delta_c, kappa=self.kappa, E=self.E,
                         omega_m=self.omega_m, delta_m=self.delta_m)

    def with_delta_m(self, delta_m: float) -> "SimParams":
        return SimParams(g0=self.g0, delta_c=self.delta_c, kappa=self.kappa, E=self.E,
                         omega_m=self.omega_m, delta_m=delta_m)


# ---------------------------------------------------------------------------
# support and quadrature structure of the leaf families
# ---------------------------------------------------------------------------

def _support_upper(term: SpectralModel) -> float:
    """Upper truncation point: J(w) < SUPPORT_FLOOR * peak beyond it."""
    if isinstance(term, PowerLawBand):
        return term.hi
    if isinstance(term, Lorentzian):
        # peak 2*pi*Gamma; 1/x^2 tail crosses the floor at center + d/sqrt(floor)
        return term.center + term.d / math.sqrt(SUPPORT_FLOOR)
    if isinstance(term, Ohmic):
        # solve (w/wc)^s * exp(-w/wc) = floor * peak by fixed-point iteration
        s, wc = term.s, term.omega_cut
        peak_x = s  # location of the maximum of x^s e^-x
        target = math.log(SUPPORT_FLOOR) + s * math.log(peak_x) - peak_x
        x = max(4.0 * s, 30.0)
        for _ in range(60):
            x = s * math.log(max(x, 1e-12)) - target
        return x * wc
    raise ParameterError(f"no support bound for {type(term).__name__}")


def _support_lower(term: SpectralModel) -> float:
    if isinstance(term, PowerLawBand):
        return term.lo
    return 0.0


def _gl_panels(edges: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on consecutive panels."""
    x0, w0 = leggauss(order)
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    weights = (half[:, None] * w0[None, :]).ravel()
    return nodes, weights


def _panel_edges(term: SpectralModel) -> np.ndarray:
    """Panel boundaries refined around the structure of one leaf family."""
    if isinstance(term, PowerLawBand):
        return np.linspace(term.lo, term.hi, 17)
    if isinstance(term, Lorentzian):
        c, d = term.center, term.d
        hi = _support_upper(term)
        local = c + d * np.array([0.0, 0.25, 0.5, 1, 2, 4, 8, 16, 32, 64])
        edges = np.concatenate([2 * c - local[::-1], local[1:]])
        edges = edges[(edges > 0) & (edges < hi)]
        lo_part = np.linspace(1e-12, max(edges[0], 2e-12), 6) if edges[0] > 1e-9 else []
        tail = np.geomspace(max(edges[-1], c + 64 * d), hi, 40)
        return np.unique(np.concatenate([lo_part, edges, tail]))
    if isinstance(term, Ohmic):
        wc = term.omega_cut
        hi = _support_upper(term)
        head = wc * np.geomspace(1e-8, 0.1, 12)
        body = np.linspace(0.1 * wc, min(6 * wc, hi), 24)
        tail = np.geomspace(min(6 * wc, hi * 0.5), hi, 16)
        return np.unique(np.concatenate([[1e-14], head, body, tail]))
    raise ParameterError(f"no quadrature panels for {type(term).__name__}")


def _term_nodes(term: SpectralModel) -> tuple[np.ndarray, np.ndarray]:
    return _gl_panels(_panel_edges(term))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_J(model: SpectralModel, omega):
    """Spectral density J(w); zero for w <= 0 (Markovian: 4*gamma_m*w for w >= 0)."""
    result = model.j_value(omega)
    if np.isscalar(omega) or np.asarray(omega).ndim == 0:
        return float(result)
    return result


def eval_Jtilde(model: SpectralModel, omega):
    """Antisymmetrized spectrum Jtilde(w) = J(w) - J(-w)."""
    w = np.asarray(omega, dtype=float)
    result = model.j_value(w) - model.j_value(-w)
    if np.isscalar(omega) or np.asarray(omega).ndim == 0:
        return float(result)
    return result


def _quad_checked(func, a, b, what, **kw):
    val, err, info, *rest = quad(func, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                                 limit=300, full_output=1, **kw)
    if rest:  # explanation string present: quadrature trouble
        if err > max(QUAD_EPSABS, abs(val) * 1e-5) * 100:
            raise QuadratureError(f"{what}: achieved tolerance {err:.2e} on [{a}, {b}]")
    return val


def memory_kernel(model: SpectralModel, t: float) -> float:
    """Memory kernel f(t) = int dw/(2pi) J(w) sin(wt), Markovian terms excluded."""
    if t < 0:
        raise ParameterError("memory kernel defined for t >= 0")
    if t == 0.0:
        return 0.0
    total = 0.0
    for term in model.nonmarkovian_terms():
        lo, hi = _support_lower(term), _support_upper(term)
        edges = [lo] + [e for e in _oscillatory_splits(term) if lo < e < hi] + [hi]
        for a, b in zip(edges[:-1], edges[1:]):
            total += _quad_checked(lambda w, trm=term: trm.j_value(w) / (2 * np.pi),
                                   a, b, "memory_kernel", weight="sin", wvar=t)
    return total


def _oscillatory_splits(term: SpectralModel) -> list[float]:
    """Interior split points so each sin-weighted panel is smooth and local."""
    if isinstance(term, Lorentzian):
        c, d = term.center, term.d
        return [max(c - 8 * d, 1e-9), c + 8 * d, c + 200 * d]
    if isinstance(term, Ohmic):
        wc = term.omega_cut
        return [0.1 * wc, wc, 5 * wc]
    if isinstance(term, PowerLawBand):
        return []
    return []


def _term_shift(term: SpectralModel) -> float:
    """int dw J(w)/(2pi w) for one leaf family (the bath frequency shift)."""
    if isinstance(term, PowerLawBand):
        a, b, k, C = term.lo, term.hi, term.k, term.C
        if abs(k) < 1e-14:
            return C * math.log(b / a)
        return C * (b**k - a**k) / k
    if isinstance(term, Ohmic):
        # int_0^inf eta (w/wc)^(s-1) e^(-w/wc) dw = eta * wc * Gamma(s)
        return term.eta * term.omega_cut * gamma_fn(term.s)
    if isinstance(term, Lorentzian):
        hi = _support_upper(term)
        c = term.center
        lo = min(SHIFT_IR_CUT, 0.01 * c)
        pts = sorted(p for p in (c - 4 * term.d, c, c + 4 * term.d) if lo < p < hi)
        return _quad_checked(lambda w: term.j_value(w) / (2 * np.pi * w), lo, hi,
                             "delta_m", points=pts)
    raise ParameterError(f"no shift rule for {type(term).__name__}")


def delta_m(model: SpectralModel, omega_m: float = 1.0) -> float:
    """Bath-shifted mechanical frequency w_m + int dw J(w)/(2pi w).

    The integral is the continuum limit of the mode sum sum_l w_l gamma_l^2
    under the discretization that reproduces the memory kernel.
    """
    return omega_m + sum(_term_shift(t) for t in model.nonmarkovian_terms())


def _pv_log_term(omega, lo, hi):
    """Closed-form PV int_lo^hi dx / (w^2 - x^2) = ln((w+hi)|w-lo| / ((w+lo)|w-hi|)) / 2w."""
    w = np.asarray(omega, dtype=float)
    num = (w + hi) * np.maximum(np.abs(w - lo), 1e-300)
    den = (w + lo) * np.maximum(np.abs(w - hi), 1e-300)
    out = np.zeros_like(w)
    nz = w != 0
    out[nz] = np.log(num[nz] / den[nz]) / (2 * w[nz])
    # w -> 0 limit of the expression is (1/lo - 1/hi) when lo > 0, else 1/hi... guard:
    if np.any(~nz):
        lim = (1.0 / lo - 1.0 / hi) if lo > 0 else -1.0 / hi
        out[~nz] = -lim  # PV int 1/(0 - x^2) = -int dx/x^2
    return out


def self_energy_Km(model: SpectralModel, omega: float) -> float:
    """Cauchy principal value K(w) = PV int dw'/(2pi) w'J(w') / (w^2 - w'^2).

    The pole at w' = |w| is removed by subtracting w|w|J(|w|)... the product
    g(x) = x J(x) evaluated at the pole; the subtracted piece has the closed
    log form above.  Markovian terms are local and excluded.
    """
    w = abs(float(omega))
    if w == 0.0:
        return -sum(_term_shift(t) for t in model.nonmarkovian_terms())
    total = 0.0
    for term in model.nonmarkovian_terms():
        lo, hi = _support_lower(term), _support_upper(term)
        g_pole = w * float(term.j_value(w))

        def integrand(x, trm=term, gp=g_pole):
            return (x * float(trm.j_value(x)) - gp) / ((w - x) * (w + x))

        pts = sorted({p for p in ([w] + _oscillatory_splits(term)) if lo < p < hi})
        total += _quad_checked(integrand, lo, hi, "self_energy_Km", points=pts or None)
        total += g_pole * float(_pv_log_term(np.array([w]), lo, hi)[0])
    return total / (2 * np.pi)


def self_energy_grid(model: SpectralModel, omega: np.ndarray) -> np.ndarray:
    """Vectorized K(w) on a dense grid via fixed composite Gauss-Legendre panels.

    Same subtraction construction as ``self_energy_Km``; accuracy is set by
    the per-family panel layout and verified against the adaptive version.
    """
    w = np.ascontiguousarray(omega, dtype=float)
    out = np.zeros_like(w)
    for term in model.nonmarkovian_terms():
        lo, hi = _support_lower(term), _support_upper(term)
        xq, wq = _term_nodes(term)
        gq = xq * np.asarray(term.j_value(xq), dtype=float)
        g_at = np.abs(w) * np.asarray(term.j_value(np.abs(w)), dtype=float)
        log_term = _pv_log_term(np.abs(w), lo, hi)
        chunk = 2048
        for i0 in range(0, w.size, chunk):
            wi = np.abs(w[i0:i0 + chunk])
            denom = wi[:, None] ** 2 - xq[None, :] ** 2
            # pole cancels in exact arithmetic; clamp the removable point
            denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
            numer = gq[None, :] - g_at[i0:i0 + chunk, None]
            out[i0:i0 + chunk] += (numer / denom) @ wq
        out += g_at * log_term
    res = out / (2 * np.pi)
    # w = 0 entries: K(0) = -shift, computed without the pole machinery
    zero = w == 0.0
    if np.any(zero):
        res[zero] = -sum(_term_shift(t) for t in model.nonmarkovian_terms())
    return res


def jtilde_grid(model: SpectralModel, omega: np.ndarray) -> np.ndarray:
    """Vectorized Jtilde including the Markovian 4*gamma_m*w channel."""
    w = np.asarray(omega, dtype=float)
    return np.asarray(model.j_value(w) - model.j_value(-w), dtype=float)


def kernel_on_nodes(model: SpectralModel, t: np.ndarray) -> np.ndarray:
    """f(t) on a small set of times via the panel quadrature (non-oscillatory t only).

    Valid while sin(x*t) is resolved by the panel layout, i.e. t up to a few
    dozen; large-t tables are built by Fourier summation in the greens module.
    """
    tt = np.asarray(t, dtype=float)
    total = np.zeros_like(tt)
    for term in model.nonmarkovian_terms():
        xq, wq = _term_nodes(term)
        jq = np.asarray(term.j_value(xq), dtype=float)
        total += (np.sin(tt[:, None] * xq[None, :]) * (jq * wq)[None, :]).sum(axis=1)
    return total / (2 * np.pi)
