"""Explicit rates of asymptotic regularity, evaluated exactly.

All inputs are turned into rationals (floats through their shortest decimal repr,
so ``0.1`` means 1/10). Powers of e are bracketed with scaled-integer arithmetic
rounded outward and refined until the enclosing ceiling is unambiguous, so every
returned integer is the exact value of the formula. Results whose magnitude
exceeds 10**300 are reported as saturated with a log10 estimate instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DomainError
from .geometry import Modulus, cat0_modulus, lp_modulus

SATURATION_LOG10 = 300.0
LOG10_E = math.log10(math.e)


def exact(x) -> Fraction:
    """Rational value of ``x``; floats are read through ``repr`` (0.1 -> 1/10)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise DomainError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite input {x}")
        return Fraction(repr(x))
    if isinstance(x, (Decimal, str)):
        return Fraction(x)
    return Fraction(repr(float(x)))


def _log10(q: Fraction) -> float:
    return math.log10(q.numerator) - math.log10(q.denominator)


@dataclass(frozen=True)
class ExtendedCount:
    """A nonnegative integer, or a saturation flag with a log10 magnitude estimate."""

    value: Optional[int]
    saturated: bool = False
    log10: float = 0.0

    @classmethod
    def of(cls, n: int) -> "ExtendedCount":
        return cls(int(n), False, math.log10(n) if n > 0 else -math.inf)

    @classmethod
    def saturate(cls, log10: float) -> "ExtendedCount":
        return cls(None, True, log10)

    def admits(self, n: Optional[int]) -> bool:
        """True when index ``n`` is within the bound (saturated bounds admit anything)."""
        if self.saturated:
            return True
        return n is not None and n <= self.value

    def __str__(self) -> str:
        if self.saturated:
            return f"saturated(≈10^{int(math.floor(self.log10))})"
        return str(self.value)

    def to_json(self) -> dict:
        if self.saturated:
            return {"saturated": True, "log10": self.log10}
        return {"saturated": False, "value": self.value}


# -- bracketing e^n ----------------------------------------------------------------


def _e_bracket(bits: int) -> tuple[int, int]:
    """Integers lo, hi with lo / 2**bits <= e <= hi / 2**bits."""
    one = 1 << bits
    lo = hi = 0
    fact, k = 1, 0
    while True:
        lo += one // fact
        hi += -(-one // fact)
        k += 1
        fact *= k
        # tail sum_{j >= k} 1/j! < 2/k!
        if fact > (one << 1):
            hi += -(-2 * one // fact)
            return lo, hi


def _pow_scaled(base: int, n: int, bits: int, up: bool) -> int:
    one = 1 << bits
    result = one
    while n:
        if n & 1:
            result = -((-result * base) >> bits) if up else (result * base) >> bits
        n >>= 1
        if n:
            base = -((-base * base) >> bits) if up else (base * base) >> bits
    return result


def exp_bracket(n: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rational bounds lo <= e**n <= hi computed at ``bits`` of scaling."""
    if n < 0:
        raise DomainError("only nonnegative integer exponents are needed")
    lo, hi = _e_bracket(bits)
    scale = 1 << bits
    return (
        Fraction(_pow_scaled(lo, n, bits, up=False), scale),
        Fraction(_pow_scaled(hi, n, bits, up=True), scale),
    )


def ceil_affine_exp(c: Fraction, d: Fraction, n: int) -> int:
    """Exact ceil(c * e**n + d) for rational c > 0 and integer n >= 0."""
    if n == 0:
        return math.ceil(c + d)
    bits = 64 + int(n * 1.45) + max(0, c.numerator.bit_length() - c.denominator.bit_length())
    while True:
        lo, hi = exp_bracket(n, bits)
        a, b = math.ceil(c * lo + d), math.ceil(c * hi + d)
        if a == b:
            return a
        bits *= 2


# -- validation --------------------------------------------------------------------


def _positive(name, x) -> Fraction:
    q = exact(x)
    if not q > 0:
        raise DomainError(f"{name} must be positive, got {x}")
    return q


def _unit_open(name, x) -> Fraction:
    q = exact(x)
    if not 0 < q < 1:
        raise DomainError(f"{name} must lie in (0, 1), got {x}")
    return q


# -- the rates -----------------------------------------------------------------------


def averaged_rate(eps, b, lam) -> ExtendedCount:
    """K * M * ceil(2 b e^{K (M + 1)}) with K = max(ceil(1/lam), ceil(1/(1-lam))),
    M = ceil(lam (1 + 2b) / eps)."""
    eps, b, lam = _positive("eps", eps), _positive("b", b), _unit_open("lambda", lam)
    K = max(math.ceil(1 / lam), math.ceil(1 / (1 - lam)))
    M = math.ceil(lam * (1 + 2 * b) / eps)
    n = K * (M + 1)
    est = math.log10(K * M) + _log10(2 * b) + n * LOG10_E
    if est > SATURATION_LOG10:
        return ExtendedCount.saturate(est)
    return ExtendedCount.of(K * M * ceil_affine_exp(2 * b, Fraction(0), n))


def firmly_rate(eps, b, lam) -> ExtendedCount:
    """M * ceil(2 b (1 + e^{K M}) / eps) with K = ceil(1/lam), M = ceil(4b / eps)."""
    eps, b, lam = _positive("eps", eps), _positive("b", b), _unit_open("lambda", lam)
    K = math.ceil(1 / lam)
    M = math.ceil(4 * b / eps)
    n = K * M
    est = math.log10(M) + _log10(2 * b / eps) + n * LOG10_E
    if est > SATURATION_LOG10:
        return ExtendedCount.saturate(est)
    c = 2 * b / eps
    return ExtendedCount.of(M * ceil_affine_exp(c, c, n))


def ap_rate(eps, b) -> ExtendedCount:
    """floor(b^2 / eps^2) for eps < 2b, else 0."""
    eps, b = _positive("eps", eps), _positive("b", b)
    if eps >= 2 * b:
        return ExtendedCount.of(0)
    return _floor_count(b * b / (eps * eps))


def _floor_count(q: Fraction) -> ExtendedCount:
    est = _log10(q) if q > 0 else -math.inf
    if est > SATURATION_LOG10:
        return ExtendedCount.saturate(est)
    return ExtendedCount.of(math.floor(q))


def resolve_modulus(modulus) -> Modulus:
    if isinstance(modulus, Modulus):
        return modulus
    if modulus is None or modulus == "cat0":
        return cat0_modulus()
    if isinstance(modulus, str) and modulus.startswith("lp:"):
        return lp_modulus(float(modulus.split(":")[1]))
    if callable(modulus):
        return Modulus(fn=modulus, name="custom")
    raise DomainError(f"unknown modulus {modulus!r}")


def scheme_constant(lambdas: Sequence, alphas: Sequence) -> Fraction:
    """K = min_i alpha_i lambda_i (1 - lambda_i), after validating the weight."""
    lams = [_unit_open("lambda", v) for v in lambdas]
    als = [_unit_open("weight", v) for v in alphas]
    if len(lams) != len(als) or len(lams) < 2:
        raise DomainError("need equally many lambdas and weights, at least two")
    if abs(sum(als) - 1) > Fraction(1, 10**12):
        raise DomainError(f"weights sum to {float(sum(als))!r}, not 1")
    return min(a * l * (1 - l) for a, l in zip(als, lams))


def _constant(lambdas, alphas, K):
    if K is not None:
        return _positive("K", K)
    return scheme_constant(lambdas, alphas)


def parallel_rate(eps, b, modulus, lambdas=None, alphas=None, *, K=None) -> ExtendedCount:
    """floor(b / (eps K delta(b, eps/b))) for eps < 2b, else 0."""
    eps, b = _positive("eps", eps), _positive("b", b)
    Kq = _constant(lambdas, alphas, K)
    if eps >= 2 * b:
        return ExtendedCount.of(0)
    delta = exact(resolve_modulus(modulus)(b, eps / b))
    return _floor_count(b / (eps * Kq * delta))


def parallel_rate_refined(eps, b, modulus_tilde, lambdas=None, alphas=None, *, K=None) -> ExtendedCount:
    """floor(b / (2 eps K tilde(b, eps/b))) for eps < 2b, else 0.

    ``modulus_tilde`` is either a Modulus carrying ``tilde`` or the callable itself.
    """
    eps, b = _positive("eps", eps), _positive("b", b)
    Kq = _constant(lambdas, alphas, K)
    if eps >= 2 * b:
        return ExtendedCount.of(0)
    if isinstance(modulus_tilde, (Modulus, str)) or modulus_tilde is None:
        tilde = resolve_modulus(modulus_tilde).tilde
        if tilde is None:
            raise DomainError("modulus has no refined companion")
    else:
        tilde = modulus_tilde
    t = exact(tilde(b, eps / b))
    return _floor_count(b / (2 * eps * Kq * t))


def lp_closed_form_rate(eps, b, p, lambdas=None, alphas=None, *, K=None) -> ExtendedCount:
    """Explicit L_p refined rate: 4b^2/(eps^2 K (p-1)) for p <= 2, p 2^(p-1) b^p/(eps^p K) above."""
    eps, b = _positive("eps", eps), _positive("b", b)
    Kq = _constant(lambdas, alphas, K)
    if eps >= 2 * b:
        return ExtendedCount.of(0)
    P = exact(p)
    if P <= 2:
        return _floor_count(4 * b * b / (eps * eps * Kq * (P - 1)))
    if P.denominator == 1:
        e = int(P)
        return _floor_count(P * 2 ** (e - 1) * b**e / (eps**e * Kq))
    q = float(P)
    return _floor_count(exact(q * 2 ** (q - 1) * float(b) ** q / (float(eps) ** q * float(Kq))))


# -- certification ---------------------------------------------------------------------

FORMULA_SCHEMES = {
    "averaged": "picard",
    "firmly": "picard",
    "ap": "alternating_projection",
    "parallel": "parallel",
    "parallel_refined": "parallel",
}


@dataclass
class RateInputs:
    epsilon: float
    b: float
    lam: Optional[float] = None
    lambdas: Optional[Sequence[float]] = None
    alphas: Optional[Sequence[float]] = None
    modulus: object = None
    anchor: object = None
    # d(y, Ty) for the auxiliary point of the firmly-nonexpansive bound
    displacement_floor: float = 0.0


@dataclass
class RegularityCertificate:
    epsilon: float
    observed_index: Optional[int]
    bound: ExtendedCount
    bound_formula: str
    passes: bool
    threshold: float = field(default=0.0)
    inputs: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "formula": self.bound_formula,
            "inputs": self.inputs,
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "observed_index": "not reached" if self.observed_index is None else self.observed_index,
            "bound": self.bound.to_json(),
            "passes": self.passes,
        }


def compute_bound(formula: str, inputs: RateInputs) -> ExtendedCount:
    eps, b = inputs.epsilon, inputs.b
    if formula == "averaged":
        return averaged_rate(eps, b, inputs.lam)
    if formula == "firmly":
        return firmly_rate(eps, b, inputs.lam)
    if formula == "ap":
        return ap_rate(eps, b)
    if formula == "parallel":
        return parallel_rate(eps, b, inputs.modulus, inputs.lambdas, inputs.alphas)
    if formula == "parallel_refined":
        return parallel_rate_refined(eps, b, inputs.modulus, inputs.lambdas, inputs.alphas)
    raise DomainError(f"unknown formula {formula!r}")


def certify(trace, inputs: RateInputs, formula: str, space=None) -> RegularityCertificate:
    """Pair the observed regularity index of ``trace`` with the matching bound.

    An index that was never reached passes only against a saturated bound.
    """
    from .iteration import regularity_index

    scheme = FORMULA_SCHEMES.get(formula)
    if scheme is None:
        raise DomainError(f"unknown formula {formula!r}")
    if trace.scheme != scheme:
        raise DomainError(f"formula {formula!r} does not apply to a {trace.scheme} trace")
    if inputs.anchor is not None and space is not None:
        d0 = space.distance(trace.points[0], inputs.anchor)
        if d0 > float(inputs.b) + space.tol:
            raise DomainError(f"b = {inputs.b} is below d(x0, p) = {d0}")
    bound = compute_bound(formula, inputs)
    threshold = float(inputs.epsilon) + float(inputs.displacement_floor)
    observed = regularity_index(trace, threshold)
    return RegularityCertificate(
        epsilon=float(inputs.epsilon),
        observed_index=observed,
        bound=bound,
        bound_formula=formula,
        passes=bound.admits(observed),
        threshold=threshold,
        inputs=_inputs_json(inputs),
    )


def _inputs_json(inputs: RateInputs) -> dict:
    out = {"epsilon": float(inputs.epsilon), "b": float(inputs.b)}
    if inputs.lam is not None:
        out["lambda"] = float(inputs.lam)
    if inputs.lambdas is not None:
        out["lambdas"] = [float(v) for v in inputs.lambdas]
    if inputs.alphas is not None:
        out["alphas"] = [float(v) for v in inputs.alphas]
    if inputs.modulus is not None:
        m = inputs.modulus
        out["modulus"] = m if isinstance(m, str) else getattr(m, "name", repr(m))
    if inputs.displacement_floor:
        out["displacement_floor"] = float(inputs.displacement_floor)
    return out
