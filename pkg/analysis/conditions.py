"""
Attainability and stability conditions for permanent rotations.

All quantities are body-frame: (p, q, r) are the components of ω∞ in the
eigenframe of the total inertia, (A, B, C) its ascending eigenvalues and E
the liquid energy.
"""
import itertools
import math
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel

DEGENERACY_RTOL = 1e-9


class MomentCase(str, Enum):
    AXISYMMETRIC_MAJOR = "A = B < C"
    AXISYMMETRIC_MINOR = "A < B = C"
    ASYMMETRIC = "A < B < C"
    ISOTROPIC = "A = B = C"


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    DEGENERATE_BOUNDARY = "degenerate_boundary"


class InequalityCheck(BaseModel):
    """0 < left <= right."""
    name: str
    left: float
    right: float
    verdict: Verdict
    left_interval: Optional[Tuple[float, float]] = None
    right_interval: Optional[Tuple[float, float]] = None
    printed_left: Optional[float] = None
    printed_right: Optional[float] = None
    reproduced: Optional[bool] = None


class ConditionReport(BaseModel):
    case: MomentCase
    moments: Tuple[float, float, float]
    omega: Tuple[float, float, float]
    energy: float
    inequalities: List[InequalityCheck]
    verdict: Verdict
    prediction: str


PREDICTIONS = {
    MomentCase.AXISYMMETRIC_MAJOR: 'p, q -> 0 and r -> r_bar != 0: rotation about e3',
    MomentCase.AXISYMMETRIC_MINOR: 'p -> 0, q -> q_bar, r -> r_bar: rotation in the e2-e3 plane',
    MomentCase.ASYMMETRIC: 'p, q -> 0 and r -> r_bar != 0: rotation about e3',
    MomentCase.ISOTROPIC: 'every angular velocity is a permanent rotation; omega -> omega_inf(0)',
}


def _same(x: float, y: float, rtol: float) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y))


def classify(moments: Sequence[float], rtol: float = DEGENERACY_RTOL) -> MomentCase:
    a, b, c = (float(m) for m in moments)
    if not (a <= b * (1 + rtol) and b <= c * (1 + rtol)):
        raise ValueError(f'Moments must be ordered A <= B <= C, got {tuple(moments)}')
    if _same(a, b, rtol) and _same(b, c, rtol):
        return MomentCase.ISOTROPIC
    if _same(a, b, rtol):
        return MomentCase.AXISYMMETRIC_MAJOR
    if _same(b, c, rtol):
        return MomentCase.AXISYMMETRIC_MINOR
    return MomentCase.ASYMMETRIC


def inequality_sides(case: MomentCase, energy: float, omega: Sequence[float],
                     moments: Sequence[float]) -> Dict[str, Tuple[float, float]]:
    """(left, right) of every inequality that applies to `case`."""
    a, b, c = moments
    p, q, r = omega
    if case is MomentCase.AXISYMMETRIC_MAJOR:
        return {'axial_spin': (energy, (c - a) * c / (2 * a) * r ** 2)}
    if case is MomentCase.AXISYMMETRIC_MINOR:
        return {'transverse_spin': (energy, b * (b - a) / (2 * a) * (q ** 2 + r ** 2))}
    if case is MomentCase.ASYMMETRIC:
        return {
            'major_spin': (energy + a / (2 * b) * (b - a) * p ** 2, c / (2 * b) * (c - b) * r ** 2),
            'energy_bound': (energy, b / (2 * a) * (b - a) * q ** 2 + c / (2 * a) * (c - a) * r ** 2),
        }
    return {}


def _verdict(left: float, right: float) -> Verdict:
    if left > right:
        return Verdict.VIOLATED
    if left <= 0:
        return Verdict.DEGENERATE_BOUNDARY
    return Verdict.SATISFIED


def _corner_intervals(case, energy, omega, moments, decimals) -> Dict[str, Tuple[Tuple[float, float], Tuple[float, float]]]:
    half = 0.5 * 10.0 ** (-decimals)
    values = list(moments) + list(omega)
    lefts: Dict[str, List[float]] = {}
    rights: Dict[str, List[float]] = {}
    for signs in itertools.product((-1.0, 1.0), repeat=6):
        corner = [v + s * half for v, s in zip(values, signs)]
        for name, (left, right) in inequality_sides(case, energy, corner[3:], corner[:3]).items():
            lefts.setdefault(name, []).append(left)
            rights.setdefault(name, []).append(right)
    return {name: ((min(lefts[name]), max(lefts[name])), (min(rights[name]), max(rights[name]))) for name in lefts}


def attainability_report(energy: float, omega: Sequence[float], moments: Sequence[float],
                         rtol: float = DEGENERACY_RTOL, input_decimals: Optional[int] = None,
                         printed: Optional[Dict[str, Tuple[Optional[float], Optional[float]]]] = None) -> ConditionReport:
    """
    Evaluate the attainability inequalities for initial data (E(0), p(0), q(0), r(0)).

    With `input_decimals`, each side is also evaluated at every corner of the
    box of inputs that round to the given moments and components; `printed`
    values (by inequality name) are then marked reproduced when they fall
    inside that interval.
    """
    if energy < 0:
        raise ValueError(f'Liquid energy must be nonnegative, got {energy}')
    if energy == 0 and not any(omega):
        raise ValueError('Initial data are all zero')
    case = classify(moments, rtol)
    omega = tuple(float(w) for w in omega)
    moments = tuple(float(m) for m in moments)
    intervals = _corner_intervals(case, energy, omega, moments, input_decimals) if input_decimals is not None else {}
    printed = printed or {}

    checks = []
    for name, (left, right) in inequality_sides(case, energy, omega, moments).items():
        check = InequalityCheck(name=name, left=left, right=right, verdict=_verdict(left, right))
        if name in intervals:
            check.left_interval, check.right_interval = intervals[name]
        if name in printed:
            check.printed_left, check.printed_right = printed[name]
            if name in intervals:
                check.reproduced = all(
                    value is None or interval[0] <= value <= interval[1]
                    for value, interval in ((check.printed_left, check.left_interval),
                                            (check.printed_right, check.right_interval))
                )
        checks.append(check)

    verdicts = {check.verdict for check in checks}
    if Verdict.VIOLATED in verdicts:
        verdict = Verdict.VIOLATED
    elif Verdict.DEGENERATE_BOUNDARY in verdicts:
        verdict = Verdict.DEGENERATE_BOUNDARY
    else:
        verdict = Verdict.SATISFIED
    prediction = PREDICTIONS[case] if verdict is Verdict.SATISFIED else 'no prediction: initial data outside the proven range'
    return ConditionReport(case=case, moments=moments, omega=omega, energy=energy, inequalities=checks,
                           verdict=verdict, prediction=prediction)


def predict_rstar(moments: Sequence[float], omega0: float, perturbation: Sequence[float]) -> float:
    """
    Final spin offset r* of a perturbed permanent rotation ω₀e₃:
    r* = −ω₀ ± sqrt((A²p̃² + B²q̃²)/C² + (r̃ + ω₀)²), sign of ω₀.
    """
    a, b, c = moments
    if not c > b:
        raise ValueError(f'Spin prediction needs C > B, got B={b}, C={c}')
    if omega0 == 0:
        raise ValueError('Unperturbed spin must be nonzero')
    p, q, r = perturbation
    root = math.sqrt((a ** 2 * p ** 2 + b ** 2 * q ** 2) / c ** 2 + (r + omega0) ** 2)
    return -omega0 + math.copysign(root, omega0)


def stability_margin(moments: Sequence[float]) -> float:
    """m = max{2C, A(C − A), B(C − B)} / min{...}."""
    a, b, c = moments
    terms = (2 * c, a * (c - a), b * (c - b))
    if min(terms) <= 0:
        raise ValueError(f'Stability constant undefined for moments {tuple(moments)}: need A <= B < C')
    return max(terms) / min(terms)
