"""Power quasi-symmetric maps between finite spaces: representation,
verification, and parameter fitting.

Only the two-branch power control is supported:
eta(t) = lam * t^theta_low for t < 1 and lam * t^theta_high for t >= 1.
The symmetric form uses (theta_low, theta_high) = (1/theta, theta).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadArgument, BadParams, FileFormatError, NoThetaUnderCap
from .spaces import FiniteMetricSpace, load_space

REL_TOL = 1e-9

THETA_CAP = 64.0


@dataclass(frozen=True)
class PowerControl:
    theta_low: float
    theta_high: float
    lam: float

    def __post_init__(self):
        if not self.lam >= 1:
            raise BadParams(f"lam must be >= 1, got {self.lam}")
        if not (0 < self.theta_low <= self.theta_high):
            raise BadParams(
                f"need 0 < theta_low <= theta_high, got "
                f"({self.theta_low}, {self.theta_high})"
            )

    @classmethod
    def symmetric(cls, theta: float, lam: float = 1.0) -> "PowerControl":
        if theta < 1:
            raise BadParams(f"theta must be >= 1, got {theta}")
        return cls(1.0 / theta, theta, lam)


def control_bound(ctrl: PowerControl, t: float) -> float:
    """Value of the power control at a positive argument; nondecreasing,
    equals lam at t = 1."""
    if not t > 0:
        raise BadArgument(f"control argument must be positive, got {t}")
    exponent = ctrl.theta_low if t < 1 else ctrl.theta_high
    return ctrl.lam * t ** exponent


@dataclass(frozen=True)
class PointMap:
    """A bijection between the index sets of two finite spaces."""

    source: FiniteMetricSpace
    target: FiniteMetricSpace
    forward: tuple[int, ...]

    def __post_init__(self):
        n = self.source.n
        if self.target.n != n:
            raise BadArgument("source and target sizes differ")
        if sorted(self.forward) != list(range(n)):
            raise BadArgument("forward table is not a bijection")

    @property
    def n(self) -> int:
        return self.source.n

    def image_dist(self) -> np.ndarray:
        """Target distances pulled back to source indices."""
        f = list(self.forward)
        return self.target.dist[np.ix_(f, f)]

    def inverse(self) -> "PointMap":
        back = [0] * self.n
        for i, j in enumerate(self.forward):
            back[j] = i
        return PointMap(self.target, self.source, tuple(back))

    def then(self, other: "PointMap") -> "PointMap":
        if other.source.n != self.target.n:
            raise BadArgument("composition sizes differ")
        return PointMap(
            self.source,
            other.target,
            tuple(other.forward[j] for j in self.forward),
        )


def identity_map(source: FiniteMetricSpace, target: FiniteMetricSpace) -> PointMap:
    return PointMap(source, target, tuple(range(source.n)))


@dataclass(frozen=True)
class QSCheckResult:
    passed: bool
    worst_triple: tuple[int, int, int]
    worst_score: float  # max over triples of ratio' / eta(ratio)


def _worst_score(pmap: PointMap, theta_low: float, theta_high: float):
    """Max over ordered triples (x, y, z), x != z != y, of
    (d_W ratio) / (d_Z ratio)^branch-exponent, with the worst triple.

    Triples with a repeated point in the denominator are excluded exactly as
    the control inequality requires (nonzero denominators).
    """
    n = pmap.n
    dz = pmap.source.dist
    dw = pmap.image_dist()
    best = -np.inf
    arg = (0, 1, 2)
    idx = np.arange(n)
    for z in range(n):
        keep = idx != z
        u = dz[keep, z]
        v = dw[keep, z]
        t = u[:, None] / u[None, :]
        core = np.where(t < 1.0, t ** theta_low, t ** theta_high)
        score = (v[:, None] / v[None, :]) / core
        flat = int(np.argmax(score))
        x_i, y_i = divmod(flat, n - 1)
        if score[x_i, y_i] > best:
            best = float(score[x_i, y_i])
            arg = (int(idx[keep][x_i]), int(idx[keep][y_i]), z)
    return best, arg


def qs_check(pmap: PointMap, ctrl: PowerControl, rel_tol: float = REL_TOL) -> QSCheckResult:
    """Exhaustively test the control inequality
    d_W(f x, f z)/d_W(f y, f z) <= eta(d_Z(x, z)/d_Z(y, z))
    over all ordered triples with x != z and y != z.
    """
    score, triple = _worst_score(pmap, ctrl.theta_low, ctrl.theta_high)
    return QSCheckResult(score <= ctrl.lam * (1.0 + rel_tol), triple, score)


def qs_fit_lambda(pmap: PointMap, theta: float) -> float:
    """Smallest lam for which the map passes at exponents (1/theta, theta).

    qs_check with PowerControl.symmetric(theta, max(result, 1)) passes.
    """
    if theta < 1:
        raise BadParams(f"theta must be >= 1, got {theta}")
    score, _ = _worst_score(pmap, 1.0 / theta, theta)
    return score


def fit_lambda(pmap: PointMap, theta_low: float, theta_high: float) -> float:
    """Smallest lam for arbitrary branch exponents (asymmetric control)."""
    if not (0 < theta_low <= theta_high):
        raise BadParams("need 0 < theta_low <= theta_high")
    score, _ = _worst_score(pmap, theta_low, theta_high)
    return score


def qs_fit_theta(pmap: PointMap, lam: float, tol: float = 1e-6,
                 cap: float = THETA_CAP) -> float:
    """Smallest theta (within tol) at which the map passes with the given
    lam, by bisection on the monotone predicate "qs_check passes at
    (1/theta, theta, lam)".  Raises NoThetaUnderCap when even the cap fails.
    """
    if lam < 1:
        raise BadParams(f"lam must be >= 1, got {lam}")

    def passes(theta: float) -> bool:
        score, _ = _worst_score(pmap, 1.0 / theta, theta)
        return score <= lam * (1.0 + REL_TOL)

    if passes(1.0):
        return 1.0
    if not passes(cap):
        raise NoThetaUnderCap(f"no passing theta below cap {cap}")
    lo, hi = 1.0, cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --- map files -----------------------------------------------------------------

def save_map(pmap: PointMap, path, source_path, target_path) -> None:
    """Write the forward table with references to the two space files."""
    payload = {
        "source": str(source_path),
        "target": str(target_path),
        "forward": list(pmap.forward),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_map(path) -> PointMap:
    """Read a map file; space paths resolve relative to the file's folder."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise FileFormatError(f"{path}: expected a JSON object")
    try:
        src_ref, dst_ref = raw["source"], raw["target"]
        forward = tuple(int(i) for i in raw["forward"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed map file: {exc}") from exc

    def resolve(ref):
        p = Path(ref)
        return p if p.is_absolute() else path.parent / p

    source = load_space(resolve(src_ref))
    target = load_space(resolve(dst_ref))
    return PointMap(source, target, forward)
