"""Orthant-confined right-inverses of the actuation map and trajectory lifting.

The extremal inverse picks, for every task w, the unique point of the fiber of
w lying on a fixed potential leaf inside an extremal orthant.  Because those
leaves never touch the coordinate hyperplanes, the resulting allocator is
globally smooth, including through w = 0 where the naive minimum-norm lift has
a square-root cusp.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoBracketError, NonGenericSegmentError, OriginExcludedError
from .fibers import crossing_parameters
from .model import AllocationModel, Task, untransform
from .potential import LAMBDA_CAP, SectionPoint, section_intersection

#: Relative min|v_i| margin below which a transitional inverse reports hinge proximity.
HINGE_MARGIN = 1e-6


@dataclass(frozen=True)
class SectionInverseConfig:
    """Configuration of a section-based right-inverse.

    ``layer`` selects the transverse layer (n and 0 are the extremal orthants,
    the only globally smooth choices); ``C`` selects the leaf.
    """

    layer: int
    C: float = 0.0
    lam_cap: float = LAMBDA_CAP
    hinge_margin: float = HINGE_MARGIN


@dataclass(frozen=True)
class HingeProximity:
    """Flag attached to a transitional inverse result near a hinge."""

    index_pair: tuple[int, int]
    min_abs_v: float


@dataclass(frozen=True)
class LiftedTrajectory:
    """Per-sample lift of a task trajectory through one allocator."""

    allocator: str
    t: np.ndarray
    w: np.ndarray          # (N, m)
    v: np.ndarray          # (N, n)
    speed: np.ndarray      # (N,) finite-difference ||dv/dt||, first entry 0
    min_abs_v: np.ndarray  # (N,)
    signatures: tuple[str, ...]

    @property
    def max_speed(self) -> float:
        return float(np.max(self.speed))

    @property
    def signature_changes(self) -> int:
        return sum(1 for a, b in zip(self.signatures, self.signatures[1:]) if a != b)


def extremal_inverse(model: AllocationModel, w, C: float = 0.0,
                     branch: str = "positive",
                     lam_cap: float = LAMBDA_CAP) -> np.ndarray:
    """Singularity-free right-inverse on an extremal leaf.

    Returns the unique v with actuation(v) = w, Phi(v) = C, and
    sign(v) = +/- sign(b) strictly; defined for every finite w including 0.
    """
    trace = crossing_parameters(model, w)
    segment = len(trace.distinct_crossings) if branch == "positive" else 0
    if branch not in ("positive", "negative"):
        raise ValueError(f"branch must be 'positive' or 'negative', got {branch!r}")
    sp = section_intersection(model, w, segment, C, lam_cap=lam_cap, trace=trace)
    return sp.v


def extremal_inverse_batch(model: AllocationModel, W, C: float = 0.0,
                           branch: str = "positive",
                           lam_cap: float = LAMBDA_CAP) -> np.ndarray:
    """Vectorized extremal inverse for a batch of tasks (one row per task).

    Same semantics as :func:`extremal_inverse`; all samples are bracketed and
    bisected in lockstep, which keeps dense trajectory lifts cheap.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    Z = W @ model.A_pinv.T
    b = model.b
    lam_star = -Z / b
    if branch == "positive":
        edge, direction = lam_star.max(axis=1), 1.0
    elif branch == "negative":
        edge, direction = lam_star.min(axis=1), -1.0
    else:
        raise ValueError(f"branch must be 'positive' or 'negative', got {branch!r}")

    def cw(lam):
        u = Z + lam[:, None] * b
        with np.errstate(divide="ignore"):
            return 0.5 * np.sum(b * np.sign(u) * np.log(np.abs(u)), axis=1)

    # near-edge bracket side: C_w diverges toward the edge opposite the sweep
    step = np.ones(W.shape[0])
    near = edge + direction * step
    for _ in range(200):
        val = cw(near)
        bad = (val >= C) if direction > 0 else (val <= C)
        bad |= ~np.isfinite(val)
        if not bad.any():
            break
        step[bad] *= 0.5
        near = edge + direction * step
    else:
        raise NoBracketError(C, lam_cap)
    # far side: geometric expansion away from the edge
    step = np.ones(W.shape[0])
    far = edge + direction * step
    while True:
        val = cw(far)
        bad = (val < C) if direction > 0 else (val > C)
        if not bad.any():
            break
        step[bad] *= 2.0
        far = edge + direction * step
        if np.any(np.abs(far) > lam_cap):
            raise NoBracketError(C, lam_cap)

    lo, hi = (near, far) if direction > 0 else (far, near)
    for _ in range(110):
        mid = 0.5 * (lo + hi)
        below = cw(mid) < C
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    u = Z + (0.5 * (lo + hi))[:, None] * b
    return untransform(u)


def section_inverse(model: AllocationModel, w,
                    config: SectionInverseConfig) -> tuple[SectionPoint, HingeProximity | None]:
    """Right-inverse on the layer-``config.layer`` global section.

    For transitional layers the origin is excluded (the central fiber skips
    them), and results with min|v_i| under the hinge margin carry a
    HingeProximity report naming the two smallest components.
    """
    w_arr = w.w if isinstance(w, Task) else np.atleast_1d(np.asarray(w, dtype=float))
    if not 0 <= config.layer <= model.n:
        raise ValueError(f"layer must lie in [0, {model.n}]")
    transitional = 0 < config.layer < model.n
    if transitional and np.all(w_arr == 0.0):
        raise OriginExcludedError(
            "zero task has no preimage on a transitional layer")

    trace = crossing_parameters(model, w_arr)
    seg_layers = [sig.layer for sig in trace.orthant_sequence]
    if config.layer not in seg_layers:
        raise NonGenericSegmentError(
            f"fiber skips layer {config.layer} (merged crossings inhabit "
            f"layers {seg_layers})")
    segment = seg_layers.index(config.layer)
    sp = section_intersection(model, w_arr, segment, config.C,
                              lam_cap=config.lam_cap, trace=trace)

    report = None
    if transitional:
        absv = np.abs(sp.v)
        floor = config.hinge_margin * np.max(absv)
        if np.min(absv) < floor:
            order = np.argsort(absv)
            report = HingeProximity(index_pair=(int(order[0]), int(order[1])),
                                    min_abs_v=float(absv[order[0]]))
    return sp, report


def naive_minimum_norm_inverse(model: AllocationModel, w) -> np.ndarray:
    """Baseline allocator: untransform of the minimum-norm transformed solution.

    This is the lambda = 0 fiber point.  It crosses coordinate hyperplanes as
    w varies, with an inverse-square-root derivative blow-up at each crossing.
    """
    w_arr = w.w if isinstance(w, Task) else np.atleast_1d(np.asarray(w, dtype=float))
    return untransform(model.A_pinv @ w_arr)


def lift_trajectory(model: AllocationModel, t, w_samples, allocator: str,
                    config: SectionInverseConfig | None = None,
                    branch: str = "positive") -> LiftedTrajectory:
    """Lift a sampled task trajectory through one allocator, per sample.

    ``allocator`` is one of 'extremal', 'section', or 'naive'.  Allocator
    errors propagate annotated with the failing sample index.
    """
    t = np.asarray(t, dtype=float)
    w_samples = np.atleast_2d(np.asarray(w_samples, dtype=float))
    if w_samples.shape[0] != t.shape[0]:
        w_samples = w_samples.T
    if np.any(np.diff(t) <= 0):
        raise ValueError("time stamps must be strictly increasing")
    if config is None:
        config = SectionInverseConfig(layer=model.n)

    if allocator == "extremal":
        vs = extremal_inverse_batch(model, w_samples, config.C, branch=branch,
                                    lam_cap=config.lam_cap)
    elif allocator == "naive":
        vs = untransform(w_samples @ model.A_pinv.T)
    elif allocator == "section":
        vs = np.empty((t.shape[0], model.n))
        for k, wk in enumerate(w_samples):
            try:
                vs[k] = section_inverse(model, wk, config)[0].v
            except Exception as exc:
                exc.args = tuple(exc.args) + (
                    f"while lifting sample {k} (t = {t[k]:g})",)
                raise
    else:
        raise ValueError(f"unknown allocator {allocator!r}")

    speed = np.zeros(t.shape[0])
    speed[1:] = np.linalg.norm(np.diff(vs, axis=0), axis=1) / np.diff(t)
    sigs = tuple(
        "(" + ",".join("+" if x > 0 else "-" for x in row) + ")" for row in vs)
    lifted = LiftedTrajectory(
        allocator=allocator, t=t, w=w_samples, v=vs, speed=speed,
        min_abs_v=np.min(np.abs(vs), axis=1), signatures=sigs)
    if allocator == "extremal" and lifted.signature_changes:
        raise AssertionError(
            "extremal lift changed orthant signature; confinement violated")
    return lifted


def smoothness_probe(model: AllocationModel, w0, direction, C: float,
                     scales, allocator: str = "extremal",
                     branch: str = "positive") -> list[dict]:
    """Difference quotients of an allocator along a task direction.

    For the extremal allocator the quotients settle to a finite limit
    everywhere (including w0 = 0); the naive baseline's diverge like
    h^(-1/2) at hyperplane-crossing tasks.
    """
    w0 = np.atleast_1d(np.asarray(w0, dtype=float))
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    d = d / np.linalg.norm(d)

    def solve(w):
        if allocator == "extremal":
            return extremal_inverse(model, w, C, branch=branch)
        if allocator == "naive":
            return naive_minimum_norm_inverse(model, w)
        raise ValueError(f"unknown allocator {allocator!r}")

    v0 = solve(w0)
    rows = []
    for h in scales:
        vh = solve(w0 + h * d)
        rows.append({"h": float(h),
                     "quotient": float(np.linalg.norm(vh - v0) / h)})
    return rows
