"""Grasp candidate generation, quasi-static grasp trials, and reduction.

The trial model replaces multibody dynamics with geometry and statics:

* The grapple is lowered with the claws spread to the commanded width. A
  claw descending onto a log normally means a collision, but the grapple
  hangs from unactuated joints, so it can give sideways along the closing
  direction by up to ``COMPLIANCE_RANGE`` while the claw tips slide clear.
  If no give resolves the contact, the trial fails with ``ClawCollision``.
* Closing sweeps everything between the claw tips into the grapple; the
  captured set is every log whose centerline crosses the swept rectangle.
  Capturing anything other than the target set fails the trial.
* The grapple can only close fully around a bounded total log cross-section
  (``CLOSURE_CAPACITY``); beyond it the trial fails as not fully closed.
* On success the lifted load tilts the grapple like a pendulum: the balance
  angle is ``arctan(|s| / h)`` with ``s`` the mass-weighted lateral offset
  of the load's center of mass from the grasp point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import constants as C
from .geometry import (OrientedRect, normalize_angle, rect_overlap_area,
                       rects_intersect, seg_rect_clip)
from .scene import Log, Pile


class FailureReason(Enum):
    WRONG_SET_CAPTURED = "WrongSetCaptured"
    CLAW_COLLISION = "ClawCollision"
    INSUFFICIENT_CLOSURE = "InsufficientClosure"
    OUT_OF_RANGE = "OutOfRange"
    NO_GRASP = "NoGrasp"  # harness-level: no grasp above the quality cutoff


@dataclass(frozen=True)
class Grasp:
    """Planar top-down grasp: position, closing direction, opening width."""

    x: float
    y: float
    phi: float  # closing direction (line along which the claws approach)
    w: float    # claw-tip separation [m]
    tau: int    # number of target logs

    def __post_init__(self):
        object.__setattr__(self, "phi", normalize_angle(self.phi))

    @property
    def closing_dir(self) -> np.ndarray:
        return np.array([math.cos(self.phi), math.sin(self.phi)])

    @property
    def axis_dir(self) -> np.ndarray:
        return np.array([-math.sin(self.phi), math.cos(self.phi)])


@dataclass(frozen=True)
class TrialResult:
    success: bool
    captured: frozenset
    beta: float | None = None       # balance angle [rad], success only
    b: float | None = None          # cos(beta), success only
    failure_reason: FailureReason | None = None

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "captured": sorted(self.captured),
            "beta": self.beta,
            "b": self.b,
            "failure_reason": (self.failure_reason.value
                               if self.failure_reason else None),
        }


def capture_rect(grasp: Grasp, shift: float = 0.0) -> OrientedRect:
    """Region swept by the closing claws, optionally shifted along closing."""
    u = grasp.closing_dir
    return OrientedRect(grasp.x + shift * u[0], grasp.y + shift * u[1],
                        grasp.phi, grasp.w, C.CLAW_BREADTH)


def grasp_rect(grasp: Grasp) -> OrientedRect:
    """The grasp rectangle used for overlap-based candidate reduction."""
    return capture_rect(grasp)


def _claw_rect(grasp: Grasp, side: float, shift: float,
               thickness: float, breadth: float) -> OrientedRect:
    u = grasp.closing_dir
    off = shift + side * 0.5 * grasp.w
    return OrientedRect(grasp.x + off * u[0], grasp.y + off * u[1],
                        grasp.phi, thickness, breadth)


def _log_crosses(log: Log, rect: OrientedRect) -> bool:
    a, b = log.endpoints_2d()
    return seg_rect_clip(a, b, rect) is not None


def _forbidden_shift_intervals(grasp: Grasp, logs) -> list:
    """Shift intervals along the closing direction where a claw tip would
    land on a log footprint, computed per (log, claw) via SAT."""
    u = grasp.closing_dir
    v = grasp.axis_dir
    intervals = []
    for side in (-1.0, 1.0):
        base = np.array([grasp.x, grasp.y]) + side * 0.5 * grasp.w * u
        for log in logs:
            rect = log.footprint_rect()
            ru, rv = rect.axes()
            lo, hi = -math.inf, math.inf
            ok = True
            for axis in (u, v, ru, rv):
                # claw tip half-extent on this axis
                r_t = (0.5 * C.CLAW_TIP * abs(float(u @ axis))
                       + 0.5 * C.CLAW_BREADTH * abs(float(v @ axis)))
                r_f = (0.5 * rect.length * abs(float(ru @ axis))
                       + 0.5 * rect.breadth * abs(float(rv @ axis)))
                a0 = float((base[0] - rect.cx) * axis[0]
                           + (base[1] - rect.cy) * axis[1])
                g = float(u @ axis)
                r_sum = r_t + r_f
                if abs(g) < 1e-12:
                    if abs(a0) > r_sum:
                        ok = False
                        break
                    continue
                d0 = (-r_sum - a0) / g
                d1 = (r_sum - a0) / g
                if d0 > d1:
                    d0, d1 = d1, d0
                lo = max(lo, d0)
                hi = min(hi, d1)
                if lo > hi:
                    ok = False
                    break
            if ok and lo <= hi:
                intervals.append((lo, hi))
    return intervals


def _find_compliant_shift(grasp: Grasp, logs) -> float | None:
    """Smallest |shift| within the compliance range with both claws clear."""
    forbidden = _forbidden_shift_intervals(grasp, logs)
    n_steps = int(round(C.COMPLIANCE_RANGE / C.COMPLIANCE_STEP))
    for step in range(n_steps + 1):
        for sign in ((1.0,) if step == 0 else (1.0, -1.0)):
            delta = sign * step * C.COMPLIANCE_STEP
            if not any(lo <= delta <= hi for lo, hi in forbidden):
                return delta
    return None


def simulate_grasp(pile: Pile, grasp: Grasp, targets) -> TrialResult:
    """Deterministic quasi-static grasp trial; see the module docstring."""
    targets = frozenset(targets)
    if not (0.0 <= grasp.x <= C.EXTENT and 0.0 <= grasp.y <= C.EXTENT
            and C.W_MIN - 1e-9 <= grasp.w <= C.W_MAX + 1e-9):
        return TrialResult(False, frozenset(),
                           failure_reason=FailureReason.OUT_OF_RANGE)

    shift = _find_compliant_shift(grasp, pile.logs)
    if shift is None:
        return TrialResult(False, frozenset(),
                           failure_reason=FailureReason.CLAW_COLLISION)

    rect = capture_rect(grasp, shift)
    captured = frozenset(log.id for log in pile.logs
                         if _log_crosses(log, rect))
    if captured != targets:
        return TrialResult(False, captured,
                           failure_reason=FailureReason.WRONG_SET_CAPTURED)

    cross_section = sum(math.pi * pile.log_by_id(i).radius ** 2
                        for i in captured)
    if cross_section > C.CLOSURE_CAPACITY:
        return TrialResult(False, captured,
                           failure_reason=FailureReason.INSUFFICIENT_CLOSURE)

    beta, b = balance_of(grasp, [pile.log_by_id(i) for i in captured])
    return TrialResult(True, captured, beta=beta, b=b)


def balance_of(grasp: Grasp, captured_logs) -> tuple[float, float]:
    """Balance angle of the lifted load and its cosine.

    The load hangs like a pendulum of length ``H_PENDULUM``; only the
    center-of-mass offset perpendicular to the closing direction tilts the
    grapple (offsets along the closing direction are absorbed by the claws
    closing symmetrically).
    """
    captured_logs = list(captured_logs)
    if not captured_logs:
        raise ValueError("captured set must be non-empty")
    v = grasp.axis_dir
    total_mass = 0.0
    moment = 0.0
    for log in captured_logs:
        m = log.mass
        total_mass += m
        moment += m * ((log.cx - grasp.x) * v[0] + (log.cy - grasp.y) * v[1])
    s_bar = moment / total_mass
    beta = math.atan(abs(s_bar) / C.H_PENDULUM)
    return beta, math.cos(beta)


# --------------------------------------------------------------------------
# Candidate generation
# --------------------------------------------------------------------------

def _mean_axis(target_logs) -> float:
    """Mean log-axis direction via doubled-angle averaging, in [0, pi)."""
    cs = sum(math.cos(2.0 * log.yaw) for log in target_logs)
    sn = sum(math.sin(2.0 * log.yaw) for log in target_logs)
    if cs == 0.0 and sn == 0.0:
        return target_logs[0].yaw
    return normalize_angle(0.5 * math.atan2(sn, cs))


def _weighted_midpoint(target_logs) -> np.ndarray:
    total = sum(log.mass for log in target_logs)
    x = sum(log.mass * log.cx for log in target_logs) / total
    y = sum(log.mass * log.cy for log in target_logs) / total
    return np.array([x, y])


def _line_seg_crossing(origin, direction, a, b):
    """(lambda, u): crossing of an infinite line with segment a->b, or None."""
    dx, dy = direction
    sx = b[0] - a[0]
    sy = b[1] - a[1]
    denom = dx * sy - dy * sx
    if abs(denom) < 1e-12:
        return None
    rx = a[0] - origin[0]
    ry = a[1] - origin[1]
    lam = (rx * sy - ry * sx) / denom
    u = (rx * dy - ry * dx) / denom
    if not (0.0 <= u <= 1.0):
        return None
    return lam, u


def _candidate_at(center, phi, target_logs, other_logs, all_logs, tau):
    """Build and filter one candidate with closing direction phi through
    the given point; returns a Grasp or None."""
    u_dir = (math.cos(phi), math.sin(phi))
    spans = []
    for log in target_logs:
        a, b = log.endpoints_2d()
        hit = _line_seg_crossing(center, u_dir, a, b)
        if hit is None:
            return None
        lam, frac = hit
        seg_len = 2.0 * log.half_len_2d
        end_dist = min(frac, 1.0 - frac) * seg_len
        if end_dist < C.CROSSING_END_MARGIN:
            return None
        # half-extent of the log's forbidden zone along the closing line;
        # the cos term accounts for claws of finite axial breadth sliding
        # past an obliquely crossed log
        sin_cross = abs(math.sin(phi - log.yaw))
        cos_cross = abs(math.cos(phi - log.yaw))
        half = ((log.radius + 0.5 * C.KEEPOUT_BREADTH * cos_cross)
                / max(sin_cross, C.MIN_CROSS_SIN))
        spans.append((lam - half, lam + half))
    lo = min(s[0] for s in spans)
    hi = max(s[1] for s in spans)
    w_raw = (hi - lo) + 2.0 * C.CLAW_CLEARANCE
    if w_raw > C.W_MAX:
        return None
    w = max(w_raw, C.W_MIN)
    mid = 0.5 * (lo + hi)
    cx = center[0] + mid * u_dir[0]
    cy = center[1] + mid * u_dir[1]
    if not (0.0 <= cx <= C.EXTENT and 0.0 <= cy <= C.EXTENT):
        return None
    grasp = Grasp(cx, cy, phi, w, tau)

    cap = capture_rect(grasp)
    if not all(_log_crosses(log, cap) for log in target_logs):
        return None
    # inflated keep-out so that every grasp decoded from anywhere inside the
    # encoding rectangle still captures exactly the target set
    keepout = OrientedRect(cx, cy, phi, w + 2.0 * C.EXCLUSION_INFLATE_CLOSING,
                           C.KEEPOUT_BREADTH)
    if any(_log_crosses(log, keepout) for log in other_logs):
        return None
    u = grasp.closing_dir
    for side in (-1.0, 1.0):
        off = side * 0.5 * w
        corridor = OrientedRect(cx + off * u[0], cy + off * u[1], phi,
                                C.CLAW_CORRIDOR, C.KEEPOUT_BREADTH)
        if any(rects_intersect(corridor, log.footprint_rect())
               for log in all_logs):
            return None
    return grasp


def generate_candidates(pile: Pile, targets) -> list[Grasp]:
    """Geometry-only search for promising grasps on the target set.

    Closing directions perpendicular (plus small offsets) to the mean target
    axis are swept along the mean-axis line through the targets' weighted
    midpoint; each position yields a width from the projected span of the
    target cross-sections plus claw clearance. Candidates that could capture
    a non-target log or land a claw on any log are rejected. Sorted by
    width ascending.
    """
    targets = frozenset(targets)
    if not targets:
        raise ValueError("target set must be non-empty")
    target_logs = [pile.log_by_id(i) for i in sorted(targets)]
    other_logs = [log for log in pile.logs if log.id not in targets]
    alpha = _mean_axis(target_logs)
    mid = _weighted_midpoint(target_logs)
    axis = np.array([math.cos(alpha), math.sin(alpha)])

    # sampling interval along the axis line, covering the targets' extent
    t_lo, t_hi = math.inf, -math.inf
    for log in target_logs:
        for p in log.endpoints_2d():
            t = float((p[0] - mid[0]) * axis[0] + (p[1] - mid[1]) * axis[1])
            t_lo = min(t_lo, t)
            t_hi = max(t_hi, t)
    k_lo = int(math.floor(t_lo / C.CENTER_SPACING))
    k_hi = int(math.ceil(t_hi / C.CENTER_SPACING))

    seen = set()
    out = []
    for off_deg in C.ANGLE_OFFSETS_DEG:
        phi = normalize_angle(alpha + 0.5 * math.pi
                              + math.radians(off_deg))
        for k in range(k_lo, k_hi + 1):
            center = mid + (k * C.CENTER_SPACING) * axis
            g = _candidate_at(center, phi, target_logs, other_logs,
                              list(pile.logs), len(targets))
            if g is None:
                continue
            key = (round(g.x, 6), round(g.y, 6), round(g.phi, 6),
                   round(g.w, 6))
            if key in seen:
                continue
            seen.add(key)
            out.append(g)
    out.sort(key=lambda g: (g.w, g.x, g.y, g.phi))
    return out


def reduce_candidates(candidates, pile: Pile, targets
                      ) -> list[tuple[Grasp, TrialResult]]:
    """Narrowest-first reduction of a candidate list to successful grasps.

    Repeatedly simulate the narrowest remaining candidate; keep successes
    and drop candidates whose grasp rectangle overlaps a kept grasp by more
    than ``OVERLAP_THRESHOLD``.
    """
    remaining = sorted(candidates, key=lambda g: (g.w, g.x, g.y, g.phi))
    kept: list[tuple[Grasp, TrialResult]] = []
    while remaining:
        g = remaining.pop(0)
        result = simulate_grasp(pile, g, targets)
        if result.success:
            kept.append((g, result))
            g_rect = grasp_rect(g)
            remaining = [
                c for c in remaining
                if rect_overlap_area(g_rect, grasp_rect(c))
                <= C.OVERLAP_THRESHOLD
            ]
    return kept
