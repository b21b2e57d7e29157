"""Evaluation harness: predictors, pile emptying and robustness probes.

A predictor maps (pile, target subset) to a grasp map; the harness ranks
map pixels with a quality function, executes the best grasp in the trial
model, and aggregates success rate, captured-log count and balance angle.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import constants as C
from .dataset import enumerate_subsets, read_tensor, subset_tag
from .geometry import Rng
from .graspmap import GraspMap, QualityParams, encode, select_best
from .kernels import derive_seed
from .planner import generate_candidates, reduce_candidates, simulate_grasp
from .render import ImageGrid
from .scene import Pile, generate_pile, resettle


class Predictor:
    """Produces a grasp map for a pile and target subset."""

    def predict(self, pile: Pile, target: frozenset,
                grid: ImageGrid) -> GraspMap:
        raise NotImplementedError

    def name(self) -> str:
        return type(self).__name__


class Oracle(Predictor):
    """Plans grasps with full scene knowledge and encodes them exactly."""

    def predict(self, pile, target, grid):
        candidates = generate_candidates(pile, target)
        kept = reduce_candidates(candidates, pile, target)
        return encode([(g, r.b) for g, r in kept], grid)


class NoisyOracle(Oracle):
    """Oracle with Gaussian noise added to the regression channels.

    With sigma = 0 the output is bit-identical to the plain oracle. Noise
    streams are derived from the pile seed and subset, so runs reproduce.
    """

    def __init__(self, sigma: float):
        if sigma < 0:
            raise ValueError("sigma must be non-negative")
        self.sigma = sigma

    def predict(self, pile, target, grid):
        gm = super().predict(pile, target, grid)
        if self.sigma == 0.0:
            return gm
        key = derive_seed(pile.seed, 913, *sorted(target))
        rng = Rng(key)
        n = gm.c.shape[0]

        def noise():
            return np.array([[rng.normal(0.0, self.sigma) for _ in range(n)]
                             for _ in range(n)])

        c = gm.c + noise()
        s = gm.s + noise()
        norm = np.hypot(c, s)
        norm[norm < 1e-12] = 1.0
        return GraspMap(
            c=(c / norm), s=(s / norm),
            w=np.clip(gm.w + noise(), C.W_MIN, C.W_MAX),
            u=gm.u.copy(),
            b=np.clip(gm.b + noise(), -1.0, 1.0),
        )

    def name(self):
        return f"NoisyOracle(sigma={self.sigma})"


class FilePredictor(Predictor):
    """Reads precomputed maps ``pred_<sample_id>.gmt`` from a directory."""

    def __init__(self, directory: str, pile_ids=None):
        self.directory = directory
        self._pile_ids = dict(pile_ids or {})

    def register(self, pile: Pile, pile_id: str):
        self._pile_ids[id(pile)] = pile_id

    def predict(self, pile, target, grid):
        pile_id = self._pile_ids.get(id(pile))
        if pile_id is None:
            raise KeyError("pile not registered with FilePredictor")
        sample_id = f"{pile_id}_{subset_tag(target)}"
        path = os.path.join(self.directory, f"pred_{sample_id}.gmt")
        stack = read_tensor(path).astype(np.float64)
        return GraspMap.from_stack(stack)


@dataclass
class EvalReport:
    quality: str
    trials: int = 0
    successes: int = 0
    logs_captured: int = 0
    beta_sum: float = 0.0
    no_grasp: int = 0
    failures: dict = field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def avg_logs(self) -> float:
        return self.logs_captured / self.successes if self.successes else 0.0

    @property
    def beta_avg_deg(self) -> float:
        if not self.successes:
            return 0.0
        return math.degrees(self.beta_sum / self.successes)

    def record(self, result):
        self.trials += 1
        if result is None:
            self.no_grasp += 1
            self.failures["NoGrasp"] = self.failures.get("NoGrasp", 0) + 1
            return
        if result.success:
            self.successes += 1
            self.logs_captured += len(result.captured)
            self.beta_sum += result.beta
        else:
            key = result.failure_reason.name
            self.failures[key] = self.failures.get(key, 0) + 1

    def to_dict(self) -> dict:
        return {
            "quality": self.quality,
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": round(self.success_rate, 6),
            "avg_logs": round(self.avg_logs, 6),
            "beta_avg_deg": round(self.beta_avg_deg, 6),
            "no_grasp": self.no_grasp,
            "failures": dict(sorted(self.failures.items())),
        }


def format_reports(reports) -> str:
    lines = ["quality  trials  success%  avg_logs  beta_deg",
             "-------  ------  --------  --------  --------"]
    for r in reports:
        lines.append(f"{r.quality:<7}  {r.trials:>6}  "
                     f"{100.0 * r.success_rate:>7.1f}%  {r.avg_logs:>8.2f}  "
                     f"{r.beta_avg_deg:>8.2f}")
    return "\n".join(lines)


_SUBSET_CAP_LARGE = 4


def _subset_cap(n_logs: int):
    return _SUBSET_CAP_LARGE if n_logs > 5 else None


def evaluate(predictor: Predictor, piles, qualities=("f1", "f2", "f3"),
             resolution: int = C.DEFAULT_RESOLUTION,
             q_min: float = C.Q_MIN_DEFAULT):
    """Run one trial per (pile, quality): best pixel over all target subsets."""
    grid = ImageGrid(resolution)
    reports = {q: EvalReport(quality=q) for q in qualities}
    for pile in piles:
        subsets = enumerate_subsets(pile.log_ids, _subset_cap(len(pile.logs)))
        maps = []
        for subset in subsets:
            gm = predictor.predict(pile, frozenset(subset), grid)
            maps.append((gm, len(subset)))
        for q in qualities:
            params = QualityParams(kind=q)
            best = None
            best_idx = None
            for idx, (gm, tau) in enumerate(maps):
                sel = select_best(gm, tau, params, grid, q_min)
                if sel is not None and (best is None or sel.q > best.q):
                    best, best_idx = sel, idx
            if best is None:
                reports[q].record(None)
                continue
            target = frozenset(subsets[best_idx])
            result = simulate_grasp(pile, best.grasp, target)
            reports[q].record(result)
    return [reports[q] for q in qualities]


def evaluate_samples(predictor: Predictor, root: str, manifest: dict,
                     split=None, q_min: float = C.Q_MIN_DEFAULT):
    """Per-sample evaluation: one trial per annotated (pile, subset) pair.

    Only samples whose annotation contains at least one grasp count, since
    a predictor cannot succeed where the planner found nothing.
    """
    from .scene import load_pile

    grid = ImageGrid(manifest["resolution"])
    piles = {}
    report = EvalReport(quality="samples")
    for rec in manifest["samples"]:
        if split is not None and rec["split"] != split:
            continue
        if rec["n_grasps"] == 0:
            continue
        pid = rec["pile_id"]
        if pid not in piles:
            piles[pid] = load_pile(os.path.join(root, "piles", pid,
                                                "pile.json"))
            if isinstance(predictor, FilePredictor):
                predictor.register(piles[pid], pid)
        pile = piles[pid]
        target = frozenset(rec["subset"])
        gm = predictor.predict(pile, target, grid)
        sel = select_best(gm, len(target), QualityParams(kind="f2"), grid,
                          q_min)
        if sel is None:
            report.record(None)
            continue
        report.record(simulate_grasp(pile, sel.grasp, target))
    return report


def balance_rmse(predictor: Predictor, piles,
                 resolution: int = C.DEFAULT_RESOLUTION,
                 q_min: float = C.Q_MIN_DEFAULT) -> float:
    """RMSE between the balance read at the chosen pixel and the trial's.

    Raises if no trial succeeds, since the metric is then undefined.
    """
    grid = ImageGrid(resolution)
    params = QualityParams(kind="f3")
    errors = []
    for pile in piles:
        subsets = enumerate_subsets(pile.log_ids, _subset_cap(len(pile.logs)))
        best = None
        best_subset = None
        for subset in subsets:
            gm = predictor.predict(pile, frozenset(subset), grid)
            sel = select_best(gm, len(subset), params, grid, q_min)
            if sel is not None and (best is None or sel.q > best.q):
                best, best_subset = sel, subset
        if best is None:
            continue
        result = simulate_grasp(pile, best.grasp, frozenset(best_subset))
        if result.success:
            errors.append(best.b - result.b)
    if not errors:
        raise RuntimeError("no successful trials; balance RMSE undefined")
    return float(np.sqrt(np.mean(np.square(errors))))


def empty_pile(pile: Pile, quality: str = "f2",
               resolution: int = C.DEFAULT_RESOLUTION,
               q_min: float = C.Q_MIN_DEFAULT, max_rounds: int = 12):
    """Repeatedly grasp with the oracle until the pile is empty.

    Returns the list of per-round trial results; removed logs cause the
    remaining ones to re-settle before the next round.
    """
    oracle = Oracle()
    grid = ImageGrid(resolution)
    params = QualityParams(kind=quality)
    rounds = []
    for _ in range(max_rounds):
        if not pile.logs:
            break
        subsets = enumerate_subsets(pile.log_ids, _subset_cap(len(pile.logs)))
        best = None
        best_subset = None
        for subset in subsets:
            gm = oracle.predict(pile, frozenset(subset), grid)
            sel = select_best(gm, len(subset), params, grid, q_min)
            if sel is not None and (best is None or sel.q > best.q):
                best, best_subset = sel, subset
        if best is None:
            break
        result = simulate_grasp(pile, best.grasp, frozenset(best_subset))
        rounds.append(result)
        if not result.success:
            break
        keep = [lid for lid in pile.log_ids if lid not in result.captured]
        if not keep:
            pile = replace(pile, logs=())
            break
        pile = resettle(pile, keep)
    return rounds, pile


def _mask_length_fraction(pile, target, grid, fraction, rng):
    """Zero the indicator over a random contiguous span of each target log."""
    def hole(gm):
        out = gm.u.copy()
        for lid in sorted(target):
            log = pile.log_by_id(lid)
            a, b = log.endpoints_2d
            t0 = rng.uniform(0.0, 1.0 - fraction)
            p0 = a + t0 * (b - a)
            p1 = a + (t0 + fraction) * (b - a)
            from .geometry import OrientedRect
            mid = 0.5 * (p0 + p1)
            ang = math.atan2(b[1] - a[1], b[0] - a[0])
            span = float(np.hypot(*(p1 - p0)))
            rect = OrientedRect(float(mid[0]), float(mid[1]), ang, span,
                                C.W_MAX)
            xx, yy = np.meshgrid(grid.xs(), grid.ys())
            inside = rect.contains_points(xx.ravel(), yy.ravel())
            out.ravel()[inside] = 0.0
        return out
    return hole


def perturbation_suite(n_piles: int = 10, logs_per_pile: int = 4,
                       seed: int = 0,
                       resolution: int = C.DEFAULT_RESOLUTION) -> dict:
    """Robustness probes against a clean-oracle baseline.

    Probes: annotation holes masking 40 percent of each target log's
    length, and piles regenerated with doubled log diameters.
    """
    grid = ImageGrid(resolution)
    oracle = Oracle()
    params = QualityParams(kind="f2")
    rng = Rng(derive_seed(seed, 500))

    piles = [generate_pile(logs_per_pile, derive_seed(seed, 101, i))
             for i in range(n_piles)]
    baseline = evaluate(oracle, piles, qualities=("f2",),
                        resolution=resolution)[0]

    holes = EvalReport(quality="f2")
    for pile in piles:
        subsets = enumerate_subsets(pile.log_ids, _subset_cap(len(pile.logs)))
        best = None
        best_subset = None
        for subset in subsets:
            target = frozenset(subset)
            gm = oracle.predict(pile, target, grid)
            u_holed = _mask_length_fraction(pile, target, grid, 0.4, rng)(gm)
            gm = GraspMap(c=gm.c, s=gm.s, w=gm.w, u=u_holed, b=gm.b)
            sel = select_best(gm, len(subset), params, grid)
            if sel is not None and (best is None or sel.q > best.q):
                best, best_subset = sel, subset
        if best is None:
            holes.record(None)
        else:
            holes.record(simulate_grasp(pile, best.grasp,
                                        frozenset(best_subset)))

    thick_piles = [generate_pile(logs_per_pile, derive_seed(seed, 102, i),
                                 diameter_scale=2.0)
                   for i in range(n_piles)]
    thick = evaluate(oracle, thick_piles, qualities=("f2",),
                     resolution=resolution)[0]

    return {
        "baseline": baseline.to_dict(),
        "annotation_holes": holes.to_dict(),
        "doubled_diameter": thick.to_dict(),
    }
