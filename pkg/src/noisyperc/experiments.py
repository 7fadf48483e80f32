"""Monte Carlo estimators for the dual bounds, the E_k decay, the renormalized
marginals and 1-dependence, plus the connectivity / crossing signatures and
CSV + manifest output."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .counterexample import bridging_probability
from .duality import Face, dual_labels, face_index, has_dual_cycle, has_outer_dual_cycle, to_dual
from .generators import GeneratorSpec, cli_name, generate, read_edge_list
from .lattice import EdgeSet, GeometryError, LatticeWindow, Vertex, box_region, edge_endpoints
from .montecarlo import covariance_se, mean_se, run_replicates
from .percolation import (BernoulliParams, add_bernoulli, close_connection_boxes, closely_connected,
                          clusters, coarse_window, local_connected, renormalize, thin_bernoulli)

EXPERIMENTS = ("dual_check", "dual_pairwise", "dual_cluster_size", "ek_decay", "marginal_an",
               "one_dependence", "halfplane", "pc_thinning", "counterexample", "connectivity")
CSV_HEADER = ["experiment", "generator", "epsilon", "param_name", "param_value", "estimate",
              "stderr", "bound", "replicates", "seed"]
STEPS = {"east": (1, 0), "north": (0, 1)}


@dataclass
class ExperimentConfig:
    experiment: str
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    width: int = 64
    height: int = 64
    boundary_mode: str = "open_box"
    epsilon: float = 0.3
    q: float | None = None
    scales: tuple = ()
    replicates: int = 1000
    seed: int = 0
    threads: int = 1
    orientation: str | None = None  # 'east' or 'north'; each experiment has its own default
    x_file: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        self.scales = tuple(self.scales)
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError(f"scales must be strictly increasing, got {self.scales}")
        if self.orientation is not None and self.orientation not in STEPS:
            raise ValueError(f"orientation must be 'east' or 'north', got {self.orientation!r}")

    @property
    def window(self) -> LatticeWindow:
        return LatticeWindow(self.width, self.height, self.boundary_mode)

    def step(self, default: str) -> tuple[int, int]:
        return STEPS[self.orientation or default]

    def build_x(self) -> EdgeSet:
        if self.x_file:
            return read_edge_list(self.x_file, self.window)
        return generate(self.generator, self.window)

    def params(self, r: int, q: float | None = None) -> BernoulliParams:
        return BernoulliParams(epsilon=self.epsilon, q=1.0 if q is None else q,
                               seed=self.seed, stream_id=r)

    def sample_y(self, X: EdgeSet, r: int) -> EdgeSet:
        return add_bernoulli(X, self.params(r))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["generator"] = asdict(self.generator)
        d["scales"] = list(self.scales)
        return d


@dataclass
class ResultRecord:
    experiment: str
    generator: str
    epsilon: float
    param_name: str
    param_value: float
    estimate: float
    stderr: float
    bound: float | None = None
    replicates: int = 1
    seed: int = 0


def _record(config: ExperimentConfig, name: str, value, estimate, se, bound=None,
            experiment: str | None = None) -> ResultRecord:
    gen = "x-file" if config.x_file else cli_name(config.generator.kind)
    return ResultRecord(experiment or config.experiment, gen, float(config.epsilon), name,
                        float(value), float(estimate), float(se),
                        None if bound is None else float(bound), config.replicates, config.seed)


def _replicates(config: ExperimentConfig, fn) -> np.ndarray:
    return run_replicates(fn, config.replicates, config.threads)


def dual_pairwise_bound(epsilon: float, distance: int) -> float:
    return (1.0 - epsilon) ** distance


def dual_cluster_size_bound(epsilon: float) -> float:
    """1 + 4 * sum_k k (1 - eps)^k in closed form."""
    if epsilon <= 0:
        return math.inf
    return 1.0 + 4.0 * (1.0 - epsilon) / epsilon ** 2


def _center_face(window: LatticeWindow) -> Face:
    return Face((window.width - 1) // 2, (window.height - 1) // 2)


def estimate_dual_pairwise(config: ExperimentConfig, X: EdgeSet | None = None) -> list[ResultRecord]:
    """P(x <-> y in Y*) for dual vertices at each L1 distance, placed around the centre face."""
    window = config.window
    X = config.build_x() if X is None else X
    dx, dy = config.step("east")
    c = _center_face(window)
    pairs = []
    for k in config.scales:
        k = int(k)
        a = Face(c.i - (k // 2) * dx, c.j - (k // 2) * dy)
        b = Face(a.i + k * dx, a.j + k * dy)
        try:
            pairs.append((face_index(window, a), face_index(window, b)))
        except GeometryError:
            raise GeometryError(f"dual distance {k} does not fit the window") from None
    ia = np.array([p[0] for p in pairs], dtype=np.int64)
    ib = np.array([p[1] for p in pairs], dtype=np.int64)

    def one(r):
        labels, _ = dual_labels(to_dual(config.sample_y(X, r)))
        return labels[ia] == labels[ib]

    mean, se = mean_se(_replicates(config, one).reshape(config.replicates, len(pairs)))
    return [_record(config, "distance", k, m, s, dual_pairwise_bound(config.epsilon, k))
            for k, m, s in zip(config.scales, mean, se)]


def estimate_dual_cluster_size(config: ExperimentConfig, X: EdgeSet | None = None) -> ResultRecord:
    """Mean size of the Y*-component of the central face."""
    window = config.window
    X = config.build_x() if X is None else X
    c = _center_face(window)
    margin = min(c.i, c.j, window.width - 2 - c.i, window.height - 2 - c.j)
    if margin < 16:
        raise GeometryError("the measured face must sit at least 16 steps from the window boundary")
    fi = face_index(window, c)

    def one(r):
        labels, sizes = dual_labels(to_dual(config.sample_y(X, r)))
        return sizes[labels[fi]]

    mean, se = mean_se(_replicates(config, one).reshape(-1, 1))
    return _record(config, "face_index", fi, mean[0], se[0], dual_cluster_size_bound(config.epsilon))


@dataclass
class DecayFit:
    slope: float
    intercept: float
    r2: float
    points: list  # (k, log estimate) for estimates > 0
    excluded: list = field(default_factory=list)  # k with a zero estimate
    records: list = field(default_factory=list)

    @property
    def rate(self) -> float:
        """The decay constant c in P(E_k) <= exp(-c k), read off as minus the slope."""
        return -self.slope


def fit_decay(ks, estimates) -> DecayFit:
    ks = np.asarray(ks, dtype=np.float64)
    est = np.asarray(estimates, dtype=np.float64)
    keep = est > 0
    pts = [(float(k), float(np.log(p))) for k, p in zip(ks[keep], est[keep])]
    excluded = [float(k) for k in ks[~keep]]
    if len(pts) < 2:
        return DecayFit(math.nan, math.nan, math.nan, pts, excluded)
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), r2, pts, excluded)


def ek_samples(config: ExperimentConfig, X: EdgeSet | None = None) -> np.ndarray:
    """Indicator matrix (replicates x scales) of E_k for the central edge."""
    window = config.window
    X = config.build_x() if X is None else X
    x = Vertex(window.width // 2, window.height // 2)
    dx, dy = config.step("north")
    y = Vertex(x.x + dx, x.y + dy)
    boxes = [box_region(window, x, int(k)) for k in config.scales]
    for k, b in zip(config.scales, boxes):
        if b.clipped or y not in b:
            raise GeometryError(f"box of side {k} around {tuple(x)} does not fit the window")

    def one(r):
        Y = config.sample_y(X, r)
        return [not local_connected(Y, x, y, b) for b in boxes]

    return _replicates(config, one).reshape(config.replicates, len(boxes))


def estimate_ek_decay(config: ExperimentConfig, X: EdgeSet | None = None) -> DecayFit:
    mean, se = mean_se(ek_samples(config, X))
    fit = fit_decay(config.scales, mean)
    fit.records = [_record(config, "k", k, m, s) for k, m, s in zip(config.scales, mean, se)]
    return fit


def an_samples(config: ExperimentConfig, X: EdgeSet | None = None) -> np.ndarray:
    """Indicator matrix (replicates x scales) of A_n for a central coarse edge at each n."""
    window = config.window
    X = config.build_x() if X is None else X
    dx, dy = config.step("north")
    ends = []
    for n in config.scales:
        n = int(n)
        cw, ch = window.width / n, window.height / n
        a = Vertex(int((cw - 1 - dx) // 2), int((ch - 1 - dy) // 2))
        b = Vertex(a.x + dx, a.y + dy)
        _, _, ba, bb = close_connection_boxes(window, a, b, n)
        if ba.clipped or bb.clipped:
            raise GeometryError(f"boxes for scale {n} do not fit the window")
        ends.append((a, b, n))

    def one(r):
        Y = config.sample_y(X, r)
        return [closely_connected(Y, a, b, n) for a, b, n in ends]

    return _replicates(config, one).reshape(config.replicates, len(ends))


def estimate_marginal_an(config: ExperimentConfig, X: EdgeSet | None = None,
                         decay: DecayFit | None = None) -> list[ResultRecord]:
    """P(A_n) per n; with a decay fit attached, the bound 1 - n exp(-c n) is reported."""
    mean, se = mean_se(an_samples(config, X))
    out = []
    for n, m, s in zip(config.scales, mean, se):
        bound = None
        if decay is not None and np.isfinite(decay.rate):
            bound = 1.0 - n * math.exp(-decay.rate * n)
        out.append(_record(config, "n", n, m, s, bound))
    return out


@dataclass
class DependenceReport:
    scale: int
    edges: list  # coarse edges as ((x, y), (x, y))
    cov: np.ndarray
    se: np.ndarray
    vertex_disjoint: np.ndarray  # pairs sharing no coarse endpoint
    support_disjoint: np.ndarray  # pairs whose fine box unions share no edge
    records: list = field(default_factory=list)

    def tested_pairs(self) -> list[tuple[int, int]]:
        m = len(self.edges)
        return [(a, b) for a in range(m) for b in range(a + 1, m) if self.vertex_disjoint[a, b]]


def check_one_dependence(config: ExperimentConfig, X: EdgeSet | None = None) -> DependenceReport:
    """Covariances of renormalized edge indicators around the central coarse vertex.

    Probes are the coarse edges with both endpoints within coarse distance 1 of
    the centre; pairs with no shared endpoint are the ones 1-dependence constrains.
    """
    window = config.window
    X = config.build_x() if X is None else X
    n = int(config.scales[0]) if config.scales else 8
    coarse, valid = coarse_window(window, n)
    if coarse.width < 5 or coarse.height < 5:
        raise GeometryError(f"coarse lattice {coarse.width}x{coarse.height} smaller than 5x5")
    cu, cv = edge_endpoints(coarse)
    c = Vertex(coarse.width // 2, coarse.height // 2)
    probes = []
    for e in np.flatnonzero(valid):
        a, b = coarse.vertex_at(int(cu[e])), coarse.vertex_at(int(cv[e]))
        if all(max(abs(p.x - c.x), abs(p.y - c.y)) <= 1 for p in (a, b)):
            probes.append((int(e), a, b))
    idx = np.array([p[0] for p in probes], dtype=np.int64)

    def one(r):
        return renormalize(config.sample_y(X, r), n).bits[idx]

    samples = _replicates(config, one).reshape(config.replicates, len(probes)).astype(np.float64)
    m = len(probes)
    cov = np.zeros((m, m))
    se = np.zeros((m, m))
    vd = np.zeros((m, m), dtype=bool)
    sd = np.zeros((m, m), dtype=bool)
    supports = []
    for _, a, b in probes:
        mask = np.zeros((window.height, window.width), dtype=bool)
        for p in (a, b):
            bx = box_region(window, Vertex(n * p.x, n * p.y), n)
            mask[bx.y0:bx.y1 + 1, bx.x0:bx.x1 + 1] = True
        fu, fv = edge_endpoints(window)
        flat = mask.ravel()
        supports.append(flat[fu] & flat[fv])
    for i in range(m):
        for j in range(m):
            cov[i, j], se[i, j] = covariance_se(samples[:, i], samples[:, j])
            vd[i, j] = not ({probes[i][1], probes[i][2]} & {probes[j][1], probes[j][2]})
            sd[i, j] = not np.any(supports[i] & supports[j])
    report = DependenceReport(n, [(tuple(a), tuple(b)) for _, a, b in probes], cov, se, vd, sd)
    report.records = [_record(config, "pair", k, cov[a, b], se[a, b], 0.0)
                      for k, (a, b) in enumerate(report.tested_pairs())]
    return report


def run_halfplane(config: ExperimentConfig, X: EdgeSet | None = None) -> ResultRecord:
    """Fraction of replicates with a left-right crossing cluster in the half-plane window."""
    if config.boundary_mode != "half_plane":
        raise ValueError("halfplane experiment needs boundary_mode='half_plane'")
    X = config.build_x() if X is None else X
    samples = _replicates(config, lambda r: clusters(config.sample_y(X, r)).has_crossing("x"))
    mean, se = mean_se(samples.reshape(-1, 1))
    return _record(config, "height", config.height, mean[0], se[0])


def q_grid(config: ExperimentConfig) -> list[float]:
    qs = list(config.scales) if config.scales else [config.q if config.q is not None else 1.0]
    for q in qs:
        if not 0.0 < q <= 1.0:
            raise ValueError(f"q values must lie in (0, 1], got {q}")
    return [float(q) for q in qs]


def pc_thinning_samples(config: ExperimentConfig, X: EdgeSet | None = None) -> np.ndarray:
    """Crossing indicators (replicates x q grid); all q share each replicate's uniforms."""
    X = config.build_x() if X is None else X
    qs = q_grid(config)

    def one(r):
        Y = config.sample_y(X, r)
        return [clusters(thin_bernoulli(Y, config.params(r, q))).has_crossing("x") for q in qs]

    return _replicates(config, one).reshape(config.replicates, len(qs))


def run_pc_thinning(config: ExperimentConfig, X: EdgeSet | None = None) -> list[ResultRecord]:
    mean, se = mean_se(pc_thinning_samples(config, X))
    return [_record(config, "q", q, m, s) for q, m, s in zip(q_grid(config), mean, se)]


def run_connectivity(config: ExperimentConfig, X: EdgeSet | None = None) -> ResultRecord:
    """Fraction of replicates where the central (w/2 x h/2) sub-window lies in one cluster of Y."""
    window = config.window
    X = config.build_x() if X is None else X
    w, h = window.width, window.height
    x0, y0 = w // 4, h // 4
    vid = np.arange(window.n_vertices).reshape(h, w)[y0:y0 + h // 2, x0:x0 + w // 2].ravel()

    def one(r):
        labels = clusters(config.sample_y(X, r)).labels[vid]
        return bool(np.all(labels == labels[0]))

    mean, se = mean_se(_replicates(config, one).reshape(-1, 1))
    return _record(config, "subwindow", w // 2, mean[0], se[0])


def run_dual_check(config: ExperimentConfig) -> list[ResultRecord]:
    """Fraction of generator seeds whose dual has a cycle (interior, then with the outer face)."""
    window = config.window
    inner, outer = [], []
    for i in range(config.replicates):
        spec = GeneratorSpec(config.generator.kind, config.generator.spacing, config.seed + i)
        X = generate(spec, window)
        inner.append(has_dual_cycle(to_dual(X)))
        outer.append(has_outer_dual_cycle(X))
    m, s = mean_se(np.array([inner, outer], dtype=float).T)
    return [_record(config, "interior_cycle", 0, m[0], s[0], 0.0),
            _record(config, "outer_face_cycle", 1, m[1], s[1])]


def run_counterexample(config: ExperimentConfig) -> list[ResultRecord]:
    out = []
    for n in config.scales:
        b = bridging_probability(int(n), config.epsilon, config.replicates, config.seed,
                                 threads=config.threads)
        out.append(_record(config, "n", n, b.estimate, b.stderr, experiment="counterexample"))
        out.append(_record(config, "n_thread", n, b.estimate_thread, b.stderr_thread,
                           experiment="counterexample"))
    return out


def run_experiment(config: ExperimentConfig) -> list[ResultRecord]:
    """Dispatch on ``config.experiment`` and return the CSV records."""
    e = config.experiment
    if e == "dual_check":
        return run_dual_check(config)
    if e == "dual_pairwise":
        return estimate_dual_pairwise(config)
    if e == "dual_cluster_size":
        return [estimate_dual_cluster_size(config)]
    if e == "ek_decay":
        return estimate_ek_decay(config).records
    if e == "marginal_an":
        X = config.build_x()
        return estimate_marginal_an(config, X, decay=estimate_ek_decay(config, X))
    if e == "one_dependence":
        return check_one_dependence(config).records
    if e == "halfplane":
        return [run_halfplane(config)]
    if e == "pc_thinning":
        return run_pc_thinning(config)
    if e == "connectivity":
        return [run_connectivity(config)]
    return run_counterexample(config)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(records: list[ResultRecord], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([_fmt(getattr(rec, name)) for name in CSV_HEADER])


def write_csv(records: list[ResultRecord], path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            write_rows(records, fh)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def parse_results(path) -> list[ResultRecord]:
    types = {f.name: f.type for f in fields(ResultRecord)}
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            vals = {}
            for name, raw in row.items():
                t = types[name]
                if name == "bound":
                    vals[name] = float(raw) if raw else None
                elif t in ("int", int):
                    vals[name] = int(raw)
                elif t in ("float", float):
                    vals[name] = float(raw)
                else:
                    vals[name] = raw
            out.append(ResultRecord(**vals))
    return out


PLOT_TEMPLATE = '''"""Plot {csv_name}: estimate vs parameter, with the analytic bound where present."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(list)
with open({csv_name!r}) as fh:
    for row in csv.DictReader(fh):
        series[(row["experiment"], row["param_name"])].append(row)

fig, ax = plt.subplots()
for (exp, param), rows in series.items():
    x = [float(r["param_value"]) for r in rows]
    y = [float(r["estimate"]) for r in rows]
    e = [float(r["stderr"]) for r in rows]
    ax.errorbar(x, y, yerr=e, marker="o", label=f"{{exp}} ({{param}})")
    b = [(xi, float(r["bound"])) for xi, r in zip(x, rows) if r["bound"]]
    if b:
        ax.plot(*zip(*b), "k--", label=f"{{exp}} bound")
ax.set_xlabel("parameter")
ax.set_ylabel("estimate")
ax.legend()
fig.savefig({png_name!r})
'''


def emit_results(records: list[ResultRecord], path, config: ExperimentConfig | None = None,
                 plot: bool = True, extra: dict | None = None) -> dict[str, Path]:
    """Write the CSV, a ``.manifest.json`` sibling and (optionally) a ``.plot.py`` sibling."""
    path = Path(path)
    write_csv(records, path)
    manifest = {
        "tool": "noisyperc",
        "version": __version__,
        "csv": path.name,
        "records": len(records),
        "config": config.to_dict() if config is not None else None,
        "seed": config.seed if config is not None else None,
    }
    if extra:
        manifest.update(extra)
    out = {"csv": path, "manifest": path.with_name(path.stem + ".manifest.json")}
    try:
        out["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        if plot:
            out["plot"] = path.with_name(path.stem + ".plot.py")
            out["plot"].write_text(PLOT_TEMPLATE.format(csv_name=path.name,
                                                        png_name=path.stem + ".png"))
    except OSError as exc:
        raise OSError(f"cannot write run manifest next to {path}: {exc}") from exc
    return out
