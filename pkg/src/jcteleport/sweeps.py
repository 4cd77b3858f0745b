"""Parameter sweeps over time grids, figure presets and file emitters."""
from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fisher, linalg, teleport
from .channel import ChannelParams, alpha_arrays
from .errors import JCError, NumericError, OutputError, ValidationError

QUANTITIES = ("fidelity_closed", "fidelity_overlap", "qfi_theta")
DEFAULT_TAU = (0.0, 20.0, 2000)


@dataclass(frozen=True)
class SweepSpec:
    """One family of curves: a tau grid crossed with lists of ``nbar`` and ``delta``."""

    protocol: str = "ftp"
    quantity: str = "fidelity_closed"
    n: int = 2
    nbar: tuple = (2.0,)
    delta: tuple = (0.0,)
    tau_start: float = DEFAULT_TAU[0]
    tau_stop: float = DEFAULT_TAU[1]
    tau_count: int = DEFAULT_TAU[2]
    theta: float = math.pi / 4
    phi: float = 0.0
    construction: str = "closed"
    mode: str = "hermitian"
    engine: str = "matrix"
    derivative: str = "analytic"
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "nbar", tuple(float(x) for x in np.atleast_1d(self.nbar)))
        object.__setattr__(self, "delta", tuple(float(x) for x in np.atleast_1d(self.delta)))
        if self.protocol not in teleport.PROTOCOLS:
            raise ValidationError(f"protocol must be one of {teleport.PROTOCOLS}")
        if self.quantity not in QUANTITIES:
            raise ValidationError(f"quantity must be one of {QUANTITIES}")
        if not self.nbar or not self.delta:
            raise ValidationError("nbar and delta lists must be non-empty")
        if int(self.tau_count) != self.tau_count or self.tau_count < 2:
            raise ValidationError(f"tau_count must be an integer >= 2, got {self.tau_count}")
        if not self.tau_start < self.tau_stop:
            raise ValidationError(f"tau_start ({self.tau_start}) must be < tau_stop ({self.tau_stop})")
        if self.tau_start < 0:
            raise ValidationError("tau_start must be >= 0")
        if self.construction not in teleport.CONSTRUCTIONS:
            raise ValidationError(f"construction must be one of {teleport.CONSTRUCTIONS}")
        if self.construction == "oracle" and self.protocol == "stp":
            raise ValidationError("the two-copy protocol has no channel oracle")
        if self.mode not in teleport.CHANNEL_MODES:
            raise ValidationError(f"mode must be one of {teleport.CHANNEL_MODES}")
        if self.engine not in fisher.ENGINES:
            raise ValidationError(f"engine must be one of {fisher.ENGINES}")
        if self.derivative not in fisher.DERIVATIVES:
            raise ValidationError(f"derivative must be one of {fisher.DERIVATIVES}")
        # validate scalar knobs through the domain types
        teleport.InputState(self.theta, self.phi)
        for nbar, delta in self.series():
            ChannelParams(self.n, nbar, delta, self.tau_start)

    def tau_grid(self) -> np.ndarray:
        return np.linspace(self.tau_start, self.tau_stop, int(self.tau_count))

    def series(self):
        return list(itertools.product(self.nbar, self.delta))

    def series_labels(self):
        labels = []
        for nbar, delta in self.series():
            parts = []
            if len(self.nbar) > 1 or len(self.delta) == 1:
                parts.append(f"nbar={nbar:g}")
            if len(self.delta) > 1:
                parts.append(f"delta={delta:g}")
            labels.append(",".join(parts))
        return labels


@dataclass
class SweepResult:
    columns: list
    rows: np.ndarray
    series: list = field(default_factory=list)
    kinds: list = field(default_factory=list)
    comments: list = field(default_factory=list)
    quantity: str = ""

    def column(self, name) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def series_columns(self, kind):
        return [c for c, k in zip(self.columns, self.kinds) if k == kind]


def _oracle_fidelities(spec: SweepSpec, nbar, delta, tau):
    s = teleport.InputState(spec.theta, spec.phi)
    psi = teleport.input_state_vector(s)
    raw = np.empty(tau.shape)
    norm = np.empty(tau.shape)
    for i, t in enumerate(tau):
        rho = teleport.ftp_oracle_state(ChannelParams(spec.n, nbar, delta, t), s, spec.mode)
        tr = np.trace(rho).real
        f = np.vdot(psi, rho @ psi).real
        raw[i] = f
        norm[i] = f / tr
    return raw, norm


def _evaluate_series(spec: SweepSpec, nbar, delta, tau):
    if spec.quantity == "qfi_theta":
        q = fisher.teleported_qfi_grid(
            spec.protocol, spec.n, nbar, delta, tau, spec.theta, spec.phi,
            spec.engine, spec.derivative, "theta", spec.normalized,
        )
        return (q,)
    if spec.construction == "oracle":
        return _oracle_fidelities(spec, nbar, delta, tau)
    alphas = alpha_arrays(spec.n, nbar, delta, tau)[:5]
    if spec.protocol == "ftp":
        raw = teleport.fidelity_closed_ftp_arrays(*alphas, spec.theta)
    else:
        raw = teleport.fidelity_closed_stp_arrays(*alphas, spec.theta)
    rho = teleport.raw_bob_matrix(spec.protocol, alphas, spec.theta, spec.phi)
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    if np.any(tr <= linalg.TRACE_FLOOR):
        raise NumericError(f"raw trace {np.min(tr):.3e} below floor")
    norm = teleport.overlap_fidelity_arrays(rho / tr[:, None, None], spec.theta, spec.phi)
    return raw, norm


def _locate_failure(spec, nbar, delta, tau, label, err):
    for t in tau:
        try:
            out = _evaluate_series(spec, nbar, delta, np.array([t]))
        except JCError as inner:
            return type(err)(f"sweep failed at tau={float(t)!r}, series {label}: {inner}")
        if not all(np.all(np.isfinite(col)) for col in out):
            return NumericError(f"non-finite value at tau={float(t)!r}, series {label}")
    return type(err)(f"sweep failed for series {label}: {err}")


def _run_one(spec, nbar, delta, tau, label):
    try:
        out = _evaluate_series(spec, nbar, delta, tau)
    except JCError as err:
        raise _locate_failure(spec, nbar, delta, tau, label, err) from err
    for col in out:
        bad = ~np.isfinite(col)
        if np.any(bad):
            t = tau[np.argmax(bad)]
            raise NumericError(f"non-finite value at tau={float(t)!r}, series {label}")
    return out


def run_sweep(spec: SweepSpec, workers: int = 1, comments=()) -> SweepResult:
    """Evaluate ``spec``; one row per tau, one column per (series, kind)."""
    tau = spec.tau_grid()
    labels = spec.series_labels()
    jobs = list(zip(spec.series(), labels))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, spec, nb, de, tau, lab) for (nb, de), lab in jobs]
            outputs = [f.result() for f in futures]
    else:
        outputs = [_run_one(spec, nb, de, tau, lab) for (nb, de), lab in jobs]

    kinds_per_series = ("qfi",) if spec.quantity == "qfi_theta" else ("raw", "norm")
    columns = ["tau"]
    kinds = ["tau"]
    data = [tau]
    for lab, out in zip(labels, outputs):
        for kind, col in zip(kinds_per_series, out):
            columns.append(f"{kind}[{lab}]")
            kinds.append(kind)
            data.append(np.asarray(col, dtype=float))
    info = [
        f"protocol={spec.protocol} quantity={spec.quantity} n={spec.n} "
        f"theta={spec.theta!r} phi={spec.phi!r}",
        f"tau window [{spec.tau_start!r}, {spec.tau_stop!r}] with {spec.tau_count} points",
    ]
    return SweepResult(
        columns=columns,
        rows=np.column_stack(data),
        series=labels,
        kinds=kinds,
        comments=list(comments) + info,
        quantity=spec.quantity,
    )


# ---- CSV and plot script ----

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(result: SweepResult, path) -> Path:
    """Write ``result`` as UTF-8 CSV (LF endings, 17 significant digits).

    Lines starting with ``#`` before the header carry the run description.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            for line in result.comments:
                fh.write(f"# {line}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(result.columns)
            for row in result.rows:
                writer.writerow([_fmt(x) for x in row])
    except OSError as err:
        raise OutputError(f"cannot write CSV to {path}: {err}") from err
    return path


def read_csv(path):
    """Inverse of :func:`emit_csv`: returns ``(columns, rows)``."""
    path = Path(path)
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
    except OSError as err:
        raise OutputError(f"cannot read CSV {path}: {err}") from err
    reader = csv.reader(lines)
    columns = next(reader)
    rows = [[float(x) for x in r] for r in reader]
    return columns, np.array(rows, dtype=float).reshape(len(rows), len(columns))


_DASH_STYLES = {1: "1", 2: "2", 3: "3"}
_COLORS = ("gray", "blue", "red", "black")
_QUANTITY_LABELS = {
    "fidelity_closed": "fidelity",
    "fidelity_overlap": "fidelity",
    "qfi_theta": "QFI(theta)",
}


def emit_plot_script(result: SweepResult, path, csv_path, kind=None) -> Path:
    """Write a gnuplot script drawing one curve per series from ``csv_path``.

    Up to three series are told apart by dash type (solid, dash, dot);
    four or more by colour (gray, blue, red, black).
    """
    if result.rows.shape[0] == 0:
        raise ValidationError("cannot plot an empty result")
    path = Path(path)
    csv_path = Path(csv_path)
    if kind is None:
        kind = "qfi" if result.quantity == "qfi_theta" else "norm"
    cols = result.series_columns(kind)
    if not cols:
        raise ValidationError(f"result has no {kind!r} columns")
    try:
        rel = csv_path.resolve().relative_to(path.resolve().parent)
    except ValueError:
        rel = csv_path.resolve()
    lines = [
        "# gnuplot script",
        "set datafile separator ','",
        "set xlabel 'tau'",
        f"set ylabel '{_QUANTITY_LABELS.get(result.quantity, result.quantity)}'",
        "set key top right",
        "set key autotitle columnhead",
        f"data = '{rel.as_posix()}'",
    ]
    plots = []
    for i, name in enumerate(cols):
        idx = result.columns.index(name) + 1
        title = name[name.index("[") + 1:-1] if "[" in name else name
        if len(cols) <= 3:
            style = f"dt {i + 1} lc rgb 'black'"
        else:
            style = f"dt 1 lc rgb '{_COLORS[i % len(_COLORS)]}'"
        plots.append(f"data using 1:{idx} with lines {style} title '{title}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as err:
        raise OutputError(f"cannot write plot script to {path}: {err}") from err
    return path


# ---- figure presets ----

@dataclass(frozen=True)
class FigurePreset:
    id: str
    spec: SweepSpec
    description: str


_PI = math.pi
_THETA_ABC = {"a": _PI / 4, "b": _PI / 2, "c": 0.0}
_NBAR_SERIES = (2.0, 4.0, 6.0)
_DELTA_SERIES = (0.1, 0.3, 0.5)


def _presets():
    out = {}

    def add(fid, description, **kw):
        out[fid] = FigurePreset(fid, SweepSpec(**kw), description)

    groups = [
        (1, "ftp", "fidelity_closed", "nbar"),
        (2, "ftp", "fidelity_closed", "delta"),
        (3, "ftp", "qfi_theta", "nbar"),
        (4, "ftp", "qfi_theta", "delta"),
        (5, "stp", "fidelity_closed", "nbar"),
        (6, "stp", "fidelity_closed", "delta"),
        (7, "stp", "qfi_theta", "nbar"),
        (8, "stp", "qfi_theta", "delta"),
    ]
    for num, protocol, quantity, varying in groups:
        for panel, theta in _THETA_ABC.items():
            if varying == "nbar":
                kw = dict(nbar=_NBAR_SERIES, delta=(0.0,))
                cap = "resonance delta=0, n=2, nbar=2,4,6"
            else:
                kw = dict(nbar=(4.0,), delta=_DELTA_SERIES)
                cap = "non-resonance delta=0.1,0.3,0.5, n=2, nbar=4"
            add(
                f"fig{num}{panel}", f"{protocol} {quantity}, {cap}, theta={theta:.6g}",
                protocol=protocol, quantity=quantity, n=2, theta=theta, phi=0.0, **kw,
            )

    big_nbar = (1000.0, 800.0, 400.0, 100.0)
    for panel, protocol, theta in (("a", "ftp", _PI / 2), ("b", "ftp", 0.0), ("c", "stp", _PI / 2)):
        add(
            f"fig9{panel}", f"{protocol} fidelity, delta=0, n=2, nbar=1000,800,400,100",
            protocol=protocol, quantity="fidelity_closed", n=2, nbar=big_nbar,
            delta=(0.0,), theta=theta, phi=0.0,
        )
    small_delta = (0.001, 0.005, 0.02, 0.05)
    for panel, protocol, theta in (("a", "ftp", _PI / 4), ("b", "ftp", 0.0), ("c", "stp", _PI / 4)):
        add(
            f"fig10{panel}", f"{protocol} fidelity, n=2, nbar=4, delta=0.001,0.005,0.02,0.05",
            protocol=protocol, quantity="fidelity_closed", n=2, nbar=(4.0,),
            delta=small_delta, theta=theta, phi=0.0,
        )
    return out


PRESETS = _presets()


def preset(fid: str, **overrides) -> FigurePreset:
    try:
        p = PRESETS[fid]
    except KeyError:
        raise ValidationError(f"unknown figure {fid!r}; choose from {sorted(PRESETS)}") from None
    if overrides:
        p = replace(p, spec=replace(p.spec, **overrides))
    return p


def run_figure(fid: str, out_dir, workers: int = 1, **overrides):
    """Run preset ``fid`` and write ``<fid>.csv`` and ``<fid>.gp`` into ``out_dir``."""
    p = preset(fid, **overrides)
    result = run_sweep(p.spec, workers=workers, comments=[f"figure {fid}: {p.description}"])
    out_dir = Path(out_dir)
    csv_path = emit_csv(result, out_dir / f"{fid}.csv")
    script = emit_plot_script(result, out_dir / f"{fid}.gp", csv_path)
    return result, csv_path, script
