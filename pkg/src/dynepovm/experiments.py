"""Declarative experiment configs, presets and the run/report pipeline."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, field, fields
from importlib import metadata
from pathlib import Path

import numpy as np

from . import svg
from .analysis import PAIRS, pair_stats, scheme_stats
from .dynamics import Physics, Scheme, SchemeSpec
from .hilbert import CONVENTIONS, CavityState, fock
from .integrate import EnsembleConfig, IntegratorConfig
from .noise import NoiseParams, generate_complex_path
from .phasespace import PhaseGrid, husimi_q, position_density, smeared_marginal, wigner
from .povm import reconstruct_ensemble

SUMMARY_COLUMNS = ("s", "series", "quantity", "t", "mean", "std", "stderr", "n")
KINDS = ("povm", "phasespace", "noise")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicsConfig:
    omega_a: float = 1.0
    omega_c: float = 1.0
    g: float = 1.0
    kappa: float = 1.0


@dataclass(frozen=True)
class NoiseConfig:
    gamma_ou: float = 15.0
    dt: float = 1.0 / 150
    seed: int = 0


@dataclass(frozen=True)
class StateConfig:
    """Cavity state for phase-space runs: vacuum, fock or squeezed."""

    kind: str = "fock"
    n: int = 4
    s: float = 0.0
    n_fock: int | None = None


@dataclass(frozen=True)
class GridConfig:
    q_min: float = -6.0
    q_max: float = 6.0
    p_min: float = -6.0
    p_max: float = 6.0
    n_q: int = 201
    n_p: int = 201


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "custom"
    kind: str = "povm"
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    squeezings: tuple = (0.0,)
    n_fock: int | None = None
    schemes: tuple = ("het_x", "het_y", "hom_x", "hom_y")
    M: int = 200
    t_end: float = 10.0
    record_stride: int | None = None
    convention: str = "appendix"
    workers: int = 1
    save_trajectories: int = 5
    state: StateConfig = field(default_factory=StateConfig)
    grid: GridConfig = field(default_factory=GridConfig)

    # -- construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        nested = {"physics": PhysicsConfig, "noise": NoiseConfig, "state": StateConfig, "grid": GridConfig}
        kw = {}
        for k, v in d.items():
            if k in nested:
                sub = nested[k]
                bad = set(v) - {f.name for f in fields(sub)}
                if bad:
                    raise ConfigError(f"unknown keys in {k}: {sorted(bad)}")
                kw[k] = sub(**v)
            elif k in ("squeezings", "schemes"):
                kw[k] = tuple(v)
            else:
                kw[k] = v
        try:
            cfg = cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["squeezings"] = list(self.squeezings)
        d["schemes"] = list(self.schemes)
        return d

    def replace(self, **kw) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(kw)
        return ExperimentConfig.from_dict(d)

    # -- derived objects ----------------------------------------------------
    def physics_obj(self) -> Physics:
        return Physics(**asdict(self.physics))

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.noise.dt, t_end=self.t_end, record_stride=self.record_stride)

    def noise_params(self) -> NoiseParams:
        return NoiseParams(self.physics.kappa, self.noise.gamma_ou, self.noise.dt, self.t_end, self.noise.seed)

    def ensemble(self) -> EnsembleConfig:
        return EnsembleConfig(M=self.M, seed=self.noise.seed, workers=self.workers)

    def cavity(self, s: float) -> CavityState:
        if s == 0:
            return CavityState(n_fock=self.n_fock)
        return CavityState.squeezed(s, self.n_fock)

    def scheme_spec(self, name: str) -> SchemeSpec:
        return SchemeSpec(Scheme(name), self.physics_obj(), self.convention)

    def phase_grid(self) -> PhaseGrid:
        return PhaseGrid(**asdict(self.grid))

    def phase_state(self) -> np.ndarray:
        st = self.state
        if st.kind == "vacuum":
            return fock(0, st.n_fock or 2)
        if st.kind == "fock":
            return fock(st.n, st.n_fock or st.n + 2)
        if st.kind == "squeezed":
            return CavityState.squeezed(st.s, st.n_fock).vector()
        raise ConfigError(f"unknown phase-space state kind {st.kind!r}")

    def validate(self) -> None:
        """Check every downstream precondition before anything runs."""
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}")
        try:
            if self.kind == "phasespace":
                self.phase_grid()
                self.phase_state()
                return
            self.noise_params()
            integ = self.integrator()
            if self.convention not in CONVENTIONS:
                raise ConfigError(f"unknown convention {self.convention!r}")
            if self.kind == "noise":
                return
            if not self.schemes:
                raise ConfigError("no schemes given")
            self.ensemble()
            for s in self.squeezings:
                self.cavity(s).vector(self.convention)
            for name in self.schemes:
                spec = self.scheme_spec(name)
                if spec.kind in (Scheme.GKSL, Scheme.ADIABATIC_ME, Scheme.HIERARCHY):
                    raise ConfigError(f"scheme {name} does not induce a record-dependent effect")
                integ.check_resolution(spec, self.noise.gamma_ou)
                if spec.kind.qubit_only and self.physics.kappa <= 0:
                    raise ConfigError("adiabatic schemes need kappa > 0")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


PRESETS = {
    "fig1": ExperimentConfig(name="fig1", kind="phasespace", state=StateConfig("fock", 4)),
    "fig3": ExperimentConfig(name="fig3", squeezings=(0.0, 0.1, 0.25)),
    "fig4": ExperimentConfig(name="fig4", squeezings=(0.0, 0.1, 0.25)),
    "fig5": ExperimentConfig(name="fig5", physics=PhysicsConfig(kappa=2.0),
                             schemes=("het_x", "het_y", "hom_x", "hom_y", "adiabatic_x", "adiabatic_y")),
    "fig6": ExperimentConfig(name="fig6", squeezings=(0.0, 0.1, 0.25),
                             schemes=("het_x", "het_y", "hom_x", "hom_y", "adiabatic_x", "adiabatic_y")),
    "noise-fig": ExperimentConfig(name="noise-fig", kind="noise", t_end=2.0),
}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# --- outputs -----------------------------------------------------------------

def code_version() -> str:
    """Package version plus a digest of the source files."""
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "unknown"
    h = hashlib.sha256()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return f"{version}+{h.hexdigest()[:12]}"


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _num(x) -> str:
    return repr(float(x))


def _summary_rows(s, series, stats, times) -> list:
    rows = []
    for q, st in stats.items():
        se = st.stderr
        for k, t in enumerate(times):
            rows.append((_num(s), series, q, _num(t), _num(st.mean[k]), _num(st.std[k]),
                         _num(se[k]), int(st.n[k])))
    return rows


def _stag(s: float) -> str:
    return f"s{s:g}"


def run_povm(cfg: ExperimentConfig, out: Path) -> dict:
    integ = cfg.integrator()
    params = cfg.noise_params()
    rows = []
    per_s = {}
    (out / "trajectories").mkdir()
    for s in cfg.squeezings:
        cav = cfg.cavity(s)
        ens = {}
        for name in cfg.schemes:
            e = reconstruct_ensemble(cfg.scheme_spec(name), cav, cfg.ensemble(), params, integ)
            ens[name] = e
            for i in range(min(cfg.save_trajectories, e.M)):
                e.trajectory(i).to_csv(out / "trajectories" / f"{name}_{_stag(s)}_stream{i}.csv")
            rows += _summary_rows(s, name, scheme_stats(e), e.times)
        for pair, (x, y) in PAIRS.items():
            if x.value in ens and y.value in ens:
                rows += _summary_rows(s, pair, pair_stats(ens[x.value], ens[y.value]), integ.record_times)
        per_s[s] = ens
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    _plot_summary(read_summary(out / "summary.csv"), out)
    return per_s


def read_summary(path) -> dict:
    """{(s, series, quantity): {"t", "mean", "std", "stderr", "n"}} from summary.csv."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for r in rows:
        key = (float(r["s"]), r["series"], r["quantity"])
        d = out.setdefault(key, {c: [] for c in ("t", "mean", "std", "stderr", "n")})
        for c in ("t", "mean", "std", "stderr"):
            d[c].append(float(r[c]))
        d["n"].append(int(r["n"]))
    return {k: {c: np.array(v) for c, v in d.items()} for k, d in out.items()}


def _plot_summary(summary: dict, out: Path) -> None:
    svals = sorted({k[0] for k in summary})
    for s in svals:
        series = sorted({k[1] for k in summary if k[0] == s and k[2] == "mu"})
        for name in series:
            mu, an = summary[(s, name, "mu")], summary[(s, name, "anorm")]
            svg.write(out / f"bias_{name}_{_stag(s)}.svg", svg.line_plot(
                {"mean mu": (mu["t"], mu["mean"]), "mean |a|": (an["t"], an["mean"]),
                 "2 - mean |a|": (an["t"], 2 - an["mean"])},
                title=f"bias {name}, s={s:g}", ylabel="mu",
                bands={"mean mu": (mu["t"], mu["mean"] - mu["std"], mu["mean"] + mu["std"])}))
        sh = {name: (summary[(s, name, "S")]["t"], summary[(s, name, "S")]["mean"]) for name in series}
        svg.write(out / f"sharpness_{_stag(s)}.svg",
                  svg.line_plot(sh, title=f"sharpness, s={s:g}", ylabel="S"))
        pairs = sorted({k[1] for k in summary if k[0] == s and k[2] == "C"})
        if pairs:
            cc = {p: (summary[(s, p, "C")]["t"], summary[(s, p, "C")]["mean"]) for p in pairs}
            svg.write(out / f"compatibility_{_stag(s)}.svg",
                      svg.line_plot(cc, title=f"compatibility, s={s:g}", ylabel="C"))


def run_phasespace(cfg: ExperimentConfig, out: Path) -> None:
    grid = cfg.phase_grid()
    state = cfg.phase_state()
    w = wigner(state, grid)
    q = husimi_q(state, grid)
    w.to_csv(out / "wigner.csv")
    q.to_csv(out / "husimi.csv")
    sharp = position_density(state, grid.q)
    rows = zip(grid.q, sharp, w.marginal_q(), q.marginal_q(), smeared_marginal(sharp, grid.q))
    _write_csv(out / "marginals.csv", ("q", "sharp", "wigner_q", "husimi_q", "smeared_sharp"),
               [[_num(x) for x in r] for r in rows])
    svg.write(out / "wigner.svg", svg.heatmap(grid.q, grid.p, w.values, title="Wigner W(q, p)"))
    svg.write(out / "husimi.svg", svg.heatmap(grid.q, grid.p, q.values, title="Husimi Q(q, p)"))
    svg.write(out / "marginals.svg", svg.line_plot(
        {"sharp <q|rho|q>": (grid.q, sharp), "Wigner marginal": (grid.q, w.marginal_q()),
         "Husimi marginal": (grid.q, q.marginal_q())}, title="position marginals", xlabel="q"))


def run_noise(cfg: ExperimentConfig, out: Path) -> None:
    path = generate_complex_path(cfg.noise_params())
    path.to_csv(out / "noise.csv")
    svg.write(out / "noise.svg", svg.line_plot(
        {"x": (path.times, path.x.values), "y": (path.times, path.y.values)},
        title="OU record", ylabel="amplitude"))


def run_experiment(cfg: ExperimentConfig, out) -> Path:
    """Write all outputs of ``cfg`` to ``out`` atomically (temp dir, then rename)."""
    cfg.validate()
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        if cfg.kind == "povm":
            run_povm(cfg, tmp)
        elif cfg.kind == "phasespace":
            run_phasespace(cfg, tmp)
        else:
            run_noise(cfg, tmp)
        manifest = {"config": cfg.to_dict(), "seed": cfg.noise.seed, "code_version": code_version()}
        with open(tmp / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if out.exists():
            shutil.rmtree(out)
        os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out
