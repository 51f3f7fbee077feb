"""Command-line front end.

Exit status: 0 on success, 2 for parameter or domain errors, 3 when a
numerical tolerance cannot be met, 64 for usage errors.  Every report written
with ``--out`` embeds the resolved run configuration; CSV tables carry it as
leading ``#`` comment lines.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, replace

import click
import numpy as np
from click.core import ParameterSource

from . import envelopes, kernels, mapping, measures, potentials, specfun
from .specfun import DomainError, NumericalError, ParameterError, Setting

EXIT_PARAMETER = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64

SETTINGS = [k.value for k in specfun.SettingKind]
THRESHOLD_WARN = 1e-6


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's output."""

    command: str
    setting: str | None = None
    alpha: float | None = None
    beta: float | None = None
    nu: float | None = None
    sigma: float | None = None
    variant: str = "riesz"
    p: float | None = None
    q: float | None = None
    tol: float = kernels.DEFAULT_CONFIG.tol
    t_min: float = kernels.DEFAULT_CONFIG.poisson_t_min
    T: float | None = None
    T_sub: float = kernels.DEFAULT_CONFIG.t_sub
    grid: int = 30
    seed: int = 0
    out: str | None = None
    threads: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tol", "t_min", "T_sub"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.T is not None and not self.T > 0:
            raise ParameterError("T must be positive")

    def kernel_config(self) -> kernels.KernelConfig:
        return replace(kernels.DEFAULT_CONFIG, tol=self.tol, poisson_t_min=self.t_min, t_sub=self.T_sub)

    def make_setting(self) -> Setting:
        if self.setting is None:
            raise ParameterError("--setting is required")
        return Setting.make(self.setting, self.alpha, self.beta, self.nu)

    def make_spec(self) -> potentials.PotentialSpec:
        if self.sigma is None:
            raise ParameterError("--sigma is required")
        return potentials.PotentialSpec(self.make_setting(), self.sigma, self.variant)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        return {k: _jsonable(v) for k, v in d.items()}


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _threads() -> int:
    raw = os.environ.get("SPL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"SPL_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ParameterError(f"SPL_THREADS must be a positive integer, got {raw!r}")
    return n


def read_config_file(path: str) -> dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_string("[run]\n" + fh.read())
    return {k.replace("-", "_"): v for k, v in parser["run"].items()}


def _exponent(text: str) -> float:
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    v = float(t)
    if not v >= 1:
        raise ParameterError(f"exponents must lie in [1, inf], got {text}")
    return v


class ExponentType(click.ParamType):
    name = "exponent"

    def convert(self, value, param, ctx):
        if isinstance(value, float):
            return value
        try:
            return _exponent(value)
        except (ValueError, ParameterError) as exc:
            self.fail(str(exc), param, ctx)


EXPONENT = ExponentType()

_COERCE = {"alpha": float, "beta": float, "nu": float, "sigma": float, "tol": float, "t_min": float,
           "T": float, "T_sub": float, "grid": int, "seed": int, "p": _exponent, "q": _exponent}


def resolve(ctx: click.Context, command: str, **extra) -> RunConfig:
    """Merge the config file (lowest precedence) with explicitly given flags."""
    params = dict(ctx.params)
    file_values = ctx.obj.get("file", {}) if ctx.obj else {}
    fields = {f for f in RunConfig.__dataclass_fields__ if f not in ("command", "extra", "threads")}
    values = {}
    for name in fields:
        given = name in params and ctx.get_parameter_source(name) != ParameterSource.DEFAULT
        if given:
            values[name] = params[name]
        elif name in file_values:
            raw = file_values[name]
            try:
                values[name] = _COERCE.get(name, str)(raw)
            except ValueError:
                raise ParameterError(f"config value {name} = {raw!r} is not valid") from None
        elif name in params and params[name] is not None:
            values[name] = params[name]
    cfg = RunConfig(command=command, threads=_threads(), extra=extra, **values)
    _warn_thresholds(cfg)
    return cfg


def _warn_thresholds(cfg: RunConfig) -> None:
    """Warn when sigma sits near a value where envelopes or types change form."""
    if cfg.sigma is None or cfg.setting is None:
        return
    marks = {"1/2": 0.5}
    if cfg.setting.startswith("jacobi"):
        if cfg.alpha is not None:
            marks["alpha+1"] = cfg.alpha + 1
        if cfg.beta is not None:
            marks["beta+1"] = cfg.beta + 1
    else:
        marks["3/2"] = 1.5
        if cfg.nu is not None:
            marks["nu+1"] = cfg.nu + 1
    for name, value in marks.items():
        gap = abs(cfg.sigma - value)
        if envelopes.ACTIVATION_TOL < gap <= THRESHOLD_WARN:
            click.echo(f"warning: sigma is within {gap:.2g} of {name}; the estimate changes form there "
                       "and is evaluated as not activated", err=True)


def emit(cfg: RunConfig, payload: dict, echo: bool = True) -> None:
    """Print a JSON report (and write it to ``--out`` if given)."""
    report = {"config": cfg.as_dict(), **payload}
    text = json.dumps(report, indent=2, sort_keys=True, default=_jsonable)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    if echo:
        click.echo(text)


def write_table(cfg: RunConfig, header: list[str], rows) -> None:
    """CSV table with the configuration as comment lines; stdout when no ``--out``."""
    buf = io.StringIO()
    for k, v in cfg.as_dict().items():
        buf.write(f"# {k}={json.dumps(v, default=_jsonable)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        click.echo(buf.getvalue(), nl=False)


# ---------------------------------------------------------------------------
# Shared options

def setting_options(f):
    opts = [
        click.option("--setting", type=click.Choice(SETTINGS), help="Eigensystem."),
        click.option("--alpha", type=float, help="Jacobi type parameter alpha."),
        click.option("--beta", type=float, help="Jacobi type parameter beta."),
        click.option("--nu", type=float, help="Bessel order nu."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def potential_options(f):
    f = click.option("--variant", type=click.Choice(potentials.VARIANTS), default="riesz", show_default=True)(f)
    return click.option("--sigma", type=float, help="Order of the potential.")(f)


def numeric_options(f):
    opts = [
        click.option("--tol", type=float, default=kernels.DEFAULT_CONFIG.tol, show_default=True),
        click.option("--t-min", "t_min", type=float, default=kernels.DEFAULT_CONFIG.poisson_t_min, show_default=True,
                     help="Smallest Poisson series time."),
        click.option("--t-sub", "T_sub", type=float, default=kernels.DEFAULT_CONFIG.t_sub, show_default=True,
                     help="Largest subordination time."),
        click.option("--grid", type=int, default=30, show_default=True, help="Grid size."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--out", type=click.Path(dir_okay=False), help="Output file."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


# ---------------------------------------------------------------------------
# Commands

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="key=value file; flags given on the command line take precedence.")
@click.pass_context
def cli(ctx, config_path):
    """Jacobi and Fourier-Bessel kernels, potentials, envelopes and mapping types."""
    ctx.ensure_object(dict)
    ctx.obj["file"] = read_config_file(config_path) if config_path else {}


@cli.group("specfun")
def specfun_group():
    """Special functions and eigensystems."""


@specfun_group.command("bessel-zero")
@click.option("--nu", type=float, required=True)
@click.option("--n", "n", type=int, required=True, help="Zero index (1-based).")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def cmd_bessel_zero(ctx, nu, n, out):
    """n-th positive zero of J_nu."""
    cfg = resolve(ctx, "specfun bessel-zero", n=n)
    z = specfun.bessel_zero(nu, n)
    if out:
        emit(cfg, {"zero": z, "residual": float(abs(specfun.bessel_j(nu, z)))}, echo=False)
    click.echo(repr(z))


@specfun_group.command("bessel-j")
@click.option("--nu", type=float, required=True)
@click.option("--x", "x", type=float, required=True)
@click.pass_context
def cmd_bessel_j(ctx, nu, x):
    """J_nu(x)."""
    resolve(ctx, "specfun bessel-j", x=x)
    click.echo(repr(float(specfun.bessel_j(nu, x))))


@specfun_group.command("eigfun")
@setting_options
@click.option("--n", "n", type=int, required=True)
@click.option("--x", "x", type=float, required=True)
@click.pass_context
def cmd_eigfun(ctx, setting, alpha, beta, nu, n, x):
    """Eigenfunction n at x, with its eigenvalue."""
    cfg = resolve(ctx, "specfun eigfun", n=n, x=x)
    st = cfg.make_setting()
    emit(cfg, {"value": float(specfun.eigfun(st, n, x)[()]), "eigenvalue": float(specfun.eigenvalue(st, n))})


@cli.command("kernel")
@click.argument("which", type=click.Choice(["poisson", "heat", "subordinated"]))
@setting_options
@click.option("--t", "t", type=float, required=True, help="Time.")
@click.option("--x", "x", type=float, help="First point (omit for a grid slice).")
@click.option("--y", "y", type=float, help="Second point.")
@numeric_options
@click.pass_context
def cmd_kernel(ctx, which, setting, alpha, beta, nu, t, x, y, tol, t_min, T_sub, grid, seed, out):
    """Poisson, heat or subordinated Poisson kernel at a point or over a grid slice."""
    cfg = resolve(ctx, f"kernel {which}", t=t, x=x, y=y)
    st = cfg.make_setting()
    kc = cfg.kernel_config()
    if (x is None) != (y is None):
        raise click.UsageError("give both --x and --y, or neither for a grid slice")
    if x is not None:
        fn = {"poisson": kernels.poisson_kernel, "heat": kernels.heat_kernel,
              "subordinated": kernels.subordinated_poisson}[which]
        kv = fn(st, t, x, y, cfg.tol, config=kc)
        emit(cfg, {"value": kv.value, "tail_bound": kv.tail_bound})
        return
    pts = measures.make_grid(st, cfg.grid).points
    ix, iy = np.triu_indices(len(pts))
    batch = {"poisson": kernels.poisson_kernel_batch, "heat": kernels.heat_kernel_batch}
    if which in batch:
        vals, bnds = batch[which](st, [t], pts[ix], pts[iy], cfg.tol, config=kc)
    else:
        vals, bnds = kernels.subordinated_poisson_batch(st, [t], pts[ix], pts[iy], config=kc)
    write_table(cfg, ["t", "x", "y", "value", "tail_bound"],
                zip([t] * len(ix), pts[ix], pts[iy], vals[0], bnds[0]))


@cli.command("potential")
@setting_options
@potential_options
@click.option("--x", "x", type=float, help="First point (omit for the grid matrix).")
@click.option("--y", "y", type=float, help="Second point.")
@numeric_options
@click.pass_context
def cmd_potential(ctx, setting, alpha, beta, nu, sigma, variant, x, y, tol, t_min, T_sub, grid, seed, out):
    """Potential kernel at a point, or the kernel matrix over a graded grid."""
    cfg = resolve(ctx, "potential", x=x, y=y)
    spec = cfg.make_spec()
    if (x is None) != (y is None):
        raise click.UsageError("give both --x and --y, or neither for a grid matrix")
    if x is not None:
        kv = potentials.potential_kernel(spec, x, y, cfg.tol, cfg.kernel_config())
        emit(cfg, {"value": kv.value, "error": kv.tail_bound})
        return
    pts = measures.make_grid(spec.setting, cfg.grid).points
    mat, err = potentials.potential_matrix(spec, pts, cfg.tol, cfg.kernel_config())
    rows = [(pts[i], pts[j], mat[i, j], err[i, j]) for i in range(len(pts)) for j in range(len(pts))]
    write_table(cfg, ["x", "y", "value", "error"], rows)


@cli.group("envelope")
def envelope_group():
    """Kernel/envelope comparison bands."""


@envelope_group.command("compare")
@setting_options
@potential_options
@click.option("--kind", type=click.Choice(["potential", "poisson"]), default="potential", show_default=True)
@click.option("--times", type=int, default=20, show_default=True, help="Number of log-spaced times in [0.01, 8].")
@click.option("--switch-time", "T", type=float, help="Envelope switch time (default: largest sampled time).")
@numeric_options
@click.pass_context
def cmd_envelope_compare(ctx, setting, alpha, beta, nu, sigma, variant, kind, times, T, tol, t_min, T_sub, grid,
                         seed, out):
    """Band of computed kernel / closed-form envelope over a graded grid."""
    cfg = resolve(ctx, "envelope compare", kind=kind, times=times if kind == "poisson" else None)
    st = cfg.make_setting()
    g = measures.make_grid(st, cfg.grid)
    if kind == "poisson":
        ts = np.geomspace(0.01, 8.0, times)
        band = envelopes.poisson_band(st, ts, g, cfg.tol, cfg.T, cfg.kernel_config())
    else:
        band = envelopes.potential_band(cfg.make_spec(), g, cfg.tol, cfg.kernel_config())
    payload = asdict(band)
    payload["width"] = band.width
    emit(cfg, {"band": payload})


@envelope_group.command("jgamma")
@click.option("--gamma", "gammas", type=float, multiple=True, required=True)
@click.option("--samples", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def cmd_jgamma(ctx, gammas, samples, seed, out):
    """Band of the closed-form J_gamma model against quadrature over random tuples."""
    cfg = resolve(ctx, "envelope jgamma", gammas=list(gammas), samples=samples)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for g in gammas:
        ratios = [envelopes.j_gamma_closed(a) / envelopes.j_gamma_quad(a) for a in random_jgamma_args(rng, g, samples)]
        rows.append({"gamma": g, "lower": min(ratios), "upper": max(ratios), "C": max(max(ratios), 1 / min(ratios))})
    emit(cfg, {"bands": rows})


def random_jgamma_args(rng: np.random.Generator, gamma: float, count: int) -> list[envelopes.JGammaArgs]:
    """Random admissible tuples with T < S in (0, 2 pi] spread over many scales and 0 < w <= 2 pi."""
    out = []
    M = 2 * math.pi
    while len(out) < count:
        a, b = np.sort(M * 10.0 ** rng.uniform(-6, 0, 2))
        w = M * 10.0 ** rng.uniform(-6, 0)
        if gamma > -1 and rng.random() < 0.2:
            a = 0.0
        if a < b:
            out.append(envelopes.JGammaArgs(gamma, float(a), float(b), float(w), M))
    return out


@cli.group("mapping")
def mapping_group():
    """Lp-Lq mapping types."""


@mapping_group.command("classify")
@setting_options
@potential_options
@click.option("--p", "p", type=EXPONENT, required=True, help="Source exponent (number or inf).")
@click.option("--q", "q", type=EXPONENT, required=True, help="Target exponent (number or inf).")
@click.option("--strict", is_flag=True, help="Only literally stated types; may print Unstated.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def cmd_classify(ctx, setting, alpha, beta, nu, sigma, variant, p, q, strict, out):
    """Mapping type of the potential operator at (p, q)."""
    cfg = resolve(ctx, "mapping classify", strict=strict)
    spec = cfg.make_spec()
    pq = mapping.ExponentPair.from_pq(cfg.p, cfg.q)
    t = mapping.classify(spec, pq, strict=strict)
    label = "Unstated" if t is None else t.label
    flags = mapping.boundary_flags(spec, pq)
    for name in flags:
        click.echo(f"warning: (1/p, 1/q) is within 1e-6 of the {name}; the type is discontinuous there", err=True)
    if out:
        th = mapping.thresholds(spec.setting)
        emit(cfg, {"type": label, "pair": [pq.inv_p, pq.inv_q], "near_boundary": flags,
                   "thresholds": asdict(th)}, echo=False)
    click.echo(label)


@mapping_group.command("region")
@setting_options
@potential_options
@click.option("--grid", type=int, default=64, show_default=True, help="Resolution of the (1/p, 1/q) grid.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--gnuplot-script", "gp", type=click.Path(dir_okay=False), help="Also write a gnuplot script.")
@click.pass_context
def cmd_region(ctx, setting, alpha, beta, nu, sigma, variant, grid, out, gp):
    """Type of every grid pair as CSV (inv_p, inv_q, type)."""
    cfg = resolve(ctx, "mapping region")
    rows = mapping.region_grid(cfg.make_spec(), cfg.grid)
    write_table(cfg, ["inv_p", "inv_q", "type"], rows)
    if gp:
        if not out:
            raise click.UsageError("--gnuplot-script needs --out for the data file")
        with open(gp, "w") as fh:
            fh.write(mapping.gnuplot_script(out, f"{cfg.setting} sigma={cfg.sigma}"))


@mapping_group.command("audit")
@setting_options
@potential_options
@click.option("--grid", type=int, default=64, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def cmd_audit(ctx, setting, alpha, beta, nu, sigma, variant, grid, out):
    """Check the classifier against the consistency rules; exit 3 on violations."""
    cfg = resolve(ctx, "mapping audit")
    found = mapping.consistency_audit(cfg.make_spec(), cfg.grid)
    emit(cfg, {"violations": [asdict(v) for v in found]})
    if found:
        raise NumericalError(f"{len(found)} consistency violations")


@cli.command("probe")
@setting_options
@potential_options
@click.option("--case", "case_id", type=click.Choice([c for c in mapping.CATALOG] + ["bounded"]), required=True,
              help="Extremal case, or 'bounded' for a strong-type spot check.")
@click.option("--components", default="1,2,3,4,5,6", show_default=True,
              help="Comma-separated component indices, or 'full' for the potential kernel itself.")
@click.option("--p", "p", type=EXPONENT, required=True)
@click.option("--q", "q", type=EXPONENT, required=True)
@click.option("--ladder", "ladder_spec", default="4:12:1", show_default=True,
              help="start:stop:step of k; ladder values are 2^-k.")
@click.option("--eps", type=float, help="Epsilon for exponent cases (E3, E5).")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
def cmd_probe(ctx, setting, alpha, beta, nu, sigma, variant, case_id, components, p, q, ladder_spec, eps, out):
    """Run a sharpness probe and report the growth law as JSON."""
    cfg = resolve(ctx, "probe", case=case_id, components=components, ladder=ladder_spec, eps=eps)
    spec = cfg.make_spec()
    try:
        start, stop, step = (float(v) for v in ladder_spec.split(":"))
    except ValueError:
        raise click.UsageError("--ladder must look like start:stop:step") from None
    ladder = 2.0 ** -np.arange(start, stop + step / 2, step)
    comps = components if components == "full" else [int(c) for c in components.split(",")]
    pq = mapping.ExponentPair.from_pq(cfg.p, cfg.q)
    if case_id == "bounded":
        rep = mapping.bounded_ratio_probe(spec, comps, pq, ladder)
    else:
        rep = mapping.blowup_probe(spec, comps, case_id, pq, ladder, eps)
    emit(cfg, {"probe": json.loads(rep.to_json())})


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the exit status instead of raising."""
    try:
        cli.main(args=argv, prog_name="spectral-potentials", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (ParameterError, DomainError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_PARAMETER
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
