"""Command-line front end: ``loopalg <command> [options]``.

Exit codes: 0 success, 1 failed check, 2 invalid input, 3 capacity exceeded.
"""
from __future__ import annotations

import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import click

EXIT_FAIL, EXIT_INPUT, EXIT_CAPACITY = 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    N: int
    lam_text: str
    frac: Fraction | None
    lam_value: float
    u: float
    tol: float
    precision: str
    fmt: str
    seed: int

    def params(self, u: float | None = None):
        from .tl_algebra import SpectralParams

        uu = self.u if u is None else u
        if self.frac is not None:
            return SpectralParams.rational(self.frac.numerator, self.frac.denominator, uu, self.precision)
        return SpectralParams.real(self.lam_value, uu, self.precision)


def parse_lambda(text: str) -> tuple[Fraction | None, float]:
    """``a/b`` means pi*a/b, reduced; anything else is a decimal in radians."""
    import math

    text = text.strip()
    if "/" in text:
        a, _, b = text.partition("/")
        try:
            frac = Fraction(int(a), int(b))
        except (ValueError, ZeroDivisionError):
            raise click.BadParameter(f"cannot read {text!r} as a/b") from None
        return frac, math.pi * frac.numerator / frac.denominator
    try:
        return None, float(text)
    except ValueError:
        raise click.BadParameter(f"cannot read {text!r} as a/b or a decimal") from None


def _limit_threads(n: int | None):
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def common(f):
    opts = [
        click.option("--N", "N", type=int, default=4, show_default=True, help="number of sites"),
        click.option("--lambda", "lam", default="1/3", show_default=True,
                     help="a/b for pi*a/b, or a decimal in radians"),
        click.option("--u", type=float, default=None, help="anisotropy (default lambda/2)"),
        click.option("--tol", type=float, default=None, help="rank tolerance"),
        click.option("--precision", type=click.Choice(["double", "extended"]), default="double",
                     show_default=True),
        click.option("--format", "fmt", type=click.Choice(["json", "csv", "table"]), default="table",
                     show_default=True),
        click.option("--threads", type=int, default=None, help="cap on linear-algebra threads"),
        click.option("--seed", type=int, default=1234, show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def make_config(N, lam, u, tol, precision, fmt, threads, seed) -> RunConfig:
    _limit_threads(threads)
    env = os.environ.get("LOOPALG_PRECISION")
    if env:
        if env not in ("double", "extended"):
            raise click.BadParameter(f"LOOPALG_PRECISION={env!r} is not double or extended")
        precision = env
    if N is None or N < 1:
        raise click.BadParameter("N must be a positive integer", param_hint="--N")
    frac, value = parse_lambda(lam)
    if frac is None:
        click.echo("note: decimal lambda, criticality-dependent checks are disabled", err=True)
    if tol is None:
        tol = 1e-30 if precision == "extended" else 1e-9
    if tol <= 0:
        raise click.BadParameter("tol must be positive", param_hint="--tol")
    return RunConfig(N, lam, frac, value, value / 2 if u is None else u, tol, precision, fmt, seed)


def _emit(rows: list[dict], fmt: str):
    if not rows:
        return
    if fmt == "json":
        click.echo(json.dumps(rows, indent=1))
        return
    keys = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        click.echo(buf.getvalue(), nl=False)
        return
    widths = {k: max(len(k), *(len(str(r[k])) for r in rows)) for k in keys}
    click.echo("  ".join(k.ljust(widths[k]) for k in keys))
    for r in rows:
        click.echo("  ".join(str(r[k]).ljust(widths[k]) for k in keys))


def _cx(z) -> str:
    z = complex(z)
    return f"{z.real:.12g}" if abs(z.imag) < 1e-12 else f"{z.real:.12g}{z.imag:+.12g}i"


def _guard(fn):
    """Translate library errors into exit codes."""
    from .linkspace import LinkError
    from .tl_algebra import SingularParameterError
    from .transfer import CapacityError

    try:
        return fn()
    except CapacityError as exc:
        click.echo(f"capacity: {exc}", err=True)
        sys.exit(EXIT_CAPACITY)
    except SingularParameterError as exc:
        click.echo(f"singular parameter: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except (LinkError, ValueError) as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INPUT)


@click.group()
def main():
    """Temperley-Lieb loop models: transfer matrices, projectors, Jordan structure."""


@main.command()
@common
def basis(**kw):
    """List the link basis of V_N in canonical order."""
    cfg = make_config(**kw)

    def run():
        from .linkspace import eta_encode, eta_to_text, format_link_notation, get_basis, mu_encode, mu_to_text

        rows = []
        for i, w in enumerate(get_basis(cfg.N).states):
            mu = mu_encode(w)
            rows.append({"index": i, "d": w.d, "state": format_link_notation(w),
                         "eta": eta_to_text(eta_encode(w)), "mu": mu_to_text(mu) if mu else "-"})
        _emit(rows, cfg.fmt)

    _guard(run)


def _matrix_out(m, fmt):
    if fmt == "csv":
        click.echo(m.to_csv(), nl=False)
    elif fmt == "json":
        click.echo(m.to_json())
    else:
        for row in m.data:
            click.echo(" ".join(f"{_cx(z):>14}" for z in row))


@main.command()
@common
def dmatrix(**kw):
    """rho(D_N(lambda, u)) in the link basis."""
    cfg = make_config(**kw)

    def run():
        from .transfer import build_rho_DN_sweep

        _matrix_out(build_rho_DN_sweep(cfg.N, cfg.params()), cfg.fmt)

    _guard(run)


@main.command()
@common
def fmatrix(**kw):
    """rho(F_N(lambda)) in the link basis."""
    cfg = make_config(**kw)

    def run():
        from .transfer import rho_FN

        _matrix_out(rho_FN(cfg.N, cfg.params()), cfg.fmt)

    _guard(run)


def _operator(cfg, which):
    from .transfer import build_rho_DN_sweep, rho_FN

    return rho_FN(cfg.N, cfg.params()) if which == "F" else build_rho_DN_sweep(cfg.N, cfg.params())


@main.command()
@common
@click.option("--operator", type=click.Choice(["D", "F"]), default="D", show_default=True)
def spectrum(operator, **kw):
    """Eigenvalues of each diagonal block (sector) of the operator."""
    cfg = make_config(**kw)

    def run():
        from .spectral import sector_spectrum

        spec = sector_spectrum(_operator(cfg, operator))
        rows = [{"d": d, "eigenvalue": _cx(x)} for d, ev in spec.items()
                for x in sorted(ev, key=lambda z: (round(z.real, 12), round(z.imag, 12)))]
        _emit(rows, cfg.fmt)

    _guard(run)


@main.command()
@common
@click.option("--operator", type=click.Choice(["D", "F"]), default="D", show_default=True)
def jordan(operator, **kw):
    """Predicted Jordan links next to the links detected numerically."""
    cfg = make_config(**kw)

    def run():
        from .spectral import detected_links, jordan_analyze
        from .wenzl_jones import predicted_links, reduce_Lambda

        reports = jordan_analyze(_operator(cfg, operator), cfg.tol)
        found = sorted(detected_links(reports))
        if cfg.frac is not None:
            a, b = reduce_Lambda(cfg.frac.numerator, cfg.frac.denominator)
            predicted = sorted(predicted_links(cfg.N, a, b))
        else:
            predicted = None
        if cfg.fmt == "json":
            click.echo(json.dumps({"predicted": predicted, "detected": found,
                                   "reports": [r.to_dict() for r in reports]}, indent=1))
        else:
            click.echo(f"predicted: {predicted if predicted is not None else 'n/a (decimal lambda)'}")
            click.echo(f"detected:  {found}")
            _emit([{"eigenvalue": _cx(r.eigenvalue), "multiplicity": r.algebraic_multiplicity,
                    "blocks(size:count)": ";".join(f"{k}:{v}" for k, v in sorted(r.block_size_histogram.items())),
                    "sectors": ",".join(map(str, r.sectors)),
                    "links": ";".join(f"{d}-{dp}" for d, dp in r.sector_links) or "-"}
                   for r in reports], "csv" if cfg.fmt == "csv" else "table")
        if predicted is not None and set(predicted) != set(found):
            sys.exit(EXIT_FAIL)

    _guard(run)


@main.command()
@common
@click.option("--M", "M", type=int, default=1, show_default=True, help="double rows")
@click.option("--Q", "Q", type=int, default=2, show_default=True, help="number of Potts states")
def potts(M, Q, **kw):
    """Spin, FK and loop partition functions on the N x 2M cylinder."""
    if kw.get("lam") == "1/3" and Q != 1:
        kw["lam"] = {2: "1/4", 3: "1/6"}.get(Q, kw["lam"])
    cfg = make_config(**kw)

    def run():
        import math

        from .potts import three_way

        p = cfg.params()
        if abs(float(p.beta) ** 2 - Q) > 1e-9:
            raise ValueError(f"lambda gives Q = beta^2 = {float(p.beta) ** 2:.6g}, not {Q}")
        row = three_way(cfg.N, M, Q, p)
        out = {k: row[k] for k in ("N", "M", "Q", "u", "Z_spin", "Z_fk", "Z_loop", "max_rel_dev")}
        _emit([out], "csv" if cfg.fmt == "table" else cfg.fmt)
        if not row["max_rel_dev"] <= 1e-8 or math.isnan(row["max_rel_dev"]):
            sys.exit(EXIT_FAIL)

    _guard(run)


@main.command()
@click.option("--suite", type=click.Choice(["diag", "fourier", "braid", "appendixB", "projectors", "jordan",
                                            "potts", "boundary", "oracle", "all"]),
              default="all", show_default=True)
@click.option("--N", "N", type=int, default=None, help="restrict size-based suites to this N")
@click.option("--lambda", "lam", default=None, help="restrict lambda-based suites to this value")
@click.option("--threads", type=int, default=None)
def verify(suite, N, lam, threads):
    """Run acceptance checks; nonzero exit if any fails."""
    _limit_threads(threads)
    from . import acceptance as acc

    params = None
    if lam is not None:
        cfg = make_config(N or 4, lam, None, None, "double", "table", threads, 0)
        params = cfg.params()
    if N is not None and N < 1:
        raise click.BadParameter("N must be positive", param_hint="--N")
    results = []
    for key in acc.SUITES[suite]:
        if key == "1" and (N or params):
            results.append(acc.check_diagonal_blocks(ns=[N] if N else range(2, 9),
                                                     lams=[params] if params else None))
        elif key == "2" and (N or params):
            results.append(acc.check_fourier(ns=[N] if N else range(2, 6), lam=params))
        elif key == "3" and (N or params):
            results.append(acc.check_braid_column(rs=range(1, (N or 7) + 1),
                                                params=[params] if params else None))
        else:
            results.append(acc.ALL_CHECKS[key]())
    for r in results:
        click.echo(r.line())
    sys.exit(0 if all(r.passed for r in results) else EXIT_FAIL)


if __name__ == "__main__":
    main()
