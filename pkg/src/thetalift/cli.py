"""Command line client: parses flags, calls the service handlers, prints JSON or CSV."""

import csv
import io
import json
import math
import sys

import click

from thetalift import service as sv

EXIT_CODES = {"usage": 2, "precondition": 3, "certification": 4}


def dumps(obj):
    """Deterministic JSON: insertion order kept, floats as %.17g."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(None)
        text = "%.17g" % obj
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["%.17g" % v if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _run(handler, req):
    try:
        return handler(req)
    except sv.ServiceError as exc:
        click.echo(f"error ({exc.kind}): {exc.message}", err=True)
        sys.exit(EXIT_CODES[exc.kind])


def numeric_options(func):
    options = [
        click.option("--q-order", default=64, show_default=True, type=click.IntRange(min=1)),
        click.option("--quad-nodes", default=128, show_default=True, type=click.IntRange(min=1)),
        click.option("--tol", default=1e-8, show_default=True,
                     type=click.FloatRange(min=0, max=1, min_open=True, max_open=True)),
        click.option("--reg-T", "reg_t", default=8.0, show_default=True,
                     type=click.FloatRange(min=1, min_open=True)),
        click.option("--precision", default="auto", show_default=True,
                     type=click.Choice(["auto", "double", "extended"])),
    ]
    for opt in reversed(options):
        func = opt(func)
    return func


def output_option(func):
    return click.option("--output", default="json", show_default=True, type=click.Choice(["json", "csv"]))(func)


def _numeric(q_order, quad_nodes, tol, reg_t, precision):
    return dict(q_order=q_order, quad_nodes=quad_nodes, tol=tol, reg_T=reg_t, precision=precision)


@click.group()
def main():
    """Traces, polynomial families and theta lift expansions."""


@main.command()
@click.argument("lo", type=int)
@click.argument("hi", type=int)
@output_option
def classnum(lo, hi, output):
    """Hurwitz class numbers H(n) for lo <= n <= hi."""
    res = _run(sv.classnum, sv.ClassnumRequest(lo=lo, hi=hi))
    if output == "csv":
        click.echo(_csv(["n", "H"], [(r.n, r.H) for r in res.rows]), nl=False)
    else:
        click.echo(dumps(res.model_dump()))


@main.command()
@click.argument("family", type=click.Choice(["P", "Q", "He", "Pi", "Omega", "E"]))
@click.argument("index", type=int)
def poly(family, index):
    """Exact rational polynomial of a family."""
    click.echo(_run(sv.poly, sv.PolyRequest(family=family, index=index)).text)


@main.command()
@click.argument("kind", type=click.Choice(["cm", "cycle", "square", "twisted"]))
@click.option("--d", "d", type=int)
@click.option("--delta", type=int)
@click.option("--D", "big_d", type=int)
@click.option("--form", default="J", show_default=True, help="1, J, E2star, JE2star, E2k:k or file:path")
@numeric_options
@output_option
def trace(kind, d, delta, big_d, form, output, **numeric):
    """Trace of a form over a discriminant, or the twisted trace."""
    req = sv.TraceRequest(kind=kind, d=d, delta=delta, D=big_d, form=form, **_numeric(**numeric))
    res = _run(sv.trace, req).model_dump()
    if output == "csv":
        click.echo(_csv(list(res), [list(res.values())]), nl=False)
    else:
        click.echo(dumps(res))


@main.command()
@click.argument("theorem", type=click.Choice(["cycjE2", "E2klift", "liftnoc0k"]))
@click.option("--dmax", default=20, show_default=True, type=click.IntRange(min=1))
@click.option("--delta", type=int)
@click.option("--k", type=int)
@click.option("--form")
@numeric_options
@output_option
def lift(theorem, dmax, delta, k, form, output, **numeric):
    """Fourier expansion of a theta lift as JSON."""
    if output != "json":
        raise click.UsageError("lift expansions are JSON only")
    req = sv.LiftRequest(theorem=theorem, d_max=dmax, delta=delta, k=k, form=form, **_numeric(**numeric))
    res = _run(sv.lift, req)
    click.echo(dumps(res.model_dump(exclude_none=True)))


if __name__ == "__main__":
    main()
