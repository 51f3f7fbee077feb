"""Envelope comparability bands over the standard parameter sample, as JSON.

Usage:
    python scripts/band_report.py poisson [--grid 30] [--out bands.json]
    python scripts/band_report.py potential --sigma 0.3 --sigma 0.75 [--variant bessel]
"""
import json
import math

import click
import numpy as np

from spectral_potentials import Setting
from spectral_potentials import envelopes as E
from spectral_potentials import potentials as P
from spectral_potentials.measures import make_grid

JAC = [-0.9, -0.5, 0.0, 0.5, 2.0]
NU = [-0.9, -0.5, 0.0, 0.5, 2.7]


def settings(keys):
    for key in keys:
        if key.startswith("jacobi"):
            for a in JAC:
                for b in JAC:
                    yield Setting.make(key, alpha=a, beta=b)
        else:
            for nu in NU:
                yield Setting.make(key, nu=nu)


@click.command()
@click.argument("kind", type=click.Choice(["poisson", "potential"]))
@click.option("--setting", "keys", multiple=True,
              default=["jacobi-pol", "jacobi-fun", "jacobi-scaled", "fb-natural", "fb-lebesgue"])
@click.option("--sigma", "sigmas", type=float, multiple=True, default=[0.3, 0.75])
@click.option("--variant", type=click.Choice(["riesz", "bessel"]), default="riesz")
@click.option("--grid", type=int, default=30)
@click.option("--times", type=int, default=20, help="Log-spaced times in [0.01, 8] (Poisson only).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def main(kind, keys, sigmas, variant, grid, times, out):
    entries = []
    ts = np.geomspace(0.01, 8, times)
    for s in settings(keys):
        g = make_grid(s, grid)
        if kind == "poisson":
            entries.append({"parameters": s.describe(), "grid": grid, "band": E.poisson_band(s, ts, g)})
            continue
        for sigma in sigmas:
            v = variant
            if v == "riesz" and s.kind.is_jacobi and math.isclose(s.alpha + s.beta, -1.0):
                v = "bessel"
            band = E.potential_band(P.PotentialSpec(s, sigma, v), g)
            entries.append({"parameters": {**s.describe(), "sigma": sigma, "variant": v}, "grid": grid, "band": band})
    text = E.band_report(entries)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text)
    wide = [e["parameters"] for e in entries if e["band"].width > 1e3]
    click.echo(json.dumps({"entries": len(entries), "wider_than_1e3": len(wide)}), err=True)


if __name__ == "__main__":
    main()
