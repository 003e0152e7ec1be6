"""Affine operator CDYBE on random homogeneous pairs for several gradings."""

import argparse
from dataclasses import dataclass

import numpy as np

from dirac_rmatrix.affine import AffineKappa, domain_check, grading_from_catalog, verify_prop2
from dirac_rmatrix.catalog import catalog, kappa0


@dataclass
class AffineConfig:
    window: int = 3
    samples: int = 50
    seed: int = 0
    k: complex = -1.0
    l: complex = 0.2
    derivative_mode: str = "exact"


CASES = [("sl2", "identity"), ("sl2", "coxeter"), ("sl3", "coxeter"), ("e_selfdual2", "identity")]


def omega_for(g, rng):
    Q0 = g.basis(0)
    base = 0.1 * kappa0(g.G) if g.G.meta.get("catalog") == "e_selfdual" else 0
    return base + Q0 @ (0.1 * rng.normal(size=Q0.shape[1]))


def main(cfg: AffineConfig):
    rng = np.random.default_rng(cfg.seed)
    for G, mu in CASES:
        g = grading_from_catalog(catalog(G), mu)
        kappa = AffineKappa(omega_for(g, rng), cfg.k, cfg.l)
        dom = domain_check(g, kappa, cfg.window)
        rep = verify_prop2(g, kappa, cfg.window, cfg.samples, cfg.seed, cfg.derivative_mode)
        print(
            f"{G:12s} mu={mu:9s} N={g.N}  max residual {rep.max_residual:.2e}  pass={rep.passed}"
            f"  all grades certified={dom.details['all_grades_certified']}"
        )


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--window", type=int, default=AffineConfig.window)
    p.add_argument("--samples", type=int, default=AffineConfig.samples)
    p.add_argument("--seed", type=int, default=AffineConfig.seed)
    p.add_argument("--derivative-mode", default=AffineConfig.derivative_mode, choices=["exact", "fd"])
    a = p.parse_args()
    main(AffineConfig(window=a.window, samples=a.samples, seed=a.seed, derivative_mode=a.derivative_mode))
