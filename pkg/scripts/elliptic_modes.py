"""Fourier modes of the theta kernels against the affine blocks, per mode and grading."""

import argparse
from dataclasses import dataclass

from dirac_rmatrix.affine import AffineKappa, grading_from_catalog
from dirac_rmatrix.catalog import sl
from dirac_rmatrix.elliptic import loop_consistency


@dataclass
class ModesConfig:
    k: float = -1.0
    points: int = 512
    max_mode: int = 3
    omegas: tuple = (0.0, 0.3)


def main(cfg: ModesConfig):
    G = sl(2)
    modes = tuple(range(-cfg.max_mode, cfg.max_mode + 1))
    for mu in ("identity", "coxeter"):
        g = grading_from_catalog(G, mu)
        for om in cfg.omegas:
            rep = loop_consistency(g, AffineKappa(om * G.element("H"), cfg.k), modes, cfg.points)
            per_mode = "  ".join(f"{p['n']:+d}:{r:.1e}" for p, r in zip(rep.sample_points, rep.residuals))
            print(f"mu={mu:9s} omega={om}H  tau={complex(*rep.metadata['tau']):.4f}  {per_mode}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--k", type=float, default=ModesConfig.k)
    p.add_argument("--points", type=int, default=ModesConfig.points)
    p.add_argument("--max-mode", type=int, default=ModesConfig.max_mode)
    a = p.parse_args()
    main(ModesConfig(k=a.k, points=a.points, max_mode=a.max_mode))
