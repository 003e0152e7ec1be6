"""Dirac reduction check on the catalog chains; prints one line per chain."""

import argparse
from dataclasses import dataclass

from dirac_rmatrix.catalog import e_selfdual, kappa0, oscillator, sl
from dirac_rmatrix.cdybe import proposition1_suite, sample_points
from dirac_rmatrix.drmatrix import canonical_r, reduce
from dirac_rmatrix.lie import make_chain


@dataclass
class ReductionConfig:
    seed: int = 7
    samples: int = 5
    radius: float = 0.2
    derivative_mode: str = "exact"


def chains():
    for n in (2, 3):
        A = sl(n)
        H = [l for l in A.labels if l.startswith("H")]
        yield f"Cartan < sl{n}", A, make_chain(A, H), A.element({h: 0.4 + 0.15 * i for i, h in enumerate(H)})
    E = e_selfdual(4)
    yield "span{J,T} < e_selfdual(4)", E, make_chain(E, [l for l in E.labels if l[0] in "JT"]), 0.1 * kappa0(E)
    O = oscillator(1)
    yield "span{N,c} < oscillator(1)", O, make_chain(O, ["c", "N"]), O.element({"N": 0.5, "c": 0.2})


def main(cfg: ReductionConfig):
    for name, A, ch, center in chains():
        r = canonical_r(A, 1)
        pts = sample_points(center, ch.K, cfg.radius, cfg.samples, cfg.seed, reduce(r, ch).domain_test)
        rep = proposition1_suite(ch, r, pts, cfg.derivative_mode)
        print(f"{name:30s} max residual {rep.max_residual:.2e}  pass={rep.passed}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=ReductionConfig.seed)
    p.add_argument("--samples", type=int, default=ReductionConfig.samples)
    p.add_argument("--derivative-mode", default=ReductionConfig.derivative_mode, choices=["exact", "fd"])
    a = p.parse_args()
    main(ReductionConfig(seed=a.seed, samples=a.samples, derivative_mode=a.derivative_mode))
