"""Draw the stability boundary in the mu plane with the scheme's mu line.

Every admissible mu = 3 + 2i a gamma sin(theta) lies on Re mu = 3, which
touches the boundary only at mu = 3.
"""
import argparse

import numpy as np

from hkhydro.stability import gamma_polygon, stability_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=4096)
    ap.add_argument("--output", default="stability_region.png")
    args = ap.parse_args()

    theta = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    ag = np.logspace(-2, 2, 41)
    eta = stability_map(ag, theta)
    print(f"max |eta| over a*gamma in [1e-2, 1e2]: {eta.max():.17g}")

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    _, r, s = gamma_polygon(args.samples)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.5))
    ax1.fill(r, s, color="tab:red", alpha=0.2, label="unstable")
    ax1.plot(np.append(r, r[0]), np.append(s, s[0]), "k-", lw=1)
    ax1.axvline(3.0, color="tab:blue", lw=1, label="Re mu = 3")
    ax1.set_xlabel("Re mu")
    ax1.set_ylabel("Im mu")
    ax1.set_aspect("equal")
    ax1.legend()
    im = ax2.pcolormesh(theta, ag, eta, shading="auto")
    ax2.set_yscale("log")
    ax2.set_xlabel("theta")
    ax2.set_ylabel("a gamma")
    fig.colorbar(im, ax=ax2, label="max |eta|")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
