"""
Orders of an empirical tail built from Pareto(2) samples.

The survival function is x^-2, so both orders of the empirical tail should
sit near -2 over the range the samples cover.

    python3 demos/pareto_tail.py [n_samples] [seed]
"""

import sys

import numpy as np

from rvclass import empirical_tail, full_report
from rvclass.cli import file_config


def main(n=100_000, seed=20240611):
    rng = np.random.default_rng(seed)
    samples = rng.uniform(size=n) ** -0.5
    U = empirical_tail(samples, label="pareto(2)")
    report = full_report(U, file_config(U, (2.0, 4.0)), empirical=True)
    print(f"{n} samples, largest {samples.max():.1f}")
    print(f"mu_hat = {report.mu_hat:.3f}, nu_hat = {report.nu_hat:.3f} (exact tail index -2)")
    for note in report.notes:
        print("note:", note)


if __name__ == "__main__":
    args = [int(a) for a in sys.argv[1:3]]
    main(*args)
