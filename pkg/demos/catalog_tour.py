"""
Classify every catalog function and compare with its known memberships.

    python3 demos/catalog_tour.py
"""

from rvclass import CLASSES, Membership, example, full_report, recommended_config
from rvclass.catalog import ENTRIES


def fmt(v):
    return "   -  " if v is None else f"{v:6.3f}"


def main():
    print(f"{'name':16s} " + " ".join(f"{c:>11s}" for c in CLASSES) + "    rho     mu     nu")
    for name in sorted(ENTRIES):
        U, truth = example(name)
        report = full_report(U, recommended_config(name))
        cells = []
        for c in CLASSES:
            got, want = report.verdicts[c], truth.memberships[c]
            mark = "" if want is Membership.UNKNOWN or got is want else "!"
            cells.append(f"{got.value + mark:>11s}")
        print(f"{name:16s} " + " ".join(cells), fmt(report.rho_hat), fmt(report.mu_hat), fmt(report.nu_hat))
    print("\n'!' marks a verdict that disagrees with the known membership")


if __name__ == "__main__":
    main()
