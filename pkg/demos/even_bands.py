"""
A function that is O-regularly varying but whose orders never settle.

phi switches between 0 and 1 on bands [e^(e^n), e^(e^(n+1))), so l(y)/y
keeps swinging between 1/(e+1) and e/(e+1) at y = e^n.

    python3 demos/even_bands.py
"""

import math

from rvclass import classify_M, classify_ORV, example, recommended_config


def main():
    U, _ = example("orv_not_m")
    cfg = recommended_config("orv_not_m")
    lo, hi = 1 / (math.e + 1), math.e / (math.e + 1)
    print(" n   l(e^n)/e^n   band-sum value")
    for n in range(7, 14):
        y = math.exp(n)
        print(f"{n:2d}   {float(U(y)) / y:.6f}     {hi if n % 2 else lo:.6f}")

    member, rho, _ = classify_M(U, cfg.grid, cfg.tols)
    orv, fit, _ = classify_ORV(U, cfg.t_grid, cfg.grid, cfg.tols)
    print(f"\nM: {member.value}   O-RV: {orv.value}   fitted bounds t^{fit.alpha:.3f}, t^{fit.beta:.3f}")


if __name__ == "__main__":
    main()
