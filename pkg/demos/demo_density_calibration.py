#!/usr/bin/env python3
"""Walk through the convention calibration for the kernel density.

Three independent checks pin the curvature/volume conventions jointly:
the trace identity (integral of the density equals the section count), the
degree integral of the curvature 2-form, and the flat-space disc model.
Once they agree, the density plateau b0 * k^n is forced, and the torus
density converges to it exponentially fast in k.
"""

import numpy as np

from torusbergman import (
    ProductModel,
    TorusFactor,
    build_basis,
    density,
    disc_model_density,
    leading_coefficient,
    omega,
    trace_density,
)


def main():
    model = ProductModel.from_factors([TorusFactor(1j, -1)])
    b0 = leading_coefficient(model)
    print(f"model: one factor, tau = i, degree -1; b0 = {b0}")

    w = omega(model)
    print(f"degree integral of omega: {w[0, 1] * 1.0:.15f}  (expect the degree, -1)")

    oracle = disc_model_density(np.pi / 2, 8)
    print(f"disc-model density at k=8: {oracle:.12f}  vs b0*k = {b0 * 8:.12f}")

    print("\n k   trace/dim - 1      density/(b0 k^n) - 1")
    rng = np.random.default_rng(0)
    z = rng.random(2)
    for k in (4, 8, 12, 16, 20):
        basis = build_basis(model, k)
        tr = trace_density(basis) / basis.dim - 1.0
        d = density(basis, z) / (b0 * k) - 1.0
        print(f"{k:3d}  {tr:+.3e}        {d:+.3e}")
    print("\nthe density deviation decays exponentially: the expansion has no")
    print("visible subleading power on these homogeneous flat models.")


if __name__ == "__main__":
    main()
