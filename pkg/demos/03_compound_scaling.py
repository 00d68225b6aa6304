"""Compound scaling: grow depth, width, and resolution together.

One exponent phi scales all three dimensions at fixed per-dimension
bases (alpha, beta, gamma). The bases are chosen so each unit of phi
roughly doubles compute: alpha * beta^2 * gamma^2 is close to 2. Variants
B0..B3 are phi = 0..3 applied to the 7-block base table.
"""

from histopatch import (
    ScalingCoefficients,
    check_compute_constraint,
    compound_scale,
    variant_spec,
)
from histopatch.scaling import layer_inventory


def main():
    coeffs = ScalingCoefficients()   # alpha 1.2, beta 1.1, gamma 1.15
    check = check_compute_constraint(coeffs, tol=0.1)
    print(
        f"compute-doubling check: alpha*beta^2*gamma^2 = {check.value:.4f} "
        f"(target {check.target}, tol {check.tol}) -> {'pass' if check.passed else 'fail'}"
    )

    print(f"\n{'phi':>3} {'depth':>7} {'width':>7} {'res':>7} {'input':>6} "
          f"{'repeats':>22} {'layers':>7}")
    for phi in range(4):
        mult = compound_scale(ScalingCoefficients(phi=float(phi)))
        spec = variant_spec(phi)
        repeats = ",".join(str(b.repeats) for b in spec.blocks)
        total = layer_inventory(spec)["total"]
        print(f"{phi:>3} {mult.depth_mult:>7.3f} {mult.width_mult:>7.3f} "
              f"{mult.res_mult:>7.3f} {spec.input_resolution:>6} "
              f"{repeats:>22} {total:>7}")

    b3 = variant_spec(3)
    print("\nB3 block table:")
    print(f"{'block':>5} {'repeats':>7} {'in':>5} {'out':>5} {'k':>3} {'s':>3} {'exp':>4}")
    for i, b in enumerate(b3.blocks, 1):
        print(f"{i:>5} {b.repeats:>7} {b.filters_in:>5} {b.filters_out:>5} "
              f"{b.kernel:>3} {b.stride:>3} {b.expand_ratio:>4}")

    plan = b3.sub_block_plan
    print("\nsub-block plan (1=plain opener, 2=reducing opener, 3=residual repeat):")
    for i, block_plan in enumerate(plan, 1):
        print(f"  block {i}: {list(block_plan)}")


if __name__ == "__main__":
    main()
