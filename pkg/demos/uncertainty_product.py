"""Energy-time tradeoff of CCM well hopping on the double well.

For each conserved offset delta_e the sweep measures delta_t, the gap between
the first two barrier crossings, and tabulates the product. Over a decade of
delta_e the product moves far less than either factor, an uncertainty-like
relation with no hbar anywhere in the dynamics.
"""

from xphase import ExtendedSystem, Flavor
from xphase.analysis import uncertainty_sweep
from xphase.potentials import double_well

DECADE = [1.0, 0.5, 0.2, 0.1]


def main():
    sys = ExtendedSystem(double_well(), flavor=Flavor.CCM)
    rows = uncertainty_sweep(sys, 0.5, DECADE)
    print("e_r = 0.5, right-well start, default tolerances\n")
    print(f"{'delta_e':>8} {'delta_t':>12} {'product':>10} {'flips':>6}")
    for r in rows:
        print(f"{r.delta_e:>8} {r.delta_t:>12.6f} {r.product:>10.4f} {r.flips:>6}")
    products = [r.product for r in rows]
    print(f"\ndelta_e spans a factor {max(DECADE) / min(DECADE):.0f}, "
          f"the product only {max(products) / min(products):.3f}")


if __name__ == "__main__":
    main()
