"""One full pass of the random-code construction, enumerated exactly.

The codebook is drawn iid from an index law, the encoder picks a
message by likelihood, the decoder emits through the output channel,
and a transport-plan correction relabels the output so its block law
matches the iid target exactly. The price of the correction is bounded
by the transport cost, and the bound tightens as n grows.
"""

from ocrate import (
    Channel,
    DistortionMatrix,
    MarkovTriple,
    Pmf,
    SimConfig,
    run_simulation,
)


def main():
    triple = MarkovTriple(Pmf([0.5, 0.5]), Channel.bsc(0.25),
                          Channel.identity(2))
    rho = DistortionMatrix.hamming(2)
    print("uniform binary pair, distortion target 0.25, r=0.6, rc=0.6\n")
    print("   n   tv before   tv after     mean  <=  bound")
    for n in (2, 4, 6):
        cfg = SimConfig(triple=triple, rho=rho, n=n, r=0.6, rc=0.6,
                        trials=16, seed=0, mode="exact")
        rep = run_simulation(cfg)
        print(f"  {n:2d}   {rep.tv_pre_correction:9.4f}   "
              f"{rep.tv_output_vs_iid:9.2e}   {rep.mean_distortion:.4f}  <=  "
              f"{rep.distortion_bound:.4f}")
    print("\nafter correction the output law is the iid target exactly;")
    print("the mean distortion stays under the transport-cost bound")

    big = SimConfig(triple=triple, rho=rho, n=24, r=0.25, rc=0.0,
                    trials=200, seed=0)
    rep = run_simulation(big)
    print(f"\nat n={big.n} enumeration no longer fits, mode={rep.mode}:")
    print(f"  sampled mean distortion {rep.mean_distortion:.4f} "
          f"(plug-in tv {rep.tv_output_vs_iid:.3f}, biased upward)")
    print("\nsame run via: ocrate simulate --config "
          "demos/configs/simulate.json --out report.json")


if __name__ == "__main__":
    main()
