"""Sampled lengths of the evident bridges between consecutive Bunce-Deddens stages."""

import argparse

from bdqms.tunnels import bd_bridge_length_estimate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sigma", type=int, nargs="+", default=[2, 3, 2])
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--cutoff", type=int, default=3)
    parser.add_argument("--coefficient", choices=["corrected", "literal"], default="corrected")
    args = parser.parse_args()
    print("m,samples,forward_sup,backward_sup,target_2^-(m+1),max_candidate_lip")
    for m in range(1, len(args.sigma)):
        est = bd_bridge_length_estimate(args.sigma, m, samples=args.samples, seed=m, cutoff=args.cutoff,
                                        norm_coefficient=args.coefficient)
        fwd = max(r["distance"] for r in est.forward)
        bwd = max(r["distance"] for r in est.backward)
        lip = max(r["lip_candidate"] for r in est.per_sample)
        print(f"{m},{args.samples},{fwd:.6g},{bwd:.6g},{2.0 ** -(m + 1):.6g},{lip:.6g}")


if __name__ == "__main__":
    main()
