"""Walk the full certification pipeline on a synthetic SIL1 scenario.

Allocates the budget, draws teach-in samples from known ground truth,
fits, certifies at the worst-case envelope, and prints the verdict next
to the true error the estimates never get to see.
"""

import argparse

import numpy as np

from sil_assessor.budget import SilLevel, allocate, verdict
from sil_assessor.classifier import (GaussianClassParams, LabeledSample, Label,
                                     ThresholdPolicy, certify, error_probabilities,
                                     fit_class, select_threshold,
                                     worst_case_envelope)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=100, help="teach-in size per class")
    ap.add_argument("--m-left", type=float, default=0.0)
    ap.add_argument("--m-right", type=float, default=6.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--hardware-share", type=float, default=0.05)
    args = ap.parse_args()

    budget = allocate(SilLevel.SIL1, args.hardware_share)
    print(f"budget: threshold={budget.pfd_threshold} hardware={budget.hardware_share} "
          f"ai={budget.ai_share} alpha_max={budget.alpha_max} gamma={budget.gamma}")

    truth_left = GaussianClassParams(m=args.m_left, sigma=args.sigma)
    truth_right = GaussianClassParams(m=args.m_right, sigma=args.sigma)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    left = fit_class(LabeledSample(
        values=tuple(rng.normal(truth_left.m, truth_left.sigma, args.n)),
        label=Label.LEFT))
    right = fit_class(LabeledSample(
        values=tuple(rng.normal(truth_right.m, truth_right.sigma, args.n)),
        label=Label.RIGHT))
    print(f"estimates: left m={left.m:.4f} sigma={left.sigma:.4f}  "
          f"right m={right.m:.4f} sigma={right.sigma:.4f}  (n={args.n})")

    z = select_threshold(left, right, ThresholdPolicy.equal_error())
    point = error_probabilities(left, right, z)
    print(f"threshold: z={z:.4f} (equal error)  alpha={point.alpha:.6f} "
          f"beta={point.beta:.6f}")

    env = worst_case_envelope(left, right, budget.gamma)
    print(f"envelope (gamma={budget.gamma}): sigma_up=({env.sigma_left_up:.4f}, "
          f"{env.sigma_right_up:.4f})  m_worst=({env.m_left_worst:.4f}, "
          f"{env.m_right_worst:.4f})")

    cert = certify(left, right, z, budget.gamma)
    print(f"certified: alpha_worst={cert.alpha_worst:.6f}  "
          f"dangerous={cert.certified_dangerous:.6f} "
          f"(= alpha_worst + {cert.gamma_terms}*gamma)")

    v = verdict(budget, cert)
    true_err = error_probabilities(truth_left, truth_right, z)
    print(f"verdict: {v.exit_label} (margin {v.margin:.6f})")
    print(f"ground truth at z: alpha={true_err.alpha:.6f}  "
          f"covered={true_err.alpha <= cert.alpha_worst}")


if __name__ == "__main__":
    main()
