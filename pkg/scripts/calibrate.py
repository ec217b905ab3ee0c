"""Re-measure the desk-scale metrics and compare them with golden.yaml."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from console import banner, configure_logging, failure, field, success  # noqa: E402
from executor import Policy  # noqa: E402
from experiments import SweepConfig, check_regret_windows, regret_scaling, run_validation  # noqa: E402
from rng import SeedStreams  # noqa: E402


def calibrate(seed: int, full: bool) -> bool:
    """Run the regret sweep and the exponent suites; True if every window holds."""
    banner("LQR-PG calibration")
    ok = True

    print("\n1️⃣ Regret scaling on the scalar benchmark...")
    sweep = SweepConfig.named("regret_scalar" if full else "regret_scalar_quick")
    result = regret_scaling(sweep, SeedStreams(seed))
    for policy in (Policy.LEARNER, Policy.FIXED, Policy.OPTIMAL):
        fit = result.fits[policy]
        field(f"{policy.value} slope", f"{fit.slope:.4f} ± {fit.slope_stderr:.4f} (r2 {fit.r2:.3f})")
    field("divergence rate", f"{result.divergence_rate:.0%}")
    for name, passed in check_regret_windows(result).items():
        (success if passed else failure)(f"regret window {name}")
        ok &= passed

    print("\n2️⃣ Exponent suites...")
    report = run_validation(seed=seed, quick=not full, only=["exploration_exponent", "gradient_fidelity"])
    for suite in report.suites:
        line = f"{suite.name}: {suite.metric:.4f} in {suite.threshold} ({suite.detail})"
        (success if suite.passed else failure)(line)
    ok &= report.passed

    print("\n" + "=" * 50)
    if ok:
        success("golden windows reproduced")
    else:
        failure("some metrics left their golden window; revisit profiles.yaml before editing golden.yaml")
    return ok


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--full", action="store_true", help="full-size sweep and sample counts")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    args = parser.parse_args()
    configure_logging(args.verbose)
    sys.exit(0 if calibrate(args.seed, args.full) else 1)
