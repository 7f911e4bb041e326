# Copyright 2026 The greenmig Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Solve an exported LP file with HiGHS and compare against a known optimum.

    python3 tools/lp_crosscheck.py build/acceptance_two_dc.lp 401.1
"""

import argparse
import sys

import highspy


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("lp")
    ap.add_argument("expected", type=float, nargs="?")
    ap.add_argument("--tol", type=float, default=1e-6, help="relative tolerance")
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.lp}", file=sys.stderr)
        return 2
    h.run()
    status = h.getModelStatus()
    value = h.getInfo().objective_function_value
    print(f"{h.modelStatusToString(status)} objective {value:.9g}")
    if status != highspy.HighsModelStatus.kOptimal:
        return 1
    if args.expected is None:
        return 0
    ok = abs(value - args.expected) <= args.tol * max(1.0, abs(args.expected))
    print(("match" if ok else "MISMATCH") + f" (expected {args.expected:.9g})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
