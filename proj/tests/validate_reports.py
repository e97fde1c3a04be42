# Copyright 2026 The gamma-audit Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Runs every subcommand and validates its JSON report against the schema."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main(binary: str, schema_path: str) -> int:
    schema = json.loads(pathlib.Path(schema_path).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        data = tmp / "d.csv"
        common = ["--data", str(data), "--preds", str(tmp / "d.w.csv")]
        runs = {
            "synth": ["synth", "--scenario", "figure-b", "--n", "300", "--seed", "3",
                      "--out", str(data)],
            "audit": ["audit", *common, "--alt", str(tmp / "d.w_b.csv")],
            "audit-exact": ["audit", *common, "--alt", str(tmp / "d.w_b.csv"),
                            "--scaling", "exact"],
            "compare": ["compare", *common, "--alt", str(tmp / "d.w_b.csv")],
            "pareto": ["pareto", *common, "--alt", str(tmp / "d.w_b.csv"),
                       "--epsilon", "0.1"],
            "fair-erm": ["fair-erm", *common, "--alt", str(tmp / "d.w_b.csv"),
                         "--epsilon", "0.05", "--alpha1", "0.05", "--gamma", "inf"],
            "theorem-check": ["theorem-check", "--theorem", "3"],
        }
        for name, args in runs.items():
            # synth already uses --out for its CSV stem; its report is stdout.
            report = tmp / f"{name}.json"
            extra = [] if name == "synth" else ["--out", str(report)]
            proc = subprocess.run([binary, *args, *extra],
                                  capture_output=True, text=True, check=False)
            if name == "synth":
                report.write_text(proc.stdout)
            if proc.returncode != 0:
                print(f"FAIL {name}: exit {proc.returncode}: {proc.stderr.strip()}")
                failures += 1
                continue
            errors = sorted(validator.iter_errors(json.loads(report.read_text())),
                            key=lambda e: list(e.path))
            for e in errors:
                print(f"FAIL {name}: {'/'.join(map(str, e.path))}: {e.message}")
            failures += bool(errors)
            if not errors:
                print(f"ok   {name}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
