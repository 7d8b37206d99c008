"""Runs every CLI command on a small world and validates the JSON it emits."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema
from referencing import Registry, Resource


def load_schemas(root):
    schemas = {p.name: json.loads(p.read_text()) for p in root.glob("*.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(s)) for name, s in schemas.items()
    )
    return schemas, registry


def main():
    binary, schema_dir = Path(sys.argv[1]), Path(sys.argv[2])
    schemas, registry = load_schemas(schema_dir)

    def check(instance, name, what):
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.path))
        for e in errors[:5]:
            print(f"{what}: {'/'.join(map(str, e.path))}: {e.message}")
        return not errors

    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        data, rank, binary_model = out / "data.json", out / "rank.json", out / "binary.json"
        commands = [
            ["synth", "--classes", "4", "--scenes-per-class", "15", "--k", "3", "--out", data],
            ["train", "--data", data, "--k", "3", "--epochs", "2", "--out", rank],
            ["train", "--data", data, "--loss", "binary", "--epochs", "2", "--out", binary_model],
            ["rank", "--data", data, "--model", rank, "--n", "20", "--svg", "--out", out / "explanations.json"],
            ["counterfactual", "--data", data, "--model", rank, "--n", "20", "--out", out / "counterfactuals.json"],
            ["foil", "--data", data, "--model", binary_model, "--out", out / "foil.json"],
            ["eval", "--data", data, "--model", rank, "--k", "3", "--n", "20", "--out", out / "eval.json"],
        ]
        for cmd in commands:
            r = subprocess.run([binary, *map(str, cmd)], capture_output=True, text=True)
            if r.returncode != 0:
                print(f"{cmd[0]} exited {r.returncode}: {r.stderr}")
                ok = False
                continue
            timing = json.loads(r.stderr.strip().splitlines()[-1])
            ok &= check(timing, "timing_record.json", f"{cmd[0]} timing")

        outputs = {
            "data.json": "dataset.json",
            "rank.json": "checkpoint.json",
            "binary.json": "checkpoint.json",
            "rank.report.json": "train_report.json",
            "binary.report.json": "train_report.json",
            "explanations.json": "explanations.json",
            "counterfactuals.json": "counterfactuals.json",
            "foil.json": "foil_report.json",
            "eval.json": "eval_report.json",
        }
        for file, schema in outputs.items():
            path = out / file
            if not path.exists():
                print(f"missing {file}")
                ok = False
                continue
            ok &= check(json.loads(path.read_text()), schema, file)

        failures = [
            (["rank", "--bogus"], 2),
            (["rank", "--data", out / "none.json", "--model", rank], 3),
            (["foil", "--data", data, "--model", rank], 2),
        ]
        (out / "corrupt.json").write_text('{"format": 1,')
        failures.append((["rank", "--data", data, "--model", out / "corrupt.json"], 4))
        for cmd, code in failures:
            r = subprocess.run([binary, *map(str, cmd)], capture_output=True, text=True)
            record = json.loads(r.stderr.strip().splitlines()[-1])
            ok &= check(record, "error_record.json", f"{cmd[0]} error")
            if r.returncode != code or record["exit_code"] != code:
                print(f"{cmd}: exit {r.returncode}, record {record['exit_code']}, expected {code}")
                ok = False

    print("all outputs valid" if ok else "schema check failed")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
