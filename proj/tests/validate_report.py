"""Validate a meqlab report.json against the shipped schema."""
import json
import sys

import jsonschema


def main() -> int:
    schema_path, report_path = sys.argv[1], sys.argv[2]
    with open(schema_path) as f:
        schema = json.load(f)
    with open(report_path) as f:
        report = json.load(f)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(report), key=lambda e: list(e.absolute_path))
    for e in errors[:20]:
        print(f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}")
    if errors:
        return 1
    print(f"{report_path}: valid")
    return 0


if __name__ == "__main__":
    sys.exit(main())
