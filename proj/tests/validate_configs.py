"""Validate every shipped config against the published JSON schema."""
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for path in sorted(pathlib.Path(sys.argv[2]).glob("*.json")):
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for error in errors:
            print(f"{path.name}: {error.json_path}: {error.message}")
        failures += bool(errors)
        print(f"{path.name}: {'ok' if not errors else 'INVALID'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
