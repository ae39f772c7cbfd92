"""Checks the cockpit message fixtures against the published JSON schema."""
import json
import pathlib
import sys

import jsonschema


def lines(path):
    return [l for l in path.read_text().splitlines() if l.strip()]


def main():
    schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
    fixtures = pathlib.Path(sys.argv[2])
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for line in lines(fixtures / "cockpit_messages.jsonl"):
        errors = list(validator.iter_errors(json.loads(line)))
        if errors:
            failures += 1
            print(f"valid fixture rejected: {line}: {errors[0].message}")
    for line in lines(fixtures / "cockpit_messages_invalid.jsonl"):
        if validator.is_valid(json.loads(line)):
            failures += 1
            print(f"invalid fixture accepted: {line}")
    for line in lines(fixtures / "trace_hold_x.jsonl"):
        message = json.loads(line)
        message.pop("tick")
        if not validator.is_valid(message):
            failures += 1
            print(f"trace entry rejected: {line}")
    print("schema fixtures:", "FAIL" if failures else "ok")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
