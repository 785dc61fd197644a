#!/usr/bin/env python3
"""Validate pliflows JSON summaries against docs/summary.schema.json."""
import json
import sys

import jsonschema


def main(argv):
    if len(argv) < 3:
        print("usage: validate_summary.py SCHEMA SUMMARY...", file=sys.stderr)
        return 2
    with open(argv[1]) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    bad = 0
    for path in argv[2:]:
        with open(path) as f:
            doc = json.load(f)
        for err in validator.iter_errors(doc):
            bad += 1
            print(f"{path}: {'/'.join(map(str, err.absolute_path))}: {err.message}", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
