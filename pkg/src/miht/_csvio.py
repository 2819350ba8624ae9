"""Self-describing CSV output shared by the experiment harness.

Every artifact starts with a comment line recording the generating
parameters, then a header row, then data rows. Floats are written with
repr so replays are byte-identical.
"""


def format_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(format_value(x) for x in v)
    return str(v)


def comment_line(fields: dict) -> str:
    return "# " + " ".join(f"{k}={format_value(v)}" for k, v in sorted(fields.items()))


def parse_comment(line: str) -> dict:
    if not line.startswith("#"):
        raise ValueError("missing leading comment line")
    out = {}
    for tok in line.lstrip("#").split():
        k, _, v = tok.partition("=")
        out[k] = v
    return out


def write_rows(path, meta: dict, fieldnames, rows) -> None:
    with open(path, "w") as fh:
        fh.write(comment_line(meta) + "\n")
        fh.write(",".join(fieldnames) + "\n")
        for row in rows:
            fh.write(",".join(format_value(row[k]) for k in fieldnames) + "\n")
