"""Result documents: exact rationals in JSON, decimals in CSV.

Every exact number is written as ``{"num", "den", "decimal"}`` so a reader can recover it without
rounding, while CSV tables carry plain decimals for plotting.

Examples
--------

    >>> rational(Fraction(1, 3))
    {'num': 1, 'den': 3, 'decimal': '0.333333333333'}
    >>> print(dumps({2: Fraction(1, 2), 'flag': numpy.bool_(True)}))
    {
      "2": {
        "decimal": "0.5",
        "den": 2,
        "num": 1
      },
      "flag": true
    }
"""
import io
import logging
import numbers
import pathlib

import anyconfig
import munch
import numpy
import pandas

import dbinfer

logger = logging.getLogger(__name__)

Fraction = dbinfer.Fraction


def rational(value):
    """The JSON form of an exact number; floats and ``None`` pass through."""
    if value is None or isinstance(value, (bool, numpy.bool_)):
        return None if value is None else bool(value)
    if isinstance(value, (float, numpy.floating)):
        return float(value)
    value = dbinfer.as_fraction(value)
    return {
        "num": value.numerator,
        "den": value.denominator,
        "decimal": dbinfer.decimal(value, dbinfer.config.settings.digits),
    }


def jsonable(value):
    """Convert a result tree of Munches, arrays and Fractions into JSON types."""
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, numpy.ndarray):
        return [jsonable(item) for item in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, (bool, numpy.bool_)):
        return bool(value)
    if isinstance(value, (numbers.Integral, numpy.integer)):
        return int(value)
    if isinstance(value, (Fraction, numbers.Rational)):
        return rational(value)
    if isinstance(value, (float, numpy.floating)):
        return float(value)
    return value


def _plain(value):
    if isinstance(value, (Fraction, numbers.Rational)) and not isinstance(value, numbers.Integral):
        return float(value)
    if isinstance(value, (list, tuple, numpy.ndarray)):
        return " ".join(str(_plain(item)) for item in list(value))
    if isinstance(value, dict):
        return None
    return value


def table(document) -> pandas.DataFrame:
    """A flat table of a result: its rows when it has them, otherwise one row of its scalars."""
    if "rows" in document:
        records = document["rows"]
    elif "contrasts" in document and "aepo" in document:
        records = [
            {"kind": "epo", "unit": unit, "label": d, "value": value, "positivity": value is not None}
            for d, values in document["epo"].items()
            for unit, value in enumerate(values)
        ] + [
            {"kind": "aepo", "unit": None, "label": d, "value": value,
             "positivity": document["positivity"][d]["holds"]}
            for d, value in document["aepo"].items()
        ] + [
            {"kind": "aeed", "unit": None, "label": f"{row['d']},{row['d_prime']}", "value": row["aeed"],
             "positivity": None}
            for row in document["contrasts"]
        ]
    elif "marginal" in document:
        records = [
            {"unit": unit, "label": d, "pi": pi}
            for d, values in document["marginal"].items()
            for unit, pi in zip(document["units"], list(values))
        ]
    elif "nurva" in document:
        records = []
        for verdict in (document["nurva"], document.get("sutva")):
            if verdict is not None:
                found = verdict["counterexample"] or {}
                records.append(
                    {"assumption": verdict["assumption"], "holds": verdict["holds"], "scope": verdict["scope"],
                     **{key: found.get(key) for key in ("unit", "label", "z", "z_prime", "y", "y_prime")}}
                )
    else:
        records = [{key: value for key, value in document.items() if not isinstance(value, dict)}]
    return pandas.DataFrame([{key: _plain(value) for key, value in dict(record).items()} for record in records])


def dumps(document, format="json") -> str:
    """Serialize a result as JSON with sorted keys or as CSV."""
    if format == "csv":
        buffer = io.StringIO()
        table(document).to_csv(buffer, index=False, float_format="%.12g")
        return buffer.getvalue()
    if format != "json":
        raise dbinfer.ValidationError(f"unknown output format {format!r}")
    return anyconfig.dumps(jsonable(document), ac_parser="json", indent=2, sort_keys=True)


def write(document, path, format=None) -> pathlib.Path:
    """Write a result next to ``path``, choosing the format from the suffix when not given."""
    path = pathlib.Path(path)
    format = format or ("csv" if path.suffix == ".csv" else "json")
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "json":
        anyconfig.dump(jsonable(document), str(path), ac_parser="json", indent=2, sort_keys=True)
    else:
        path.write_text(dumps(document, format))
    logger.info("wrote %s", path)
    return path


def probabilities_document(probs, joint=True) -> munch.Munch:
    """The marginal and (optionally) joint exposure probabilities with their provenance."""
    document = munch.Munch(
        N=probs.N,
        labels=list(probs.labels),
        units=list(probs.units),
        provenance=probs.provenance,
        marginal={d: probs.pi(d) for d in probs.labels},
    )
    if joint:
        document.joint = {f"{d},{e}": probs.pi_joint(d, e) for d in probs.labels for e in probs.labels}
        document.zero_joint_pairs = {d: [list(pair) for pair in probs.zero_joint_pairs(d)] for d in probs.labels}
    return document

