r"""
Column-oriented result tables.

Two on-disk formats are supported:

* ``csv``: ``# key: <json>`` metadata lines, a header row, then one row per record. Floats are written with 17 significant digits so that reading a table back recovers every value exactly; booleans are ``true``/``false`` and missing values ``nan``. Columns holding text are named in a final ``# text_columns`` line and read back verbatim.
* ``records``: a JSON object ``{"metadata": {...}, "columns": [...], "records": [{...}, ...]}`` with missing values as ``null``.
"""

import csv
import io
import json
import math

import numpy as np

TEXT_COLUMNS_KEY = "text_columns"


def _cell(value):
    if value is None:
        return "nan"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def _parse_cell(text):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return float(text)
    except ValueError:
        return text


def _plain(value):
    # JSON-ready python scalar, NaN as null
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) else value
    return value


def _metadata_value(value):
    if isinstance(value, dict):
        return {str(k): _metadata_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_metadata_value(v) for v in value]
    return _plain(value)


class ResultTable:
    r"""
    A table with a fixed column order and a metadata block.

    Columns whose name starts with ``p_`` hold probabilities and are checked to lie in :math:`[0, 1]` (``nan`` allowed).

    Args:
        columns (list): column names
        rows (list): initial rows, each a sequence matching ``columns``
        metadata (dict): JSON-serializable run information
    """

    def __init__(self, columns, rows=None, metadata=None):
        self.columns = list(columns)
        self.rows = []
        self.metadata = dict(metadata or {})
        for row in rows or []:
            self.add_row(row)

    def __len__(self):
        return len(self.rows)

    def add_row(self, row):
        row = list(row)
        assert len(row) == len(self.columns), "row has {:} cells, expected {:}".format(
            len(row), len(self.columns)
        )
        for name, value in zip(self.columns, row):
            if name.startswith("p_") and value is not None:
                value = float(value)
                if not (math.isnan(value) or 0.0 <= value <= 1.0):
                    raise ValueError("probability column {:} out of [0, 1]: {:}".format(name, value))
        self.rows.append(row)

    def extend(self, rows):
        for row in rows:
            self.add_row(row)

    def column(self, name):
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def text_columns(self):
        r"""
        Names of the columns holding at least one string.
        """
        return [
            name
            for j, name in enumerate(self.columns)
            if any(isinstance(row[j], str) for row in self.rows)
        ]

    def records(self):
        return [dict(zip(self.columns, row)) for row in self.rows]

    def to_csv(self):
        buffer = io.StringIO()
        for key, value in self.metadata.items():
            buffer.write("# {:}: {:}\n".format(key, json.dumps(_metadata_value(value), sort_keys=True)))
        text = self.text_columns()
        if text:
            buffer.write("# {:}: {:}\n".format(TEXT_COLUMNS_KEY, json.dumps(text)))
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buffer.getvalue()

    def to_records(self):
        doc = {
            "metadata": _metadata_value(self.metadata),
            "columns": self.columns,
            "records": [{k: _plain(v) for k, v in zip(self.columns, row)} for row in self.rows],
        }
        return json.dumps(doc, indent=1) + "\n"

    def dumps(self, format="csv"):
        if format == "csv":
            return self.to_csv()
        if format == "records":
            return self.to_records()
        raise ValueError("unknown table format {!r}, choose csv or records".format(format))

    def write(self, path, format="csv"):
        with open(path, "w") as f:
            f.write(self.dumps(format))

    @classmethod
    def loads(cls, text):
        r"""
        Parse a table written by :meth:`dumps` in either format.
        """
        if text.lstrip().startswith("{"):
            doc = json.loads(text)
            columns = doc["columns"]
            rows = [[rec[c] for c in columns] for rec in doc["records"]]
            return cls(columns, rows, doc["metadata"])

        metadata = {}
        body = []
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                metadata[key] = json.loads(value)
            elif line:
                body.append(line)
        text_names = set(metadata.pop(TEXT_COLUMNS_KEY, []))
        reader = csv.reader(body)
        columns = next(reader)
        verbatim = [name in text_names for name in columns]
        rows = [
            [c if keep else _parse_cell(c) for c, keep in zip(row, verbatim)] for row in reader
        ]
        return cls(columns, rows, metadata)

    @classmethod
    def read(cls, path):
        with open(path) as f:
            return cls.loads(f.read())
