"""JSON serialization of models, count data, profiles and series.

All rationals travel as "numerator/denominator" strings (plain integers
accepted) so files round-trip exactly.  Every file carries a versioned
``schema`` field.  Loaders raise ValidationError with a field path on any
malformed input.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .cylhom import (
    ChainComplexData, CountData, CountEntry, Insertion, Orbit, OrbitSet,
)
from .errors import ValidationError
from .gw import CorrelatorTable, TargetModel
from .hierarchy import GradingProfile, SignProfile

MODEL_SCHEMA = "sftlab-model/1"
COUNTS_SCHEMA = "sftlab-counts/1"
PROFILES_SCHEMA = "sftlab-profiles/1"
TABLE_SCHEMA = "sftlab-table/1"
LEDGER_SCHEMA = "sftlab-ledger/1"
REPORT_SCHEMA = "sftlab-report/1"


def encode_rational(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def decode_rational(x, path="value") -> Fraction:
    try:
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, int):
            return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational {x!r}: {exc}", path) from None
    raise ValidationError(f"rationals must be strings or integers, got {type(x).__name__}",
                          path)


def _require(obj, key, path):
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", path)
    return obj[key]


def _check_schema(obj, expected, path):
    schema = _require(obj, "schema", path)
    if schema != expected:
        raise ValidationError(f"schema {schema!r}, expected {expected!r}",
                              f"{path}.schema")


def load_json(path):
    p = Path(path)
    if not p.exists():
        raise ValidationError("file does not exist", str(path))
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}", str(path)) from None


def fixture_path(name: str) -> Path:
    from importlib import resources
    return Path(str(resources.files("sftlab") / "fixtures" / name))


# -- models ------------------------------------------------------------------------


def model_to_dict(model: TargetModel) -> dict:
    return {
        "schema": MODEL_SCHEMA,
        "name": model.name,
        "classes": [{"id": c.id, "degree": c.degree} for c in model.classes],
        "unit": model.unit,
        "eta": [[encode_rational(x) for x in row] for row in model.eta],
        "h2_rank": model.h2_rank,
        "chern": list(model.chern),
        "divisor": model.divisor,
        "divisor_cup": ({cid: {b: encode_rational(v) for b, v in row.items()}
                         for cid, row in model.divisor_cup.items()}
                        if model.divisor_cup else None),
        "divisor_pairing": (list(model.divisor_pairing)
                            if model.divisor_pairing else None),
        "contact": model.contact,
        "primaries": [
            {"insertions": [[c, a] for c, a in key.insertions],
             "degree": list(key.degree),
             "value": encode_rational(v)}
            for key, v in sorted(model.primaries.items(),
                                 key=lambda kv: (kv[0].insertions, kv[0].degree))],
    }


def model_from_dict(obj: dict, path="model") -> TargetModel:
    _check_schema(obj, MODEL_SCHEMA, path)
    classes = [(c["id"], int(c["degree"]))
               for c in _require(obj, "classes", path)]
    eta = [[decode_rational(x, f"{path}.eta") for x in row]
           for row in _require(obj, "eta", path)]
    cup = obj.get("divisor_cup")
    if cup is not None:
        cup = {cid: {b: decode_rational(v, f"{path}.divisor_cup")
                     for b, v in row.items()} for cid, row in cup.items()}
    model = TargetModel(
        obj.get("name", "model"), classes, _require(obj, "unit", path), eta,
        h2_rank=obj.get("h2_rank", 0), chern=obj.get("chern", ()),
        divisor=obj.get("divisor"), divisor_cup=cup,
        divisor_pairing=obj.get("divisor_pairing"),
        contact=obj.get("contact", False))
    for k, p in enumerate(obj.get("primaries", [])):
        ppath = f"{path}.primaries[{k}]"
        key = model.key([(c, int(a)) for c, a in _require(p, "insertions", ppath)],
                        p.get("degree", ()))
        model.add_primary(key, decode_rational(_require(p, "value", ppath), ppath))
    return model


def load_model(path) -> TargetModel:
    return model_from_dict(load_json(path), str(path))


def save_model(model: TargetModel, path):
    Path(path).write_text(dumps_canonical(model_to_dict(model)))


# -- correlator tables ----------------------------------------------------------------


def table_to_dict(table: CorrelatorTable) -> dict:
    return {
        "schema": TABLE_SCHEMA,
        "model": table.model.name,
        "values": [
            {"insertions": [[c, a] for c, a in key.insertions],
             "degree": list(key.degree), "value": encode_rational(v)}
            for key, v in table.items_sorted()],
    }


def table_from_dict(obj, model: TargetModel, path="table") -> CorrelatorTable:
    _check_schema(obj, TABLE_SCHEMA, path)
    table = CorrelatorTable(model)
    for k, item in enumerate(obj.get("values", [])):
        ipath = f"{path}.values[{k}]"
        key = model.key([(c, int(a)) for c, a in _require(item, "insertions", ipath)],
                        item.get("degree", ()))
        table.set(key, decode_rational(_require(item, "value", ipath), ipath))
    return table


def load_table(path, model: TargetModel) -> CorrelatorTable:
    return table_from_dict(load_json(path), model, str(path))


def save_table(table: CorrelatorTable, path):
    Path(path).write_text(dumps_canonical(table_to_dict(table)))


# -- count data --------------------------------------------------------------------


def counts_to_dict(data: ChainComplexData) -> dict:
    out = {
        "schema": COUNTS_SCHEMA,
        "name": data.name,
        "equivariant": data.orbits.equivariant,
        "section_choice": data.counts.section_choice,
        "level_bound": data.level_bound,
        "t_order": data.t_order,
        "contact": data.contact,
        "orbits": [{"id": o.id, "degree": o.degree, "multiplicity": o.multiplicity,
                    "good": o.good} for o in data.orbits.orbits],
        "model": model_to_dict(data.model),
        "table": table_to_dict(data.table),
        "entries": [
            {"src": list(e.src), "dst": list(e.dst),
             "insertions": [[i.class_id, i.level, i.constrained]
                            for i in e.insertions],
             "degree": list(e.degree), "value": encode_rational(e.value)}
            for e in data.counts.entries],
    }
    if data.fiber_model is not None:
        out["fiber_model"] = model_to_dict(data.fiber_model)
        out["fiber_table"] = table_to_dict(data.fiber_table)
    if data.wedge_map:
        out["wedge_map"] = dict(sorted(data.wedge_map.items()))
    return out


def counts_from_dict(obj, path="counts") -> ChainComplexData:
    _check_schema(obj, COUNTS_SCHEMA, path)
    orbits = OrbitSet(
        [Orbit(o["id"], int(o["degree"]), int(o.get("multiplicity", 1)),
               bool(o.get("good", True)))
         for o in _require(obj, "orbits", path)],
        bool(_require(obj, "equivariant", path)))
    model = model_from_dict(_require(obj, "model", path), f"{path}.model")
    table = table_from_dict(_require(obj, "table", path), model, f"{path}.table")
    entries = []
    for k, e in enumerate(obj.get("entries", [])):
        epath = f"{path}.entries[{k}]"
        entries.append(CountEntry(
            tuple(_require(e, "src", epath)), tuple(_require(e, "dst", epath)),
            tuple(Insertion(str(c), int(a), bool(flag))
                  for c, a, flag in e.get("insertions", [])),
            tuple(int(x) for x in e.get("degree", [])),
            decode_rational(_require(e, "value", epath), epath)))
    fiber_model = fiber_table = None
    if obj.get("fiber_model") is not None:
        fiber_model = model_from_dict(obj["fiber_model"], f"{path}.fiber_model")
        fiber_table = table_from_dict(obj["fiber_table"], fiber_model,
                                      f"{path}.fiber_table")
    return ChainComplexData(
        orbits, CountData(entries, obj.get("section_choice", "generic")),
        model, table, obj.get("level_bound", 2), obj.get("t_order", 2),
        obj.get("contact", False), fiber_model, fiber_table,
        obj.get("wedge_map"), name=obj.get("name", "counts"))


def load_counts(path) -> ChainComplexData:
    return counts_from_dict(load_json(path), str(path))


def save_counts(data: ChainComplexData, path):
    Path(path).write_text(dumps_canonical(counts_to_dict(data)))


# -- grading / sign profiles -----------------------------------------------------------


def load_profiles(path):
    obj = load_json(path)
    _check_schema(obj, PROFILES_SCHEMA, str(path))
    p = str(path)
    half_dim = int(_require(obj, "half_dim", p))
    degrees = obj.get("q_degrees")
    grading = None
    if degrees is not None:
        grading = GradingProfile({int(k): int(v) for k, v in degrees.items()},
                                 half_dim)
    signs_obj = obj.get("signs") or {}
    explicit = {tuple(tup): int(eps)
                for tup, eps in signs_obj.get("explicit", [])}
    for tup, eps in explicit.items():
        if eps not in (-1, 0, 1):
            raise ValidationError(f"sign {eps} for {tup} not in -1..1",
                                  f"{p}.signs.explicit")
    signs = SignProfile(frozenset(int(b) for b in signs_obj.get("bad_covers", [])),
                        None, explicit)
    return {
        "name": obj.get("name", "profiles"),
        "half_dim": half_dim,
        "cover_bound": int(obj.get("cover_bound", 3)),
        "grading": grading,
        "signs": signs,
    }


# -- series ---------------------------------------------------------------------------


def series_to_dict(series) -> dict:
    table = series.table
    return {
        "variables": [v.name for v in table.variables],
        "terms": [
            {"factors": [[table.variables[p].name, e] for p, e in mono],
             "coefficient": encode_rational(c)}
            for mono, c in series.sorted_terms()],
    }


def dumps_canonical(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"
