"""JSON model and report files (schema version 1).

Every rational is written as a string such as ``"7/2"``; binary floats are
rejected on input.  Parse errors name the offending field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .arbitrage import ArbitrageCertificate
from .engine import ConsistentPriceProcess, RecursionTrace
from .exact import fmt, rational
from .market import BankAccountPrices, BidAskMatrix, MarketModel, ValidationError, bank_prices, bid_ask_violations
from .polytopes import Polytope
from .tree import Node, ScenarioTree, TreeError

VERSION = 1


class ModelFileError(ValueError):
    """Unreadable or invalid input file; ``problems`` lists each issue with its field path."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _rat(value: Any, where: str) -> Fraction:
    if isinstance(value, float):
        raise ModelFileError([f"{where}: binary float {value!r} not allowed, write it as a string"])
    try:
        return rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ModelFileError([f"{where}: {exc}"]) from None


def _vec(values: Any, where: str) -> tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise ModelFileError([f"{where}: expected a list"])
    return tuple(_rat(v, f"{where}[{i}]") for i, v in enumerate(values))


def _read_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFileError([f"{path}: {exc.strerror}"]) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError([f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"]) from None


def _write_json(obj: Any, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------

def model_from_dict(doc: Any) -> MarketModel:
    if not isinstance(doc, dict):
        raise ModelFileError(["top level: expected an object"])
    if doc.get("version") != VERSION:
        raise ModelFileError([f"version: expected {VERSION}, got {doc.get('version')!r}"])
    kind = doc.get("kind")
    if kind not in ("general", "bank"):
        raise ModelFileError([f"kind: expected 'general' or 'bank', got {kind!r}"])
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise ModelFileError(["nodes: expected a nonempty list"])
    d = doc.get("assets")
    problems, nodes, data = [], [], {}
    for k, raw in enumerate(raw_nodes):
        where = f"nodes[{k}]"
        if not isinstance(raw, dict):
            problems.append(f"{where}: expected an object")
            continue
        try:
            nid = raw["id"]
            t = raw["t"]
            if not isinstance(nid, str) or not isinstance(t, int):
                raise ModelFileError([f"{where}: id must be a string and t an integer"])
            node = Node(nid, t, raw.get("parent"), _rat(raw.get("prob"), f"{where}.prob"))
            if kind == "general":
                rows = raw.get("matrix")
                if not isinstance(rows, list):
                    raise ModelFileError([f"{where}.matrix: expected a list of rows"])
                m = [_vec(r, f"{where}.matrix[{i}]") for i, r in enumerate(rows)]
                bad = bid_ask_violations(m)
                if bad:
                    raise ModelFileError([f"{where}.matrix: {b}" for b in bad])
                data[nid] = BidAskMatrix(tuple(m))
            else:
                pr = raw.get("prices")
                if not isinstance(pr, dict):
                    raise ModelFileError([f"{where}.prices: expected {{bid, ask}}"])
                bid, ask = _vec(pr.get("bid"), f"{where}.prices.bid"), _vec(pr.get("ask"), f"{where}.prices.ask")
                if d is not None and len(bid) == d - 1:
                    bid, ask = (Fraction(1),) + bid, (Fraction(1),) + ask
                try:
                    data[nid] = bank_prices(bid, ask)
                except ValidationError as exc:
                    raise ModelFileError([f"{where}.prices: {v}" for v in exc.violations]) from None
            if d is not None and data[nid].d != d:
                raise ModelFileError([f"{where}: {data[nid].d} assets, header says {d}"])
            nodes.append(node)
        except KeyError as exc:
            problems.append(f"{where}: missing field {exc.args[0]!r}")
        except ModelFileError as exc:
            problems.extend(exc.problems)
    if problems:
        raise ModelFileError(problems)
    try:
        tree = ScenarioTree(nodes)
    except TreeError as exc:
        raise ModelFileError([f"tree: {p}" for p in str(exc).split("; ")]) from None
    if "horizon" in doc and doc["horizon"] != tree.horizon:
        raise ModelFileError([f"horizon: header says {doc['horizon']}, nodes reach {tree.horizon}"])
    try:
        return MarketModel(tree, kind, data)
    except ValidationError as exc:
        raise ModelFileError(exc.violations) from None


def model_to_dict(model: MarketModel) -> dict:
    nodes = []
    for n in model.tree.nodes:
        entry: dict = {"id": n.id, "t": n.t, "parent": n.parent, "prob": str(n.prob)}
        v = model.data[n.id]
        if isinstance(v, BankAccountPrices):
            entry["prices"] = {"bid": fmt(v.bid), "ask": fmt(v.ask)}
        else:
            entry["matrix"] = v.as_strings()
        nodes.append(entry)
    return {"version": VERSION, "kind": model.kind, "horizon": model.tree.horizon, "assets": model.d, "nodes": nodes}


def load_model(path) -> MarketModel:
    return model_from_dict(_read_json(path))


def save_model(model: MarketModel, path) -> None:
    _write_json(model_to_dict(model), path)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def _set_summary(value) -> Any:
    if value.is_empty:
        return "empty"
    if isinstance(value, Polytope):
        return {"vertices": [fmt(v) for v in value.vertices]}
    return {"rays": [fmt(r) for r in value.rays], "lineality": [fmt(l) for l in value.lineality]}


def trace_summary(trace: RecursionTrace) -> dict:
    out = {}
    for nid in trace.model.tree.ids:
        entry = {"value": _set_summary(trace.values[nid])}
        if nid in trace.supports:
            entry["support"] = _set_summary(trace.supports[nid])
        out[nid] = entry
    return out


@dataclass
class Report:
    """Output of ``check`` or ``arbitrage``: a verdict plus the evidence for it."""

    verdict: bool
    traces: dict[str, dict] = field(default_factory=dict)   # "cone"/"box" -> per-node summary
    cpp: ConsistentPriceProcess | None = None
    failure: tuple[int, list[str]] | None = None
    arbitrage: ArbitrageCertificate | None = None


def _vec_map(m: dict) -> dict:
    return {k: fmt(v) for k, v in m.items()}


def _parse_vec_map(m: Any, where: str) -> dict:
    if not isinstance(m, dict):
        raise ModelFileError([f"{where}: expected an object"])
    return {k: _vec(v, f"{where}.{k}") for k, v in m.items()}


def report_to_dict(rep: Report) -> dict:
    doc: dict = {"version": VERSION, "verdict": "holds" if rep.verdict else "fails", "traces": rep.traces}
    if rep.cpp is not None:
        doc["consistent_price_process"] = {"Z": _vec_map(rep.cpp.Z), "slack": str(rep.cpp.slack)}
    if rep.failure is not None:
        doc["failure"] = {"n": rep.failure[0], "A_n": list(rep.failure[1])}
    if rep.arbitrage is not None:
        c = rep.arbitrage
        doc["arbitrage"] = {
            "n": c.n, "A_n": list(c.failure_set), "increments": _vec_map(c.x),
            "m": c.m, "B_m": list(c.adjusted), "eps": _vec_map(c.eps), "eps_mode": dict(c.eps_mode),
            "lambda": str(c.lam), "tightened": {k: v.as_strings() for k, v in c.tightened.items()},
            "theta": _vec_map(c.theta), "payoff": _vec_map(c.payoff),
        }
    return doc


def report_from_dict(doc: Any) -> Report:
    if not isinstance(doc, dict) or doc.get("version") != VERSION:
        raise ModelFileError(["version: expected a version 1 report"])
    if doc.get("verdict") not in ("holds", "fails"):
        raise ModelFileError([f"verdict: expected 'holds' or 'fails', got {doc.get('verdict')!r}"])
    rep = Report(doc["verdict"] == "holds", traces=doc.get("traces", {}))
    if "consistent_price_process" in doc:
        c = doc["consistent_price_process"]
        rep.cpp = ConsistentPriceProcess(_parse_vec_map(c.get("Z"), "consistent_price_process.Z"),
                                         _rat(c.get("slack", "0"), "consistent_price_process.slack"))
    if "failure" in doc:
        rep.failure = (int(doc["failure"]["n"]), list(doc["failure"]["A_n"]))
    if "arbitrage" in doc:
        a = doc["arbitrage"]
        try:
            tightened = {k: BidAskMatrix(tuple(_vec(r, f"arbitrage.tightened.{k}") for r in v))
                         for k, v in a["tightened"].items()}
            rep.arbitrage = ArbitrageCertificate(
                n=int(a["n"]), failure_set=list(a["A_n"]), x=_parse_vec_map(a["increments"], "arbitrage.increments"),
                m=int(a["m"]), adjusted=list(a["B_m"]), eps=_parse_vec_map(a["eps"], "arbitrage.eps"),
                eps_mode=dict(a["eps_mode"]), lam=_rat(a["lambda"], "arbitrage.lambda"), tightened=tightened,
                theta=_parse_vec_map(a["theta"], "arbitrage.theta"),
                payoff=_parse_vec_map(a["payoff"], "arbitrage.payoff"),
            )
        except KeyError as exc:
            raise ModelFileError([f"arbitrage: missing field {exc.args[0]!r}"]) from None
    return rep


def load_report(path) -> Report:
    return report_from_dict(_read_json(path))


def save_report(rep: Report, path) -> None:
    _write_json(report_to_dict(rep), path)
