"""YAML scenario files.

Layout::

    deadline: 0.6
    horizon: 0.6            # curve domain end, defaults to the deadline
    grid: {cells: 4000}     # or {dt: 1.5e-4}
    epsilon: 1.0e-5         # online slack, optional
    arrival:                # data arriving at the source
      - {kind: poly, c: 10, k: 2, offset: 0.1}
    nodes:
      - name: source
        energy: [{kind: poly, c: 100, k: 2, offset: 1}]
        rate: {name: shannon}
      - name: relay
        energy: [{kind: exp, c: 0.5, a: 7, offset: -0.5}]
        rate: {name: shannon}
      - name: receiver

Errors carry the line of the offending entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import yaml

from .curves import DEFAULT_CELLS, CurveError, PiecewiseCurve
from .multihop import Scenario
from .rate import rate_from_dict

__all__ = ["ScenarioError", "RunConfig", "load_scenario", "loads_scenario", "dump_scenario"]


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<scenario>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True, eq=False)
class RunConfig:
    scenario: Scenario
    cells: int = DEFAULT_CELLS
    epsilon: float | None = None
    target_bits: float | None = None
    t_max: float | None = None
    out_dir: str | None = None

    def with_dt(self, dt: float) -> RunConfig:
        return replace(self, cells=cells_for(self.scenario.deadline, dt))


def cells_for(T: float, dt: float) -> int:
    if not dt > 0:
        raise ScenarioError(f"grid step must be positive, got {dt}")
    return max(1, math.ceil(T / dt - 1e-9))


class _Doc:
    """Plain python data plus the source line of every mapping entry."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.lines: dict[tuple, int] = {}
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ScenarioError(f"not valid YAML: {getattr(exc, 'problem', exc)}",
                                mark.line + 1 if mark else None, source) from None
        if node is None:
            raise ScenarioError("empty scenario file", 1, source)
        self._loader = yaml.SafeLoader("")
        self.data = self._build(node, ())

    def _build(self, node, path):
        # mapping entries are anchored at their key, which was recorded first
        self.lines.setdefault(path, node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            out = {}
            for k, v in node.value:
                key = self._loader.construct_object(k)
                self.lines[path + (key,)] = k.start_mark.line + 1
                out[key] = self._build(v, path + (key,))
            return out
        if isinstance(node, yaml.SequenceNode):
            return [self._build(v, path + (i,)) for i, v in enumerate(node.value)]
        return self._loader.construct_object(node)

    def error(self, message: str, path: tuple) -> ScenarioError:
        while path and path not in self.lines:
            path = path[:-1]
        return ScenarioError(message, self.lines.get(path), self.source)


def _number(doc: _Doc, value: Any, path: tuple, positive: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise doc.error(f"{'.'.join(map(str, path))} must be a number", path)
    if positive and not value > 0:
        raise doc.error(f"{'.'.join(map(str, path))} must be positive", path)
    return float(value)


def _curve(doc: _Doc, records: Any, t_end: float, path: tuple) -> PiecewiseCurve:
    if not isinstance(records, list) or not records:
        raise doc.error(f"{'.'.join(map(str, path))} must be a non-empty list of term records", path)
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise doc.error("curve terms must be mappings with a 'kind' field", path + (i,))
    try:
        return PiecewiseCurve.from_dicts(records, t_end)
    except CurveError as exc:
        raise doc.error(str(exc), path) from None


def loads_scenario(text: str, source: str = "<scenario>") -> RunConfig:
    doc = _Doc(text, source)
    d = doc.data
    if not isinstance(d, dict):
        raise doc.error("scenario must be a mapping", ())
    allowed = {"deadline", "horizon", "grid", "epsilon", "arrival", "nodes", "target_bits", "t_max", "output"}
    for key in d:
        if key not in allowed:
            raise doc.error(f"unknown field {key!r}", (key,))
    if "deadline" not in d:
        raise doc.error("missing 'deadline'", ())
    T = _number(doc, d["deadline"], ("deadline",))
    horizon = _number(doc, d.get("horizon", T), ("horizon",))
    t_max = _number(doc, d["t_max"], ("t_max",)) if "t_max" in d else None
    if horizon < T:
        raise doc.error("horizon must not be shorter than the deadline", ("horizon",))

    nodes = d.get("nodes")
    if not isinstance(nodes, list) or len(nodes) < 2:
        raise doc.error("'nodes' must list a source, optional relays and a receiver (at least one hop)", ("nodes",))
    energy, rates, names = [], [], []
    for i, node in enumerate(nodes):
        p = ("nodes", i)
        if not isinstance(node, dict):
            raise doc.error("node entries must be mappings", p)
        names.append(str(node.get("name", f"node{i}")))
        if i == len(nodes) - 1:
            if "energy" in node or "rate" in node:
                raise doc.error("the last node is the receiver and takes no energy or rate", p)
            continue
        if "energy" not in node:
            raise doc.error(f"node {names[-1]!r} needs an 'energy' curve", p)
        energy.append(_curve(doc, node["energy"], horizon, p + ("energy",)))
        rate_cfg = node.get("rate", {"name": "shannon"})
        if not isinstance(rate_cfg, dict):
            raise doc.error("rate must be a mapping like {name: shannon}", p + ("rate",))
        try:
            rates.append(rate_from_dict(rate_cfg))
        except ValueError as exc:
            raise doc.error(str(exc), p + ("rate",)) from None

    if "arrival" not in d:
        raise doc.error("missing 'arrival' curve for the source", ())
    arrival = _curve(doc, d["arrival"], horizon, ("arrival",))

    cells = DEFAULT_CELLS
    grid = d.get("grid", {})
    if not isinstance(grid, dict):
        raise doc.error("grid must be a mapping with 'cells' or 'dt'", ("grid",))
    if "cells" in grid:
        c = grid["cells"]
        if isinstance(c, bool) or not isinstance(c, int) or c < 1:
            raise doc.error("grid.cells must be a positive integer", ("grid", "cells"))
        cells = c
    elif "dt" in grid:
        cells = cells_for(T, _number(doc, grid["dt"], ("grid", "dt")))

    eps = _number(doc, d["epsilon"], ("epsilon",)) if "epsilon" in d else None
    target = _number(doc, d["target_bits"], ("target_bits",)) if "target_bits" in d else None
    out = d.get("output", {}) or {}
    out_dir = out.get("dir") if isinstance(out, dict) else None

    try:
        sc = Scenario(tuple(energy), arrival, tuple(rates), T, tuple(names))
    except ValueError as exc:
        raise doc.error(str(exc), ()) from None
    return RunConfig(sc, cells, eps, target, t_max, out_dir)


def load_scenario(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", None, str(path)) from None
    return loads_scenario(text, str(path))


def dump_scenario(cfg: RunConfig) -> str:
    sc = cfg.scenario
    nodes = []
    for name, E, r in zip(sc.names, sc.energy, sc.rates):
        nodes.append({"name": name, "energy": E.to_dicts(), "rate": r.to_dict()})
    nodes.append({"name": sc.names[-1] if len(sc.names) > sc.hops else "receiver"})
    doc: dict[str, Any] = {
        "deadline": sc.deadline,
        "horizon": sc.horizon,
        "grid": {"cells": cfg.cells},
    }
    if cfg.epsilon is not None:
        doc["epsilon"] = cfg.epsilon
    if cfg.target_bits is not None:
        doc["target_bits"] = cfg.target_bits
    if cfg.t_max is not None:
        doc["t_max"] = cfg.t_max
    doc["arrival"] = sc.arrival.to_dicts()
    doc["nodes"] = nodes
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
