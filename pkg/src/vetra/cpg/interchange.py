"""Graph interchange documents.

Schema (version 1): top-level object with ``schema_version``, ``file``,
``nodes`` (array of {id, kind, file, line, column, code, name?}) and
``edges`` (array of {src, dst, kind, variable?}).  Export is deterministic
(nodes by ascending id, edges by kind/src/dst/variable); import validates
the schema and edge endpoints.
"""

from __future__ import annotations

import json

from .model import Cpg, CpgEdge, CpgNode, CpgError, EdgeKind, NodeKind

SCHEMA_VERSION = 1

NODE_REQUIRED = ("id", "kind", "file", "line", "column", "code")
EDGE_REQUIRED = ("src", "dst", "kind")
VARIABLE_REQUIRED_KINDS = {
    EdgeKind.REACHING_DEF,
    EdgeKind.VIRTUAL_ARG_PARAM,
    EdgeKind.VIRTUAL_RETURN_SITE,
}


class SchemaViolation(CpgError):
    """Document does not conform to the interchange schema."""


class DanglingEdge(CpgError):
    """Edge references a node id absent from the document."""


def export_cpg(cpg: Cpg) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "file": cpg.file,
        "nodes": [
            _node_obj(n) for n in sorted(cpg.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            _edge_obj(e) for e in sorted(cpg.edges, key=CpgEdge.sort_key)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _node_obj(n: CpgNode) -> dict:
    obj = {
        "id": n.id,
        "kind": n.kind.value,
        "file": n.file,
        "line": n.line,
        "column": n.column,
        "code": n.code,
    }
    if n.name is not None:
        obj["name"] = n.name
    return obj


def _edge_obj(e: CpgEdge) -> dict:
    obj = {"src": e.src, "dst": e.dst, "kind": e.kind.value}
    if e.variable is not None:
        obj["variable"] = e.variable
    return obj


def import_cpg(graph_document: str) -> Cpg:
    try:
        doc = json.loads(graph_document)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("top-level value must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaViolation(
            f"unsupported schema_version {doc.get('schema_version')!r}")
    if not isinstance(doc.get("file"), str):
        raise SchemaViolation("missing field: file")
    for field_name in ("nodes", "edges"):
        if not isinstance(doc.get(field_name), list):
            raise SchemaViolation(f"missing field: {field_name}")

    nodes = []
    ids = set()
    for obj in doc["nodes"]:
        for required in NODE_REQUIRED:
            if required not in obj:
                raise SchemaViolation(f"node missing field: {required}")
        try:
            kind = NodeKind(obj["kind"])
        except ValueError:
            raise SchemaViolation(f"unknown node kind: {obj['kind']!r}")
        if not isinstance(obj["id"], int):
            raise SchemaViolation("node id must be an integer")
        if not isinstance(obj["line"], int) or obj["line"] < 1:
            raise SchemaViolation(f"node {obj['id']} line must be a positive integer")
        if obj["id"] in ids:
            raise SchemaViolation(f"duplicate node id {obj['id']}")
        ids.add(obj["id"])
        nodes.append(CpgNode(obj["id"], kind, obj["file"], obj["line"],
                             obj["column"], obj["code"], obj.get("name")))

    edges = []
    for obj in doc["edges"]:
        for required in EDGE_REQUIRED:
            if required not in obj:
                raise SchemaViolation(f"edge missing field: {required}")
        try:
            kind = EdgeKind(obj["kind"])
        except ValueError:
            raise SchemaViolation(f"unknown edge kind: {obj['kind']!r}")
        if kind in VARIABLE_REQUIRED_KINDS and not obj.get("variable"):
            raise SchemaViolation(f"{kind.value} edge requires a variable name")
        for endpoint in ("src", "dst"):
            if obj[endpoint] not in ids:
                raise DanglingEdge(
                    f"edge {endpoint}={obj[endpoint]} references an absent node")
        edges.append(CpgEdge(obj["src"], obj["dst"], kind, obj.get("variable")))

    return Cpg(doc["file"], nodes, edges)
