"""
Reading and writing signatures, bases, manifold specs, point clouds,
stream reports and concept dictionaries.

JSON for everything except point clouds, which are CSV files with header
x1,...,xd and an optional trailing label column.
"""
from __future__ import annotations

import json
import logging
import os
from typing import Any, Dict, Iterable, List, Mapping, Optional

import numpy as np  # type: ignore
import pandas as pd  # type: ignore

from exceptions import MalformedInput
from families import FlattenKind
from hierarchy import FlatSignature
from layer_state import DictionaryEntry, LayerState, StreamReport
from manifolds import ManifoldSpec, from_dict
from monomials import MonomialBasis
from point_cloud import PointCloud
from projection import ProjectionRecord
from signature import Signature

logger = logging.getLogger(__name__)

INDEX_FILE = "index.json"


def _load_json(path: str) -> Any:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(str(exc), source=path)


def _dump_json(data: Any, path: str) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=1, sort_keys=True)
        f.write("\n")


def _field(data: Mapping[str, Any], name: str, source: Optional[str]) -> Any:
    try:
        return data[name]
    except KeyError:
        raise MalformedInput(f"missing field {name!r}", source=source)


def _matrix(data: Mapping[str, Any], name: str, size: int, source: Optional[str]) -> np.ndarray:
    values = np.asarray(_field(data, name, source), dtype=float)
    if values.shape != (size, size):
        raise MalformedInput(f"field {name!r} has shape {values.shape}, expected {(size, size)}", source=source)
    return values


# Signatures


def signature_to_dict(sig: Signature, include_eps: bool = True) -> Dict[str, Any]:
    """
    JSON form of a signature. The moment matrix is not stored.

    :param sig: Signature to convert
    :type sig: Signature
    :param include_eps: Also store T_eps, defaults to True
    :type include_eps: bool, optional
    :return: Dictionary of plain lists and numbers
    :rtype: Dict[str, Any]
    """
    data = {
        "basis": sig.basis.describe(),
        "epsilon": sig.epsilon,
        "singular_values": sig.singular_values.tolist(),
        "null_rank": int(sig.null_rank),
        "eps_rank": int(sig.eps_rank),
        "T": sig.null_projector.tolist(),
        "projection": None if sig.projection is None else sig.projection.to_dict(),
    }
    if include_eps:
        data["T_eps"] = sig.eps_projector.tolist()
    return data


def signature_from_dict(data: Mapping[str, Any], source: Optional[str] = None) -> Signature:
    """Inverse of :func:`signature_to_dict`; a missing T_eps falls back to T"""
    basis = MonomialBasis.from_description(_field(data, "basis", source))
    null_projector = _matrix(data, "T", basis.size, source)
    eps_projector = _matrix(data, "T_eps", basis.size, source) if "T_eps" in data else null_projector.copy()
    projection = data.get("projection")
    try:
        return Signature(
            basis=basis,
            moment=None,
            singular_values=np.asarray(_field(data, "singular_values", source), dtype=float),
            null_projector=null_projector,
            eps_projector=eps_projector,
            epsilon=float(_field(data, "epsilon", source)),
            null_rank=int(_field(data, "null_rank", source)),
            eps_rank=int(_field(data, "eps_rank", source)),
            projection=None if projection is None else ProjectionRecord.from_dict(projection),
            source=source or "",
        )
    except (TypeError, ValueError) as exc:
        raise MalformedInput(str(exc), source=source)


def write_signature(sig: Signature, path: str) -> None:
    _dump_json(signature_to_dict(sig), path)


def read_signature(path: str) -> Signature:
    return signature_from_dict(_load_json(path), source=path)


def read_signatures(paths: Iterable[str]) -> List[Signature]:
    """Every path may be a signature file or a directory of them"""
    sigs = []
    for path in paths:
        if os.path.isdir(path):
            names = sorted(name for name in os.listdir(path) if name.endswith(".json"))
            sigs.extend(read_signature(os.path.join(path, name)) for name in names)
        else:
            sigs.append(read_signature(path))
    if not sigs:
        raise MalformedInput("no signature files found", source=", ".join(paths))
    return sigs


def signatures_equal(a: Signature, b: Signature) -> bool:
    """Equality of everything a signature file stores"""
    return (
        a.basis == b.basis
        and a.epsilon == b.epsilon
        and a.null_rank == b.null_rank
        and a.eps_rank == b.eps_rank
        and a.projection == b.projection
        and np.array_equal(a.singular_values, b.singular_values)
        and np.array_equal(a.null_projector, b.null_projector)
        and np.array_equal(a.eps_projector, b.eps_projector)
    )


# Bases and manifold specs


def write_basis(basis: MonomialBasis, path: str) -> None:
    _dump_json(basis.describe(), path)


def read_basis(path: str) -> MonomialBasis:
    return MonomialBasis.from_description(_load_json(path))


def write_spec(spec: ManifoldSpec, path: str) -> None:
    _dump_json(spec.to_dict(), path)


def read_spec(path: str) -> ManifoldSpec:
    data = _load_json(path)
    try:
        return from_dict(data)
    except MalformedInput as exc:
        raise MalformedInput(str(exc), source=path) from exc


# Point clouds


def write_cloud(cloud: PointCloud, path: str) -> None:
    """CSV with columns x1..xd and, if the cloud is labelled, label"""
    frame = pd.DataFrame(cloud.points, columns=[f"x{i + 1}" for i in range(cloud.dim)])
    if cloud.labels is not None:
        frame["label"] = cloud.labels
    frame.to_csv(path, index=False, float_format="%.17g")


def read_cloud(path: str) -> PointCloud:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise MalformedInput(str(exc), source=path)
    labels = None
    if "label" in frame.columns:
        labels = frame.pop("label").astype(str).tolist()
    expected = [f"x{i + 1}" for i in range(frame.shape[1])]
    if list(frame.columns) != expected:
        raise MalformedInput(f"header must be {','.join(expected)}[,label], got {','.join(frame.columns)}", source=path)
    try:
        points = frame.to_numpy(dtype=float)
    except ValueError as exc:
        raise MalformedInput(str(exc), source=path)
    try:
        return PointCloud(points, labels)
    except MalformedInput as exc:
        raise MalformedInput(str(exc), source=path) from exc


def parse_point(text: str) -> np.ndarray:
    """'0,1' -> array([0., 1.])"""
    try:
        return np.array([float(value) for value in text.split(",")])
    except ValueError:
        raise MalformedInput(f"not a comma separated point: {text!r}", source="--point")


# Flats and stream output


def flat_to_dict(flat: FlatSignature) -> Dict[str, Any]:
    return {
        "vector": flat.vector.tolist(),
        "size": flat.size,
        "source": flat.source,
        "kind": flat.kind.value,
        "projection": None if flat.projection is None else flat.projection.to_dict(),
    }


def flat_from_dict(data: Mapping[str, Any], source: Optional[str] = None) -> FlatSignature:
    projection = data.get("projection")
    try:
        return FlatSignature(
            vector=np.asarray(_field(data, "vector", source), dtype=float),
            size=int(_field(data, "size", source)),
            source=str(data.get("source", "")),
            kind=FlattenKind(data.get("kind", FlattenKind.NULL.value)),
            projection=None if projection is None else ProjectionRecord.from_dict(projection),
        )
    except ValueError as exc:
        raise MalformedInput(str(exc), source=source)


def write_reports(reports: Iterable[StreamReport], path: str) -> None:
    """One JSON object per line"""
    with open(path, "w") as f:
        for report in reports:
            f.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")


def read_reports(path: str) -> List[Dict[str, Any]]:
    try:
        with open(path) as f:
            return [json.loads(line) for line in f if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(str(exc), source=path)


# Concept dictionaries


def write_dictionary(state: LayerState, directory: str) -> None:
    """
    One JSON file per entry plus index.json of {id, hits, created_step}

    :param state: Layer whose dictionary is written
    :type state: LayerState
    :param directory: Target directory, created if missing
    :type directory: str
    """
    os.makedirs(directory, exist_ok=True)
    for entry in state.dictionary:
        _dump_json(
            {"id": entry.id, "layer": state.index, "vector": entry.vector.tolist()},
            os.path.join(directory, f"concept_{entry.id:04d}.json"),
        )
    index = [
        {"id": int(row["id"]), "hits": int(row["hits"]), "created_step": int(row["created_step"])}
        for row in state.index_table
    ]
    _dump_json(index, os.path.join(directory, INDEX_FILE))
    logger.info("wrote %d concepts of layer %d to %s", len(index), state.index, directory)


def read_dictionary(directory: str) -> List[DictionaryEntry]:
    index_path = os.path.join(directory, INDEX_FILE)
    entries = []
    for row in _load_json(index_path):
        entry_id = int(_field(row, "id", index_path))
        path = os.path.join(directory, f"concept_{entry_id:04d}.json")
        vector = np.asarray(_field(_load_json(path), "vector", path), dtype=float)
        entries.append(
            DictionaryEntry(
                entry_id, vector, int(_field(row, "hits", index_path)), int(_field(row, "created_step", index_path))
            )
        )
    return entries


def write_dictionaries(layers: Iterable[LayerState], directory: str) -> None:
    """Every layer's dictionary under directory/layer_<n>"""
    for state in layers:
        write_dictionary(state, os.path.join(directory, f"layer_{state.index}"))
