"""Deterministic trajectory serialization.

CSV column order is fixed: t, lambda, f, scalar_curvature, f_lambda_product,
implicit_residual (left empty where undefined), with a mandatory header row.
Floats are written with 17 significant digits, which round-trips doubles
exactly.  The JSON Lines format carries one record per line -- parameters,
then samples, then the termination -- and reads back into a Trajectory equal
to the original.
"""

from __future__ import annotations

import json
from typing import IO, Iterable

from .errors import InvalidInputError
from .state import (
    FlowParams,
    FlowState,
    FlowVariant,
    Termination,
    TerminationKind,
    Trajectory,
    TrajectorySample,
)

CSV_COLUMNS = (
    "t",
    "lambda",
    "f",
    "scalar_curvature",
    "f_lambda_product",
    "implicit_residual",
)


def format_float(value: float) -> str:
    """17 significant digits: exact round-trip for double precision."""
    return f"{value:.17g}"


def _sample_row(sample: TrajectorySample) -> list[str]:
    residual = sample.implicit_residual
    return [
        format_float(sample.state.t),
        format_float(sample.state.lam),
        format_float(sample.state.f),
        format_float(sample.scalar_curvature),
        format_float(sample.f_lambda_product),
        "" if residual is None else format_float(residual),
    ]


def write_csv(trajectory: Trajectory, stream: IO[str]) -> None:
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for sample in trajectory.samples:
        stream.write(",".join(_sample_row(sample)) + "\n")


def write_rows_csv(columns: Iterable[str], rows: Iterable[Iterable[object]],
                   stream: IO[str]) -> None:
    """Generic helper for non-trajectory tables (sweeps, comparisons)."""
    stream.write(",".join(columns) + "\n")
    for row in rows:
        cells = [
            format_float(cell) if isinstance(cell, float) else ("" if cell is None else str(cell))
            for cell in row
        ]
        stream.write(",".join(cells) + "\n")


def _state_dict(state: FlowState) -> dict:
    return {"t": state.t, "lambda": state.lam, "f": state.f}


def write_jsonl(trajectory: Trajectory, stream: IO[str]) -> None:
    params = trajectory.params
    stream.write(json.dumps({
        "record": "params",
        "k0": params.k0,
        "f0_norm": params.f0_norm,
        "variant": params.variant.value,
    }) + "\n")
    for sample in trajectory.samples:
        stream.write(json.dumps({
            "record": "sample",
            "t": sample.state.t,
            "lambda": sample.state.lam,
            "f": sample.state.f,
            "scalar_curvature": sample.scalar_curvature,
            "f_lambda_product": sample.f_lambda_product,
            "implicit_residual": sample.implicit_residual,
        }) + "\n")
    term = trajectory.termination
    stream.write(json.dumps({
        "record": "termination",
        "kind": term.kind.value,
        "t_star": term.t_star,
        "limit_state": None if term.limit_state is None else _state_dict(term.limit_state),
    }) + "\n")


def read_jsonl(stream: IO[str]) -> Trajectory:
    """Parse a JSON Lines trajectory back into an equal Trajectory value."""
    params = None
    samples: list[TrajectorySample] = []
    termination = None
    for line in stream:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        kind = record.get("record")
        if kind == "params":
            params = FlowParams(
                k0=record["k0"],
                f0_norm=record["f0_norm"],
                variant=FlowVariant(record["variant"]),
            )
        elif kind == "sample":
            samples.append(TrajectorySample(
                state=FlowState(t=record["t"], lam=record["lambda"], f=record["f"]),
                scalar_curvature=record["scalar_curvature"],
                f_lambda_product=record["f_lambda_product"],
                implicit_residual=record["implicit_residual"],
            ))
        elif kind == "termination":
            limit = record["limit_state"]
            termination = Termination(
                kind=TerminationKind(record["kind"]),
                t_star=record["t_star"],
                limit_state=None if limit is None else FlowState(
                    t=limit["t"], lam=limit["lambda"], f=limit["f"]),
            )
        else:
            raise InvalidInputError(f"unknown record type {kind!r} in trajectory stream")
    if params is None or termination is None:
        raise InvalidInputError("trajectory stream is missing params or termination records")
    return Trajectory(params=params, samples=tuple(samples), termination=termination)


def write_trajectory(trajectory: Trajectory, stream: IO[str], fmt: str) -> None:
    if fmt == "csv":
        write_csv(trajectory, stream)
    elif fmt == "jsonl":
        write_jsonl(trajectory, stream)
    else:
        raise InvalidInputError(f"unknown output format {fmt!r} (expected csv or jsonl)")
