"""Result serialization: the frozen CSV table, its JSON mirror, manifests."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .config import RunManifest, SimConfig
from .errors import ConfigurationError
from .harness import SweepRow

CSV_HEADER = (
    "n_vehicles",
    "algorithm",
    "interruptions_mean",
    "pdr",
    "ber_mean",
    "throughput_bps",
    "delay_mean_s",
    "path_len_mean",
    "composite_score",
)


def row_to_dict(row: SweepRow) -> dict:
    """Header-ordered plain dict; absent metrics stay None."""
    return {
        "n_vehicles": row.n_vehicles,
        "algorithm": row.algorithm,
        "interruptions_mean": row.interruptions_mean,
        "pdr": row.pdr,
        "ber_mean": row.ber_mean,
        "throughput_bps": row.throughput_bps,
        "delay_mean_s": row.delay_mean_s,
        "path_len_mean": row.path_len_mean,
        "composite_score": row.composite_score,
    }


def _cell(value) -> str:
    if value is None:
        return ""
    return str(value)


def write_csv(rows: list[SweepRow], path: str | Path) -> None:
    """Write the result table; None becomes an empty field."""
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_cell(v) for v in row_to_dict(row).values()])


def write_json(rows: list[SweepRow], path: str | Path) -> None:
    """JSON mirror of the CSV table: a list of header-keyed objects."""
    path = Path(path)
    with path.open("w") as fh:
        json.dump([row_to_dict(r) for r in rows], fh, indent=2)
        fh.write("\n")


def read_results(path: str | Path) -> list[SweepRow]:
    """Read a result table back; empty fields become None."""
    path = Path(path)
    if path.suffix == ".json":
        with path.open() as fh:
            records = json.load(fh)
    else:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_HEADER:
                raise ConfigurationError(
                    f"unexpected result header in {path}: {reader.fieldnames}"
                )
            records = [
                {k: (None if v == "" else v) for k, v in rec.items()}
                for rec in reader
            ]
    rows = []
    for rec in records:
        rows.append(SweepRow(
            n_vehicles=int(rec["n_vehicles"]),
            algorithm=str(rec["algorithm"]),
            interruptions_mean=float(rec["interruptions_mean"]),
            pdr=float(rec["pdr"]),
            ber_mean=None if rec["ber_mean"] is None else float(rec["ber_mean"]),
            throughput_bps=float(rec["throughput_bps"]),
            delay_mean_s=None if rec["delay_mean_s"] is None else float(rec["delay_mean_s"]),
            path_len_mean=None if rec["path_len_mean"] is None else float(rec["path_len_mean"]),
            composite_score=None if rec["composite_score"] is None
            else float(rec["composite_score"]),
        ))
    return rows


def write_run(
    cfg: SimConfig,
    rows: list[SweepRow],
    out_path: str | Path,
    fmt: str = "csv",
) -> list[Path]:
    """Write results in the requested format plus a manifest sidecar."""
    out_path = Path(out_path)
    if fmt == "csv":
        write_csv(rows, out_path)
    elif fmt == "json":
        write_json(rows, out_path)
    else:
        raise ConfigurationError(f"unknown output format '{fmt}'")

    manifest = RunManifest.for_run(cfg, cfg.sim.seed)
    manifest.outputs = [out_path.name]
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    with manifest_path.open("w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
        fh.write("\n")
    return [out_path, manifest_path]
