"""Write reports, TSV tables and a manifest; read a manifest back for a re-run.

Layout of ``output_dir``::

    manifest.json                 seeds, versions, configs, sha256 of every data file
    <k>_<experiment>/report.json  config echo, KS results, moments, verdicts, wall clock
    <k>_<experiment>/<case>.hist.tsv
    <k>_<experiment>/<case>.cdf.tsv

Data files and the manifest carry no timestamps, so identical configs give
byte-identical files.  Only report.json records wall-clock time.
"""
from __future__ import annotations

import hashlib
import json
import platform
from pathlib import Path

import numba
import numpy as np

from .. import __version__
from ..statistics import EmpiricalCDF, histogram_export, quantile_grid
from .config import ExperimentConfig
from .runner import Case, ExperimentReport

CDF_LEVELS = np.arange(1, 200) / 200.0
MANIFEST = "manifest.json"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def _tsv(rows: np.ndarray, header: list[str]) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(f"{v:.17g}" for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def cdf_table(case: Case) -> tuple[np.ndarray, list[str]]:
    """Empirical quantiles with the ECDF there and the reference CDF beside it."""
    q = quantile_grid(case.sample, CDF_LEVELS)
    cols = [CDF_LEVELS, q, EmpiricalCDF(case.sample)(q)]
    header = ["level", "quantile", "ecdf"]
    if case.reference_cdf is not None:
        cols.append(np.asarray(case.reference_cdf(q), dtype=float))
        header.append(case.reference_label)
    elif case.reference is not None:
        cols.append(EmpiricalCDF(case.reference)(q))
        header.append(case.reference_label)
    return np.column_stack(cols), header


def _case_files(case: Case, bins: int) -> dict[str, str]:
    out = {f"{case.name}.hist.tsv": _tsv(histogram_export(case.sample, bins=bins),
                                         ["center", "count", "density"])}
    if case.reference is not None:
        out[f"{case.name}.reference.hist.tsv"] = _tsv(histogram_export(case.reference, bins=bins),
                                                      ["center", "count", "density"])
    rows, header = cdf_table(case)
    out[f"{case.name}.cdf.tsv"] = _tsv(rows, header)
    return out


def versions() -> dict:
    return {"gumbel_lpp": __version__, "numpy": np.__version__, "numba": numba.__version__,
            "python": platform.python_version()}


def emit_reports(reports: list[ExperimentReport], output_dir) -> dict[str, str]:
    """Write every report plus one manifest; returns {relative path: sha256}."""
    root = Path(output_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create {root}: {e.strerror or e}") from e
    hashes: dict[str, str] = {}
    entries = []
    for k, rep in enumerate(reports):
        sub = f"{k}_{rep.config.experiment}"
        d = root / sub
        try:
            d.mkdir(exist_ok=True)
        except OSError as e:
            raise OSError(f"cannot create {d}: {e.strerror or e}") from e
        files = {}
        for case in rep.cases:
            for name, text in _case_files(case, rep.config.bins).items():
                _write(d / name, text)
                files[name] = hashlib.sha256(text.encode()).hexdigest()
        rep.files = files
        hashes.update({f"{sub}/{n}": h for n, h in files.items()})
        _write(d / "report.json", _dump(rep.as_dict()))
        entries.append({"directory": sub, "experiment": rep.config.experiment,
                        "master_seed": rep.config.master_seed, "config": rep.config.as_dict(),
                        "verdicts": rep.as_dict()["verdicts"]})
    manifest = {"versions": versions(), "experiments": entries, "files": dict(sorted(hashes.items()))}
    _write(root / MANIFEST, _dump(manifest))
    return hashes


def emit_report(report: ExperimentReport, output_dir) -> dict[str, str]:
    return emit_reports([report], output_dir)


def load_manifest(path) -> list[ExperimentConfig]:
    """Configs recorded in a manifest, ready to run again."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [ExperimentConfig.from_dict(e["config"]) for e in data.get("experiments", [])]
