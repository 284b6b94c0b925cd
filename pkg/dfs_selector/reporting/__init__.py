from .writers import (
    ranking_payload,
    read_json,
    write_curve_csv,
    write_json,
    write_manifest,
    write_ranking,
    write_report,
    write_solution,
    write_traces_csv,
    write_tuning,
)

__all__ = [
    "ranking_payload",
    "read_json",
    "write_curve_csv",
    "write_json",
    "write_manifest",
    "write_ranking",
    "write_report",
    "write_solution",
    "write_traces_csv",
    "write_tuning",
]
