"""Run history tracking and analysis for ratreg."""

import json
import uuid
from dataclasses import asdict, dataclass
from datetime import datetime
from typing import Any

import duckdb

from ..checker.verdict import Verdict


@dataclass
class RunRecord:
    """A single simulated run."""

    id: int
    run_id: str
    timestamp: datetime
    scenario: str
    protocol: str
    seed: int
    status: str
    termination_ok: bool | None = None
    validity_ok: bool | None = None
    detection_ok: bool | None = None
    timestamps_ok: bool | None = None
    reads: int = 0
    writes: int = 0
    aborts: int = 0
    invalid_reads: int = 0
    detections: int = 0
    false_positives: int = 0
    corrupted: int = 0
    messages_total: int = 0
    fingerprint_ops: int = 0
    duration_ms: int | None = None
    verdict: dict[str, Any] | None = None


@dataclass
class RunStatistics:
    """Aggregated statistics over recorded runs."""

    total_runs: int
    passed_runs: int
    failed_runs: int
    pass_rate: float
    total_aborts: int
    total_detections: int
    total_false_positives: int
    avg_messages: float
    runs_by_protocol: dict[str, int]
    messages_by_protocol: dict[str, float]


class RunHistory:
    """Stores run verdicts in DuckDB tables."""

    SCHEMA_NAME = "__ratreg__"

    def __init__(self, connection: duckdb.DuckDBPyConnection | None = None):
        """
        Initialize run history.

        Args:
            connection: DuckDB connection to use. If None, will be set later.
        """
        self._connection = connection
        self._initialized = False
        self._is_memory_db = False
        self._owned: duckdb.DuckDBPyConnection | None = None

    @classmethod
    def open(cls, database: str | None = None) -> "RunHistory":
        """History on a DuckDB file, or in memory when ``database`` is None."""
        history = cls()
        history._owned = duckdb.connect(database or ":memory:")
        history.connect(history._owned)
        return history

    def connect(self, connection: duckdb.DuckDBPyConnection) -> None:
        """Set the connection and initialize schema if needed."""
        if self._connection is None:
            self._connection = connection
            try:
                catalogs = connection.execute("SELECT catalog_name FROM information_schema.schemata").fetchall()
                self._is_memory_db = "memory" in {row[0] for row in catalogs}
            except Exception:
                self._is_memory_db = False
        if not self._initialized:
            self._init_schema()
            self._initialized = True

    def _get_schema_name(self) -> str:
        if self._is_memory_db:
            return f"memory.{self.SCHEMA_NAME}"
        return self.SCHEMA_NAME

    def _require_connection(self) -> duckdb.DuckDBPyConnection:
        if not self._connection:
            raise RuntimeError("RunHistory connection not set. Call connect() first.")
        return self._connection

    def _init_schema(self) -> None:
        """Initialize the history schema and tables."""
        connection = self._require_connection()
        schema_name = self._get_schema_name()

        connection.execute(f"CREATE SCHEMA IF NOT EXISTS {schema_name}")
        connection.execute(f"CREATE SEQUENCE IF NOT EXISTS {schema_name}.run_history_id_seq")
        connection.execute(f"""
            CREATE TABLE IF NOT EXISTS {schema_name}.run_history (
                id BIGINT PRIMARY KEY,
                run_id VARCHAR NOT NULL,
                timestamp TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                scenario VARCHAR NOT NULL,
                protocol VARCHAR(10) NOT NULL,
                seed BIGINT NOT NULL,
                status VARCHAR(10) NOT NULL,

                -- Per-check outcome, NULL when the check was disabled
                termination_ok BOOLEAN,
                validity_ok BOOLEAN,
                detection_ok BOOLEAN,
                timestamps_ok BOOLEAN,

                -- Counts
                reads INTEGER,
                writes INTEGER,
                aborts INTEGER,
                invalid_reads INTEGER,
                detections INTEGER,
                false_positives INTEGER,
                corrupted INTEGER,
                messages_total INTEGER,
                fingerprint_ops INTEGER,
                duration_ms INTEGER,

                verdict JSON
            )
        """)
        connection.execute(f"""
            CREATE OR REPLACE VIEW {schema_name}.recent_runs AS
            SELECT * FROM {schema_name}.run_history
            ORDER BY id DESC
            LIMIT 1000
        """)

    def record_run(self, verdict: Verdict, duration_ms: float | None = None) -> str:
        """
        Record the verdict of one run.

        Returns:
            The run_id of the recorded run.
        """
        self._require_connection()
        run_id = str(uuid.uuid4())

        def outcome(name: str) -> bool | None:
            check = verdict.check(name)
            return None if check is None else check.passed

        record = {
            "run_id": run_id,
            "scenario": verdict.scenario,
            "protocol": verdict.protocol.value,
            "seed": verdict.seed,
            "status": "PASSED" if verdict.passed else "FAILED",
            "termination_ok": outcome("termination"),
            "validity_ok": outcome("validity"),
            "detection_ok": outcome("detection"),
            "timestamps_ok": outcome("timestamps"),
            "reads": verdict.reads,
            "writes": verdict.writes,
            "aborts": verdict.aborts,
            "invalid_reads": len(verdict.invalid_reads),
            "detections": verdict.detections,
            "false_positives": verdict.false_positives,
            "corrupted": verdict.corrupted_messages,
            "messages_total": verdict.cost.messages_total,
            "fingerprint_ops": verdict.cost.fingerprint_ops,
            "duration_ms": None if duration_ms is None else int(duration_ms),
            "verdict": verdict.model_dump_json(by_alias=True),
        }
        self._insert_history_record(record)
        return run_id

    def get_recent(self, limit: int = 100) -> list[RunRecord]:
        """Get recent runs, newest first."""
        connection = self._require_connection()
        schema_name = self._get_schema_name()
        result = connection.execute(f"SELECT * FROM {schema_name}.recent_runs ORDER BY id DESC LIMIT ?", [limit]).fetchall()
        return [record for row in result if (record := self._row_to_record(row)) is not None]

    def search(
        self,
        protocol: str | None = None,
        status: str | None = None,
        scenario: str | None = None,
        text: str | None = None,
        start_time: datetime | None = None,
        end_time: datetime | None = None,
        limit: int = 100,
    ) -> list[RunRecord]:
        """Search run history with filters."""
        connection = self._require_connection()
        schema_name = self._get_schema_name()
        conditions = []
        params: list[Any] = []

        if protocol:
            conditions.append("protocol = ?")
            params.append(protocol)
        if status:
            conditions.append("status = ?")
            params.append(status.upper())
        if scenario:
            conditions.append("scenario = ?")
            params.append(scenario)
        if text:
            conditions.append("(scenario ILIKE ? OR CAST(verdict AS VARCHAR) ILIKE ?)")
            params.extend([f"%{text}%", f"%{text}%"])
        if start_time:
            conditions.append("timestamp >= ?")
            params.append(start_time)
        if end_time:
            conditions.append("timestamp <= ?")
            params.append(end_time)

        where_clause = " AND ".join(conditions) if conditions else "1=1"
        result = connection.execute(
            f"""
            SELECT * FROM {schema_name}.run_history
            WHERE {where_clause}
            ORDER BY id DESC
            LIMIT ?
        """,
            params + [limit],
        ).fetchall()
        return [record for row in result if (record := self._row_to_record(row)) is not None]

    def get_by_id(self, run_id: str) -> RunRecord | None:
        connection = self._require_connection()
        schema_name = self._get_schema_name()
        result = connection.execute(f"SELECT * FROM {schema_name}.run_history WHERE run_id = ?", [run_id]).fetchone()
        return self._row_to_record(result) if result else None

    def get_statistics(self) -> RunStatistics:
        """Pass rate and totals over every recorded run."""
        connection = self._require_connection()
        schema_name = self._get_schema_name()
        stats = connection.execute(f"""
            SELECT
                COUNT(*) as total_runs,
                COUNT(CASE WHEN status = 'PASSED' THEN 1 END) as passed_runs,
                COUNT(CASE WHEN status != 'PASSED' THEN 1 END) as failed_runs,
                SUM(aborts) as total_aborts,
                SUM(detections) as total_detections,
                SUM(false_positives) as total_false_positives,
                AVG(messages_total) as avg_messages
            FROM {schema_name}.run_history
        """).fetchone()

        by_protocol = connection.execute(f"""
            SELECT protocol, COUNT(*) as count, AVG(messages_total) as avg_messages
            FROM {schema_name}.run_history
            GROUP BY protocol
            ORDER BY protocol
        """).fetchall()

        if not stats or not stats[0]:
            return RunStatistics(0, 0, 0, 0.0, 0, 0, 0, 0.0, {}, {})

        total = int(stats[0])
        return RunStatistics(
            total_runs=total,
            passed_runs=int(stats[1] or 0),
            failed_runs=int(stats[2] or 0),
            pass_rate=int(stats[1] or 0) / total,
            total_aborts=int(stats[3] or 0),
            total_detections=int(stats[4] or 0),
            total_false_positives=int(stats[5] or 0),
            avg_messages=float(stats[6] or 0),
            runs_by_protocol={row[0]: int(row[1]) for row in by_protocol},
            messages_by_protocol={row[0]: float(row[2] or 0) for row in by_protocol},
        )

    def clear_history(self, before_date: datetime | None = None) -> int:
        """
        Clear run history.

        Args:
            before_date: If provided, only clear runs recorded before this date.

        Returns:
            Number of records deleted.
        """
        connection = self._require_connection()
        schema_name = self._get_schema_name()
        if before_date:
            count_result = connection.execute(
                f"SELECT COUNT(*) FROM {schema_name}.run_history WHERE timestamp < ?", [before_date.isoformat()]
            ).fetchone()
            connection.execute(f"DELETE FROM {schema_name}.run_history WHERE timestamp < ?", [before_date.isoformat()])
        else:
            count_result = connection.execute(f"SELECT COUNT(*) FROM {schema_name}.run_history").fetchone()
            connection.execute(f"DELETE FROM {schema_name}.run_history")
        return count_result[0] if count_result else 0

    def export_json(self, output_path: str, filters: dict[str, Any] | None = None) -> None:
        """Export run history to JSON."""
        runs = self.search(**(filters or {}), limit=10000)
        with open(output_path, "w") as f:
            json.dump([asdict(r) for r in runs], f, indent=2, default=str)

    def close(self) -> None:
        """Reset the history; closes the connection only if ``open`` created it."""
        if self._owned is not None:
            self._owned.close()
            self._owned = None
        self._connection = None
        self._initialized = False

    def _insert_history_record(self, record: dict[str, Any]) -> None:
        connection = self._require_connection()
        schema_name = self._get_schema_name()
        record = {k: v for k, v in record.items() if k != "id"}

        columns = ["id"] + list(record.keys())
        placeholders = [f"nextval('{schema_name}.run_history_id_seq')"] + ["?" for _ in record]
        connection.execute(
            f"""
            INSERT INTO {schema_name}.run_history ({", ".join(columns)})
            VALUES ({", ".join(placeholders)})
        """,
            [record[col] for col in record],
        )

    def _row_to_record(self, row: Any) -> RunRecord | None:
        """Convert a database row to a RunRecord."""
        if not row:
            return None
        connection = self._require_connection()
        description = connection.description
        if description is None:
            raise RuntimeError("No cursor description available")
        columns = [desc[0] for desc in description]
        row_dict = dict(zip(columns, row, strict=False))
        if row_dict.get("verdict"):
            row_dict["verdict"] = json.loads(row_dict["verdict"])
        return RunRecord(**row_dict)
