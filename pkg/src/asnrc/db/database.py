import json
import logging
from typing import List, Optional

from sqlalchemy import create_engine, select
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from asnrc.logs import log_tag

logger = logging.getLogger(__name__)

Base = declarative_base()


class DatabaseManager:
    """Results store for task reports, one row per run."""

    def __init__(self, url: Optional[str] = None, echo: bool = False):
        if url is None:
            from asnrc.config import settings

            url = settings().database_url
        self.url = url
        self.engine = create_engine(url, echo=echo, future=True)
        self.SessionLocal = sessionmaker(bind=self.engine, autoflush=False, expire_on_commit=False)

    def get_session(self) -> Session:
        return self.SessionLocal()

    def create_tables(self) -> None:
        from asnrc.db import models  # noqa: F401  registers the tables on Base

        Base.metadata.create_all(bind=self.engine)

    def record_report(self, report, config=None) -> int:
        """Insert one report (and the config that produced it); returns the row id."""
        from asnrc.db.models import TaskRun

        m = report.metrics
        row = TaskRun(
            task=report.task,
            seed=report.seed,
            status=report.status,
            message=report.message,
            nrmse=m.nrmse,
            sign_agreement=m.sign_agreement,
            recovery_rate=m.recovery_rate,
            divergence_horizon=m.divergence_horizon,
            summary_json=report.summary_json(),
            config_json=config.model_dump_json() if config is not None else None,
        )
        with self.get_session() as session:
            session.add(row)
            session.commit()
            log_tag(logger, "Store", "recorded %s run %d (seed %d)", report.task, row.id, report.seed,
                    level=logging.DEBUG)
            return row.id

    def list_runs(self, task: Optional[str] = None, limit: Optional[int] = None) -> List["TaskRun"]:
        """Recorded runs, newest first."""
        from asnrc.db.models import TaskRun

        query = select(TaskRun).order_by(TaskRun.id.desc())
        if task is not None:
            query = query.where(TaskRun.task == task)
        if limit is not None:
            query = query.limit(limit)
        with self.get_session() as session:
            return list(session.scalars(query))


def summary_of(run) -> dict:
    return json.loads(run.summary_json)
