from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, Integer, String, Text

from .database import Base


def _now() -> datetime:
    return datetime.now(timezone.utc)


class TaskRun(Base):
    __tablename__ = "task_runs"
    id = Column(Integer, primary_key=True)
    task = Column(String(32), nullable=False, index=True)
    seed = Column(Integer, nullable=False)
    status = Column(String(16), nullable=False)  # 'ok' or 'failed'
    message = Column(Text)
    nrmse = Column(Float)
    sign_agreement = Column(Float)
    recovery_rate = Column(Float)
    divergence_horizon = Column(Integer)
    summary_json = Column(Text, nullable=False)
    config_json = Column(Text)
    created_at = Column(DateTime(timezone=True), default=_now, nullable=False)
