from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, Integer, JSON, String, Text

from .connection import Base


class EstimateRun(Base):
    __tablename__ = "estimate_runs"

    id = Column(Integer, primary_key=True, index=True)
    pattern_name = Column(String(255), nullable=False, index=True)
    pattern_text = Column(Text, nullable=False)
    group = Column(String(32), nullable=False)  # roots:<r> or matrix:<d>
    colors = Column(Integer, nullable=False)
    instances = Column(Integer, nullable=False)
    algorithm = Column(Integer, nullable=False)  # 1 or 2
    master_seed = Column(String(32), nullable=False)  # 64-bit, kept as text for SQLite
    mean = Column(Float, nullable=False)
    std_error = Column(Float, nullable=False)
    report = Column(JSON, nullable=False)
    created_at = Column(DateTime, default=lambda: datetime.now(timezone.utc))

    @classmethod
    def from_report(cls, pattern_text: str, report) -> "EstimateRun":
        """Row for an EstimateReport; the full report is kept as JSON."""
        return cls(
            pattern_name=report.pattern,
            pattern_text=pattern_text,
            group=report.plan.group,
            colors=report.plan.colors,
            instances=report.plan.instances,
            algorithm=report.algorithm,
            master_seed=str(report.master_seed),
            mean=report.mean,
            std_error=report.std_error,
            report=report.model_dump(mode="json"),
        )
