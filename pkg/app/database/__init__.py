from .connection import get_db, engine, SessionLocal
from .models import EstimateRun, Base

__all__ = ['get_db', 'engine', 'SessionLocal', 'EstimateRun', 'Base']
