import os

from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

from ..config import get_settings

SQLALCHEMY_DATABASE_URL = get_settings().database_url

# Ensure the data directory of a file-backed SQLite database exists
if SQLALCHEMY_DATABASE_URL.startswith("sqlite:///"):
    directory = os.path.dirname(SQLALCHEMY_DATABASE_URL[len("sqlite:///"):])
    if directory:
        os.makedirs(directory, exist_ok=True)

engine = create_engine(SQLALCHEMY_DATABASE_URL, connect_args={"check_same_thread": False})
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


# Dependency for getting database session
def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()
