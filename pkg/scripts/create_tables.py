import os
import sys

# Add the src directory to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from asnrc.db.database import DatabaseManager


def create_tables(url=None):
    """Create the results-store tables."""
    db = DatabaseManager(url)
    print(f"Creating tables in {db.url} ...")
    db.create_tables()
    print("Tables created successfully!")


if __name__ == "__main__":
    create_tables(sys.argv[1] if len(sys.argv) > 1 else None)
