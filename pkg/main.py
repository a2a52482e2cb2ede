import os
import sys

from dotenv import load_dotenv

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))

from asnrc.cli import main  # noqa: E402

# Load environment variables from .env
load_dotenv()

if __name__ == "__main__":
    sys.exit(main())
