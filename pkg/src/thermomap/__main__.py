import sys

from thermomap.cli import main

if __name__ == "__main__":
    sys.exit(main())
