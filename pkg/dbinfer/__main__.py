import sys

import dbinfer

if __name__ == "__main__":
    sys.exit(dbinfer.cli.main())
