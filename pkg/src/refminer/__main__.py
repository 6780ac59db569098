from refminer.cli import main
import sys

sys.exit(main())
