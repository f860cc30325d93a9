import sys

from batchcbo.cli.main import main

sys.exit(main())
