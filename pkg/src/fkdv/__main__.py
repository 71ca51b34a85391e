import sys

from fkdv.main import main

sys.exit(main())
