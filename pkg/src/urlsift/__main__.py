import sys

from urlsift.cli import main

sys.exit(main())
