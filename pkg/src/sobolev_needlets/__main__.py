from __future__ import annotations

import sys

from sobolev_needlets.cli import main

sys.exit(main())
