"""``python -m padictree``: same entry point as the ``padictree`` script."""

from .cli import main

raise SystemExit(main())
