from asnrc.cli import main

raise SystemExit(main())
