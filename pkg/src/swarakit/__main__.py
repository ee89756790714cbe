from swarakit.cli import main

raise SystemExit(main())
