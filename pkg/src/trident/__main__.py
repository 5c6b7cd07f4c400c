from trident.cli import main

raise SystemExit(main())
