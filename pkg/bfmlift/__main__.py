from bfmlift.cli import main

raise SystemExit(main())
