"""Main entry point for the fusion emotion toolkit."""

from cli.main import main


if __name__ == "__main__":
    main()
