"""Main entry point for attractor-lab package."""

from attractor_lab.cli import main

if __name__ == "__main__":
    main()
