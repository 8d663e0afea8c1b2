"""Hidden-entanglement simulator entry point."""

from app.cli import run

if __name__ == "__main__":
    run()
