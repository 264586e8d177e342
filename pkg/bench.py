#!/usr/bin/env python
"""Command-line utility for the MCDA benchmark."""


def main():
    """Run benchmark commands."""
    try:
        from discriminant.cli import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import the discriminant package. Are its requirements "
            "installed and is the project root on your PYTHONPATH? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    run()


if __name__ == '__main__':
    main()
