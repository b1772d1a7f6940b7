"""Entry point for: python -m cyclesr"""

from cyclesr.interfaces.cli import cli

if __name__ == "__main__":
    cli()
