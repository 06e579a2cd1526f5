"""Walk through the 2-bit example tree."""

from meradc.cli import run_fig4_demo

if __name__ == "__main__":
    run_fig4_demo()
