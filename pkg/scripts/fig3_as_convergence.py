"""Single-path profiles u(T, x) at dyadic step sizes against the fine reference.

    python scripts/fig3_as_convergence.py --paths 5 --output-dir results/fig3

Extra arguments go straight to ``stochheat as-convergence``.
"""
import sys

from stochheat import cli

if __name__ == "__main__":
    sys.exit(cli.main(["as-convergence", *sys.argv[1:]]))
