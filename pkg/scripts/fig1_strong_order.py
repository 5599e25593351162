"""Strong error against step size for SEXP (optionally SEM and CNM).

    python scripts/fig1_strong_order.py --output-dir results/fig1
    python scripts/fig1_strong_order.py --M 512 --samples 500 --schemes sexp,sem,cnm

Extra arguments go straight to ``stochheat strong-order``.
"""
import sys

from stochheat import cli

if __name__ == "__main__":
    sys.exit(cli.main(["strong-order", *sys.argv[1:]]))
