"""Wall time against final-time error for SEXP, SEM and CNM.

    python scripts/fig2_work_precision.py --output-dir results/fig2 --repetitions 5

Extra arguments go straight to ``stochheat work-precision``.
"""
import sys

from stochheat import cli

if __name__ == "__main__":
    sys.exit(cli.main(["work-precision", *sys.argv[1:]]))
