"""
ソースツリーから直接起動するためのランチャー

    python run.py figure --preset fig2 --out fig2.csv
"""
import sys

if __name__ == "__main__":
    from src.main import run_cli

    sys.exit(run_cli(sys.argv[1:]))
