import sys

from app.main import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:] or ["subordinator", "--delta", "0.5", "--t", "1", "--s", "1"]))
