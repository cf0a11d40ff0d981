"""Start the HTTP service (honors SKETCHPLAY_ADDR and SKETCHPLAY_DATA_DIR)."""
from sketchplay.service import main

if __name__ == "__main__":
    main()
