# packaged experiment defaults live next to this file
from pathlib import Path

CONFIG_DIR = Path(__file__).resolve().parent
