import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

PROJECT_ROOT = Path(__file__).parent.parent


class Settings:
    # Reproducibility
    DEFAULT_SEED = int(os.getenv('LESIONGEN_SEED', '0'))

    # Batch execution
    WORKERS = int(os.getenv('LESIONGEN_WORKERS', '1'))
    OUTPUT_DIR = os.getenv('LESIONGEN_OUTPUT_DIR', 'outputs')
    # Desk-scale generation grid edge in voxels, 0 means whole volume
    GRID = int(os.getenv('LESIONGEN_GRID', '64'))
    MAX_ATTEMPTS = int(os.getenv('LESIONGEN_MAX_ATTEMPTS', '5'))

    # Curation configuration files
    KEYWORD_CONFIG = os.getenv(
        'LESIONGEN_KEYWORD_CONFIG',
        str(PROJECT_ROOT / 'config' / 'organ_keywords.json')
    )
    STRUCTURE_CONFIG = os.getenv(
        'LESIONGEN_STRUCTURE_CONFIG',
        str(PROJECT_ROOT / 'config' / 'structure_labels.json')
    )

    # Refinement defaults
    REFINE_STEPS = int(os.getenv('LESIONGEN_REFINE_STEPS', '5'))
    REFINE_WINDOW = int(os.getenv('LESIONGEN_REFINE_WINDOW', '128'))
    REFINE_OVERLAP = float(os.getenv('LESIONGEN_REFINE_OVERLAP', '0.25'))
    DIFFUSION_TIMESTEPS = int(os.getenv('LESIONGEN_DIFFUSION_TIMESTEPS', '1000'))
    BETA_MIN = float(os.getenv('LESIONGEN_BETA_MIN', '1e-4'))
    BETA_MAX = float(os.getenv('LESIONGEN_BETA_MAX', '0.02'))
    PREDICTOR_TIMEOUT = float(os.getenv('LESIONGEN_PREDICTOR_TIMEOUT', '60'))

    # Evaluation defaults
    BOOTSTRAP_REPLICATES = int(os.getenv('LESIONGEN_BOOTSTRAP', '1000'))
    PERMUTATIONS = int(os.getenv('LESIONGEN_PERMUTATIONS', '10000'))
    CONFIDENCE_LEVEL = float(os.getenv('LESIONGEN_LEVEL', '0.95'))

    # Logging Configuration
    LOGFIRE_ENABLED = os.getenv('LOGFIRE_ENABLED', 'if-token-present')
    LOG_CONSOLE = os.getenv('LESIONGEN_LOG_CONSOLE', '1') not in ('0', 'false', 'False')


settings = Settings()
