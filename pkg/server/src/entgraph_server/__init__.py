from .config import ConfigError, ServerConfig, load_config
from .app import create_app
from .models import Capabilities, CapabilityDisabled

__version__ = "0.1.0"

__all__ = [
    "Capabilities",
    "CapabilityDisabled",
    "ConfigError",
    "ServerConfig",
    "create_app",
    "load_config",
    "__version__",
]
