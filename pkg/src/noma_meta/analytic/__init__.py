from .moments import *  # noqa: F401,F403
from .metadist import *  # noqa: F401,F403
from .performance import *  # noqa: F401,F403
