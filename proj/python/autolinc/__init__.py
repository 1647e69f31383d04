from ._autolinc import *  # noqa: F401,F403
from ._autolinc import __doc__  # noqa: F401
