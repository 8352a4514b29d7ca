from _gridvec import *  # noqa: F401,F403
