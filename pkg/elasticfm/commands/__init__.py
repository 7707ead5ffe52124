from .forward import forward
from .reconstruct import reconstruct
from .pipeline import pipeline
from .selftest import selftest
