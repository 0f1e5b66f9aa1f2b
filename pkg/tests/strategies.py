import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def vec(n=3, bound=10.0):
    return arrays(np.float64, (n,), elements=st.floats(-bound, bound, allow_nan=False,
                                                       allow_infinity=False))


def mat(shape, bound=10.0):
    return arrays(np.float64, shape, elements=st.floats(-bound, bound, allow_nan=False,
                                                        allow_infinity=False))
