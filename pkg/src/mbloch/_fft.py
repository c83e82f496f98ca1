"""Radix-2 FFT kernel (numba) with numpy.fft as the fallback path."""
import numpy as np

from ._jit import USE_NUMBA, kernel


@kernel
def _fft_radix2(x, inverse):
    n = x.shape[0]
    a = x.astype(np.complex128)
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j ^= bit
        if i < j:
            tmp = a[i]
            a[i] = a[j]
            a[j] = tmp
    sign = 1.0 if inverse else -1.0
    tw = np.exp(sign * 2j * np.pi * np.arange(n // 2) / n)
    size = 2
    while size <= n:
        half = size // 2
        stride = n // size
        for start in range(0, n, size):
            for k in range(half):
                u = a[start + k]
                v = a[start + k + half] * tw[k * stride]
                a[start + k] = u + v
                a[start + k + half] = u - v
        size *= 2
    if inverse:
        a /= n
    return a


if USE_NUMBA:
    @kernel
    def fft(x):
        return _fft_radix2(x, False)

    @kernel
    def ifft(x):
        return _fft_radix2(x, True)
else:
    def fft(x):
        return np.fft.fft(x)

    def ifft(x):
        return np.fft.ifft(x)


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0
