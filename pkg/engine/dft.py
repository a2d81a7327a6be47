"""
Prime-length discrete Fourier transform via the chirp z (Bluestein) reduction.

A length-n DFT is rewritten with nk = (n^2 + k^2 - (k-n)^2)/2 as a chirp
multiplication, a linear convolution with the conjugate chirp, and a second
chirp multiplication. The convolution runs as a power-of-two FFT, so the
transform costs O(n log n) for any n, prime or not.
"""

from scipy.fft import fft, ifft
import numpy as np
import logging

logger = logging.getLogger(__name__)


def _pow2_at_least(n: int) -> int:
    """Smallest power of two >= n."""
    return 1 << max(0, (int(n) - 1).bit_length())


class BluesteinDFT:
    """
    Callable length-n DFT with precomputed chirps.

    ``BluesteinDFT(n, sign)(x)[k] = sum_j x[j] * exp(sign * 2*pi*i * j*k / n)``

    sign = -1 matches ``numpy.fft.fft``; sign = +1 is the unnormalised inverse.
    """

    def __init__(self, n: int, sign: int = -1):
        """
        Precompute the chirp and the transformed convolution kernel.

        Args:
            n: Transform length (>= 1)
            sign: Exponent sign, +1 or -1
        """
        if n < 1:
            raise ValueError(f"transform length must be positive, got {n}")
        if sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")

        self.n = int(n)
        self.sign = sign
        self.nfft = _pow2_at_least(2 * self.n - 1)

        j = np.arange(self.n, dtype=np.int64)
        # j^2 mod 2n keeps the phase argument small and exact
        self._chirp = np.exp(sign * 1j * np.pi * ((j * j) % (2 * self.n)) / self.n)

        kernel = np.zeros(self.nfft, dtype=np.complex128)
        kernel[:self.n] = np.conj(self._chirp)
        if self.n > 1:
            kernel[-(self.n - 1):] = np.conj(self._chirp[1:])[::-1]
        self._kernel_hat = fft(kernel)

        logger.debug(f"Bluestein DFT prepared: n={self.n}, nfft={self.nfft}, sign={sign}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """
        Transform a length-n signal.

        Args:
            x: Real or complex array of length n

        Returns:
            Complex array of length n
        """
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.n,):
            raise ValueError(f"DFT defined for length {self.n}, not {x.shape}")

        padded = np.zeros(self.nfft, dtype=np.complex128)
        padded[:self.n] = x * self._chirp
        conv = ifft(fft(padded) * self._kernel_hat)
        return self._chirp * conv[:self.n]


def bluestein_dft(x: np.ndarray, sign: int = -1) -> np.ndarray:
    """
    One-shot Bluestein DFT.

    Args:
        x: Input signal
        sign: Exponent sign, +1 or -1

    Returns:
        Complex transform of the same length
    """
    x = np.asarray(x)
    return BluesteinDFT(len(x), sign=sign)(x)
